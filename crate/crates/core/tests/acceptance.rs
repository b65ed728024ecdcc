//! Release gate: one test per acceptance criterion, each printing a single
//! `criterion NN: PASS/FAIL` line (visible under `cargo test -- --nocapture`).
//!
//! Tolerances and grids are pinned here, not read from configuration, so a
//! green run of this target is the certification artifact.

use std::time::{Duration, Instant};

use qgrowth::checks::{
    check_binomial_family, check_comparison, default_params, run_check, sharpness_search,
    CheckReport, CheckVerdict, Level, Margin, SearchBest,
};
use qgrowth::exact::{decimal_string, rat, rint, Rational};
use qgrowth::growth::{coeffs_by_difference, coeffs_by_recursion, q_direct_given, q_newton, CoeffCache};
use qgrowth::lattice::ZVariant;
use qgrowth::walk::WalkDistribution;

fn verdict_line(index: u32, ok: bool, detail: &str) {
    println!(
        "criterion {index:02}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {index:02} failed: {detail}");
}

fn run_full(check_id: &str) -> CheckReport {
    run_check(check_id, &default_params(check_id, Level::Full))
        .unwrap_or_else(|e| panic!("{check_id} errored: {e}"))
}

fn margin_is_exact_nonnegative(margin: &Margin) -> bool {
    matches!(margin, Margin::Exact { num, .. } if !num.starts_with('-'))
}

#[test]
fn criterion_01_coefficient_routes_agree() {
    let started = Instant::now();
    let mut cache = CoeffCache::in_memory();
    let mut ok = true;
    for k in 0..=12 {
        let difference = coeffs_by_difference(k);
        let recursion = coeffs_by_recursion(k, &mut cache);
        ok &= difference.coeffs() == recursion.coeffs();
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    verdict_line(
        1,
        ok,
        &format!(
            "difference and recursion coefficients identical for k <= 12 ({:.1?})",
            elapsed
        ),
    );
}

#[test]
fn criterion_02_closed_form_coefficients() {
    let mut cache = CoeffCache::in_memory();
    let mut ok = true;
    for k in 0..=12 {
        let series = coeffs_by_recursion(k, &mut cache);
        ok &= series.coeff(0) == &rint(1);
        if k >= 1 {
            ok &= series.coeff(1) == &rat(k as i64 - 1, 4);
        }
    }
    verdict_line(
        2,
        ok,
        "a_{k,0} = 1 and a_{k,1} = (k-1)/4 exactly for k <= 12",
    );
}

#[test]
fn criterion_03_newton_matches_direct() {
    let mut cache = CoeffCache::in_memory();
    let series: Vec<_> = (0..=8).map(|k| coeffs_by_recursion(k, &mut cache)).collect();
    let mut walk = WalkDistribution::with_capacity(20);
    let mut ok = true;
    loop {
        let n = walk.steps();
        for s in &series {
            ok &= q_newton(s, n) == q_direct_given(&walk, s.k(), ZVariant::Plain);
        }
        if n == 20 {
            break;
        }
        walk.advance();
    }
    verdict_line(
        3,
        ok,
        "Newton evaluation equals the direct expectation for k <= 8, n <= 20",
    );
}

#[test]
fn criterion_04_structural_identities_exact() {
    let mut ok = true;
    let mut failed = Vec::new();
    for id in [
        "harmonicity",
        "shift_identity",
        "laplace_power_identity",
        "derivative_laplacian",
    ] {
        let report = run_full(id);
        let clean = report.verdict == CheckVerdict::Pass && report.margin == Margin::zero();
        if !clean {
            failed.push(id);
        }
        ok &= clean;
    }
    verdict_line(
        4,
        ok,
        &if failed.is_empty() {
            "four structural identities hold with zero residual on full grids".into()
        } else {
            format!("identities with nonzero residual: {failed:?}")
        },
    );
}

#[test]
fn criterion_05_absolute_monotonicity() {
    let report = run_full("absolute_monotonicity");
    let ok = report.verdict == CheckVerdict::Pass
        && margin_is_exact_nonnegative(&report.margin);
    verdict_line(
        5,
        ok,
        "all forward differences of Q_k nonnegative for k <= 8, reach 16",
    );
}

#[test]
fn criterion_06_leading_coefficient_rows() {
    let report = run_full("leading_coefficient");
    let ok = report.verdict == CheckVerdict::Pass && report.margin == Margin::zero();
    verdict_line(
        6,
        ok,
        "j-th difference of a_{k,j} in k is 4^{-j} and the next one vanishes, j <= 4",
    );
}

#[test]
fn criterion_07_three_circles_certified() {
    let report = run_full("three_circles");
    let precision: u32 = report
        .constants_used
        .get("max_precision_bits")
        .expect("three_circles records its worst precision")
        .parse()
        .unwrap();
    let ok = report.verdict == CheckVerdict::Pass && precision <= 256;
    verdict_line(
        7,
        ok,
        &format!(
            "three circles inequality certified for k <= 8, n <= 16 at <= {precision} bits"
        ),
    );
}

#[test]
fn criterion_08_bounds_suite() {
    let started = Instant::now();
    let suite = [
        "fk_bound",
        "zk_bound",
        "moment_bound",
        "q_rough_bound",
        "tail_estimate",
        "head_estimate",
        "vandermonde",
        "pair_product",
        "model_abs_monotone",
        "coefficient_global_bound",
        "truncation_bracket",
    ];
    let mut ok = true;
    let mut failed = Vec::new();
    for id in suite {
        let report = run_full(id);
        let clean = report.verdict == CheckVerdict::Pass
            && margin_is_exact_nonnegative(&report.margin);
        if !clean {
            failed.push(id);
        }
        ok &= clean;
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(600);
    verdict_line(
        8,
        ok,
        &if failed.is_empty() {
            format!("11 bound checks PASS with exact nonnegative margins ({elapsed:.1?})")
        } else {
            format!("bound checks not clean: {failed:?}")
        },
    );
}

#[test]
fn criterion_09_model_saturation_at_scale() {
    let started = Instant::now();
    let report =
        check_binomial_family(&rat(1, 4), &rat(1, 2), &rint(3), 10_000, 1_000_000, 512)
            .unwrap();
    let elapsed = started.elapsed();
    let precision: u32 = report
        .constants_used
        .get("precision_used")
        .expect("binomial_family records its precision")
        .parse()
        .unwrap();
    let ok = report.verdict == CheckVerdict::Pass
        && precision <= 512
        && elapsed < Duration::from_secs(30);
    verdict_line(
        9,
        ok,
        &format!(
            "model beats the sharper error term at k = 10^4, n = 10^6 ({precision} bits, {elapsed:.1?})"
        ),
    );
}

#[test]
fn criterion_10_sharpness_witnesses() {
    let started = Instant::now();
    let a = rint(1);
    let eps = rat(3, 5);
    let mut total_cells = 0usize;
    let mut witnesses = 0usize;
    let mut first: Option<(usize, usize)> = None;
    let mut best: Option<(Rational, SearchBest)> = None;
    for k in 40..=60 {
        let report = sharpness_search(&a, &eps, k, k, 2 * k, 4 * k, 128).unwrap();
        total_cells += report.cells;
        witnesses += report.witnesses.len();
        if first.is_none() {
            first = report.witnesses.first().map(|w| (w.k, w.n));
        }
        if let Some(b) = report.best_a {
            let lo: Rational = b.lo.parse().unwrap();
            if best.as_ref().is_none_or(|(cur, _)| lo > *cur) {
                best = Some((lo, b));
            }
        }
    }
    let elapsed = started.elapsed();
    let best = best.expect("every cell has a positive geometric mean here");
    let ok = witnesses >= 1 && elapsed < Duration::from_secs(1200);
    verdict_line(
        10,
        ok,
        &format!(
            "{witnesses}/{total_cells} cells certify Q_k(2n) > sqrt(Q_k(n)Q_k(4n)) + 2^(-n^1.1)·Q_k(4n), \
             first at (k, n) = {:?}; best certified A = {} at (k, n) = ({}, {}) ({elapsed:.1?})",
            first.expect("at least one witness"),
            decimal_string(&best.0, 6),
            best.1.k,
            best.1.n,
        ),
    );
}

#[test]
fn criterion_11_lower_comparison() {
    let mut ok = true;
    let mut min_ratio: Option<Rational> = None;
    let mut max_ratio: Option<Rational> = None;
    for k in [4usize, 8, 12, 16] {
        let ns = [(k * k).div_ceil(2), k * k, 2 * k * k, 4 * k * k];
        let report = check_comparison(k, &ns).unwrap();
        ok &= report.verdict == CheckVerdict::Pass;
        for w in &report.witnesses {
            let ratio = || -> Rational { w.get("ratio").unwrap().parse().unwrap() };
            match w.get("kind").map(String::as_str) {
                Some("min_ratio") => {
                    let r = ratio();
                    if min_ratio.as_ref().is_none_or(|m| r < *m) {
                        min_ratio = Some(r);
                    }
                }
                Some("max_ratio") => {
                    let r = ratio();
                    if max_ratio.as_ref().is_none_or(|m| r > *m) {
                        max_ratio = Some(r);
                    }
                }
                _ => {}
            }
        }
    }
    let quarter = rat(1, 4);
    let min_ratio = min_ratio.expect("comparison reports its extremal ratios");
    let max_ratio = max_ratio.expect("comparison reports its extremal ratios");
    ok &= min_ratio >= quarter;
    verdict_line(
        11,
        ok,
        &format!(
            "Q_k(n) / C(n + k/4, k) stays in [{}, {}] >= 1/4 on the pinned grid",
            decimal_string(&min_ratio, 6),
            decimal_string(&max_ratio, 6),
        ),
    );
}

#[test]
fn criterion_12_monte_carlo_consistency() {
    let report = run_full("monte_carlo");
    let within = report
        .constants_used
        .get("within_cells")
        .expect("monte_carlo records its hit count")
        .clone();
    let ok = report.verdict == CheckVerdict::Pass;
    verdict_line(
        12,
        ok,
        &format!("seeded estimates within 5 standard errors in {within} cells at 10^5 samples"),
    );
}
