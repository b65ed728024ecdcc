//! Checks on the growth functional `Q_k` and its Newton coefficients: sign
//! structure, the certified three circles inequality, coefficient bounds, the
//! truncation bracket, the binomial comparison, and Monte Carlo consistency.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{
    claim_le, escalate, tighten, CheckReport, CheckVerdict, Margin, ParamReader, Params,
    ReportBuilder, ESCALATION_CAP,
};
use crate::error::{Error, Result};
use crate::exact::{
    binom_integer, decimal_to_rational, pow2_neg_bounds, rat, rint, sqrt_bounds, DyadicInterval,
    Rational,
};
use crate::growth::{
    coeffs_by_recursion, forward_differences, q_direct_given, q_newton, q_truncated,
    truncation_a, truncation_b, truncation_cutoff, CoeffCache, NewtonSeries,
};
use crate::lattice::ZVariant;
use crate::model::{f_model, ModelParams};
use crate::walk::{monte_carlo_q, WalkDistribution};

/// Every forward difference of `n -> Q_k(n)` up to total reach
/// `order + offset <= reach` is nonnegative.
pub(super) fn absolute_monotonicity(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new("absolute_monotonicity", params, &["k_max", "reach"])?;
    let k_max = reader.usize("k_max", 6)?;
    let reach = reader.usize("reach", 12)?;

    let mut rb = ReportBuilder::new("absolute_monotonicity");
    rb.param("k_max", k_max);
    rb.param("reach", reach);

    let mut worst: Option<Rational> = None;
    let mut worst_witness: Vec<(String, String)> = Vec::new();
    let mut violations = 0usize;

    for k in 0..=k_max {
        let mut values = Vec::with_capacity(reach + 1);
        let mut w = WalkDistribution::with_capacity(reach);
        loop {
            values.push(q_direct_given(&w, k, ZVariant::Plain));
            if w.steps() == reach {
                break;
            }
            w.advance();
        }
        let triangle = forward_differences(&values);
        for (order, row) in triangle.iter().enumerate() {
            for (offset, value) in row.iter().enumerate() {
                if value.is_negative() {
                    violations += 1;
                    rb.witness(&[
                        ("k", k.to_string()),
                        ("order", order.to_string()),
                        ("n", offset.to_string()),
                        ("value", value.to_string()),
                    ]);
                }
                if tighten(&mut worst, value) {
                    worst_witness = vec![
                        ("k".to_string(), k.to_string()),
                        ("order".to_string(), order.to_string()),
                        ("n".to_string(), offset.to_string()),
                    ];
                }
            }
        }
    }

    let verdict = if violations == 0 {
        let entries: Vec<(&str, String)> = worst_witness
            .iter()
            .map(|(k, v)| (k.as_str(), v.clone()))
            .collect();
        rb.witness(&entries);
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rb.finish(verdict, Margin::exact(&worst.unwrap_or_else(Rational::zero))))
}

/// Certified three circles inequality with error term:
/// `Q_k(2n) <= 2 sqrt(Q_k(n) Q_k(4n)) + 2^{-sqrt(n)} Q_k(4n)`.
///
/// `Q` values are exact rationals; the square root and the error factor are
/// enclosed in dyadic intervals, escalating precision on INCONCLUSIVE.
pub(super) fn three_circles(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new("three_circles", params, &["k_max", "n_max", "precision"])?;
    let k_max = reader.usize("k_max", 6)?;
    let n_max = reader.usize("n_max", 12)?;
    let base_precision = reader.u32("precision", 128)?;

    let mut rb = ReportBuilder::new("three_circles");
    rb.param("k_max", k_max);
    rb.param("n_max", n_max);
    rb.param("precision", base_precision);

    let mut cache = CoeffCache::in_memory();
    let mut verdict = CheckVerdict::Pass;
    let mut worst: Option<(Rational, DyadicInterval)> = None;
    let mut worst_witness: Vec<(String, String)> = Vec::new();
    let mut max_precision = base_precision;

    for k in 0..=k_max {
        let series = coeffs_by_recursion(k, &mut cache);
        for n in 1..=n_max {
            let qn = q_newton(&series, n);
            let q2n = q_newton(&series, 2 * n);
            let q4n = q_newton(&series, 4 * n);
            let product = &qn * &q4n;

            let (cell_verdict, slack, precision_used) =
                escalate(base_precision, ESCALATION_CAP, |p| {
                    let sqrt = sqrt_bounds(&product, p)?;
                    let root_n = sqrt_bounds(&rint(n as i64), p)?;
                    let error = pow2_neg_bounds(&root_n, p)?;
                    let rhs = sqrt.scale(&rat(2, 1)).add(&error.scale(&q4n));
                    let lhs = DyadicInterval::from_rational(&q2n, p);
                    let slack = rhs.sub(&lhs);
                    Ok((claim_le(&lhs, &rhs), slack))
                })?;
            max_precision = max_precision.max(precision_used);

            match cell_verdict {
                CheckVerdict::Pass => {}
                CheckVerdict::Fail => {
                    verdict = CheckVerdict::Fail;
                    rb.witness(&[
                        ("k", k.to_string()),
                        ("n", n.to_string()),
                        ("issue", "inequality certified false".into()),
                    ]);
                }
                CheckVerdict::Inconclusive => {
                    if verdict != CheckVerdict::Fail {
                        verdict = CheckVerdict::Inconclusive;
                    }
                    rb.witness(&[
                        ("k", k.to_string()),
                        ("n", n.to_string()),
                        ("issue", "undecided at the precision ceiling".into()),
                    ]);
                }
            }

            let lo = slack.lo_rational();
            let replace = match &worst {
                Some((current_lo, _)) => lo < *current_lo,
                None => true,
            };
            if replace {
                worst = Some((lo, slack));
                worst_witness = vec![
                    ("k".to_string(), k.to_string()),
                    ("n".to_string(), n.to_string()),
                ];
            }
        }
    }

    rb.constant("max_precision_bits", max_precision);
    if verdict == CheckVerdict::Pass && !worst_witness.is_empty() {
        let entries: Vec<(&str, String)> = worst_witness
            .iter()
            .map(|(k, v)| (k.as_str(), v.clone()))
            .collect();
        rb.witness(&entries);
    }
    let margin = match &worst {
        Some((_, slack)) => Margin::interval(slack),
        None => Margin::zero(),
    };
    Ok(rb.finish(verdict, margin))
}

/// The Newton coefficients grow polynomially in `k` with leading term
/// `(k/4)^j / j!`: the `j`-th forward difference of `k -> a_{k,j}` is the
/// constant `4^{-j}` and the `(j+1)`-th vanishes.
pub(super) fn leading_coefficient(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new("leading_coefficient", params, &["j_max", "span"])?;
    let j_max = reader.usize("j_max", 3)?;
    let span = reader.usize("span", 8)?;
    if span <= j_max {
        return Err(Error::InvalidParam {
            name: "leading_coefficient.span".into(),
            reason: "span must exceed j_max so both difference rows exist".into(),
        });
    }

    let mut rb = ReportBuilder::new("leading_coefficient");
    rb.param("j_max", j_max);
    rb.param("span", span);

    let mut cache = CoeffCache::in_memory();
    let series: BTreeMap<usize, NewtonSeries> = (0..=j_max + span)
        .map(|k| (k, coeffs_by_recursion(k, &mut cache)))
        .collect();

    let mut worst = Rational::zero();
    for j in 0..=j_max {
        let values: Vec<Rational> = (j..=j + span)
            .map(|k| series[&k].coeff(j).clone())
            .collect();
        let triangle = forward_differences(&values);
        let expected = Rational::new(BigInt::from(1), BigInt::from(4).pow(j as u32));
        for (offset, value) in triangle[j].iter().enumerate() {
            let gap = value - &expected;
            if !gap.is_zero() {
                rb.witness(&[
                    ("j", j.to_string()),
                    ("k", (j + offset).to_string()),
                    ("row", j.to_string()),
                    ("value", value.to_string()),
                ]);
                let size = gap.abs();
                if size > worst {
                    worst = size;
                }
            }
        }
        for (offset, value) in triangle[j + 1].iter().enumerate() {
            if !value.is_zero() {
                rb.witness(&[
                    ("j", j.to_string()),
                    ("k", (j + offset).to_string()),
                    ("row", (j + 1).to_string()),
                    ("value", value.to_string()),
                ]);
                let size = value.abs();
                if size > worst {
                    worst = size;
                }
            }
        }
    }

    let verdict = if worst.is_zero() { CheckVerdict::Pass } else { CheckVerdict::Fail };
    Ok(rb.finish(verdict, Margin::exact(&-worst)))
}

/// Global coefficient bound `0 <= a_{k,j} <= B1 * C(A1 k, j)` with pinned
/// `A1 = 148 >= 20e^2` and `B1 = 9 >= 8 c_1/c_0`; both constants overridable
/// to exhibit deliberate failures.
pub(super) fn coefficient_global_bound(params: &Params) -> Result<CheckReport> {
    let reader =
        ParamReader::new("coefficient_global_bound", params, &["k_max", "A1", "a1", "B1", "b1"])?;
    let k_max = reader.usize("k_max", 8)?;
    let a1 = match reader.opt_usize("A1")? {
        Some(v) => v,
        None => reader.usize("a1", crate::growth::coeff_bound_a1() as usize)?,
    };
    let b1 = match reader.opt_rational("B1")? {
        Some(v) => v,
        None => reader.rational("b1", rint(crate::growth::coeff_bound_b1() as i64))?,
    };

    let mut rb = ReportBuilder::new("coefficient_global_bound");
    rb.param("k_max", k_max);
    rb.constant("A1", a1);
    rb.constant("B1", &b1);

    let mut cache = CoeffCache::in_memory();
    let mut worst: Option<Rational> = None;
    let mut worst_witness: Vec<(String, String)> = Vec::new();
    let mut violations = 0usize;

    for k in 0..=k_max {
        let series = coeffs_by_recursion(k, &mut cache);
        for j in 0..=k {
            let a = series.coeff(j);
            let bound =
                b1.clone() * Rational::from_integer(binom_integer((a1 * k) as u64, j as u64));
            for (slack, kind) in [
                (a.clone(), "nonnegativity"),
                (bound.clone() - a, "upper bound"),
            ] {
                if slack.is_negative() {
                    violations += 1;
                    rb.witness(&[
                        ("k", k.to_string()),
                        ("j", j.to_string()),
                        ("kind", kind.into()),
                        ("coefficient", series.coeff(j).to_string()),
                        ("bound", bound.to_string()),
                    ]);
                }
                if tighten(&mut worst, &slack) {
                    worst_witness = vec![
                        ("k".to_string(), k.to_string()),
                        ("j".to_string(), j.to_string()),
                        ("kind".to_string(), kind.to_string()),
                    ];
                }
            }
        }
    }

    let verdict = if violations == 0 {
        let entries: Vec<(&str, String)> = worst_witness
            .iter()
            .map(|(k, v)| (k.as_str(), v.clone()))
            .collect();
        rb.witness(&entries);
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rb.finish(verdict, Margin::exact(&worst.unwrap_or_else(Rational::zero))))
}

/// Truncation bracket: with `A = 2414`, `B = 11/2`, for `n` in `(2k, 4k^2]`
/// the head sums satisfy
/// `sum_{j <= ceil(5k^2/n)} <= Q_k(n) <= B * sum_{j <= ceil(Ak^2/n)}`.
pub(super) fn truncation_bracket(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new("truncation_bracket", params, &["k_max", "a", "b"])?;
    let k_max = reader.usize("k_max", 6)?;
    let a = reader.rational("a", truncation_a())?;
    let b = reader.rational("b", truncation_b())?;

    let mut rb = ReportBuilder::new("truncation_bracket");
    rb.param("k_max", k_max);
    rb.constant("A", &a);
    rb.constant("B", &b);

    let mut cache = CoeffCache::in_memory();
    let mut worst: Option<Rational> = None;
    let mut worst_witness: Vec<(String, String)> = Vec::new();
    let mut violations = 0usize;

    for k in 1..=k_max {
        let series = coeffs_by_recursion(k, &mut cache);
        for n in 2 * k + 1..=4 * k * k {
            let q = q_newton(&series, n);
            let lower = q_truncated(&series, n, truncation_cutoff(&rint(5), k, n));
            let upper = q_truncated(&series, n, truncation_cutoff(&a, k, n));
            for (slack, kind) in [
                (&q - &lower, "lower"),
                (b.clone() * upper - &q, "upper"),
            ] {
                if slack.is_negative() {
                    violations += 1;
                    rb.witness(&[
                        ("k", k.to_string()),
                        ("n", n.to_string()),
                        ("kind", kind.into()),
                        ("slack", slack.to_string()),
                    ]);
                }
                if tighten(&mut worst, &slack) {
                    worst_witness = vec![
                        ("k".to_string(), k.to_string()),
                        ("n".to_string(), n.to_string()),
                        ("kind".to_string(), kind.to_string()),
                    ];
                }
            }
        }
    }

    let verdict = if violations == 0 {
        let entries: Vec<(&str, String)> = worst_witness
            .iter()
            .map(|(k, v)| (k.as_str(), v.clone()))
            .collect();
        if !entries.is_empty() {
            rb.witness(&entries);
        }
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rb.finish(verdict, Margin::exact(&worst.unwrap_or_else(Rational::zero))))
}

/// Ratio of `Q_k` to the binomial model at `alpha = 1/4`:
/// `r(n) = Q_k(n) / C(n + k/4, k)`.  The lower bound `r >= 1/4` is asserted
/// only for `n >= k^2/2`; elsewhere the ratio is recorded, never asserted.
/// The extreme ratios over the grid are reported as witnesses.
pub(super) fn comparison(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new("comparison", params, &["k", "k_list", "n_values"])?;
    let ks: Vec<usize> = match reader.opt_usize("k")? {
        Some(k) => vec![k],
        None => match reader.opt_usize_list("k_list")? {
            Some(list) => list,
            None => vec![1, 4, 8],
        },
    };
    let explicit_ns = reader.opt_usize_list("n_values")?;

    let mut rb = ReportBuilder::new("comparison");
    rb.param(
        "k_list",
        ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
    );
    if let Some(ns) = &explicit_ns {
        rb.param(
            "n_values",
            ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
        );
        if ns.contains(&0) {
            return Err(Error::InvalidParam {
                name: "comparison.n_values".into(),
                reason: "each n must be >= 1".into(),
            });
        }
    }
    rb.constant("lower_constant", "1/4");
    rb.constant("asserted_from", "n >= k^2/2");

    let mut cache = CoeffCache::in_memory();
    let quarter = rat(1, 4);
    let mut worst: Option<Rational> = None;
    let mut worst_witness: Vec<(String, String)> = Vec::new();
    let mut min_r: Option<(Rational, usize, usize)> = None;
    let mut max_r: Option<(Rational, usize, usize)> = None;
    let mut violations = 0usize;

    for &k in &ks {
        let ns: Vec<usize> = match &explicit_ns {
            Some(ns) => ns.clone(),
            None => {
                let mut auto = vec![
                    (2 * k).max(1),
                    (4 * k).max(1),
                    (k * k).div_ceil(2).max(1),
                    (k * k).max(1),
                    (2 * k * k).max(1),
                    (4 * k * k).max(1),
                ];
                auto.sort_unstable();
                auto.dedup();
                auto
            }
        };
        let series = coeffs_by_recursion(k, &mut cache);
        let model = if k == 0 {
            None
        } else {
            Some(ModelParams::new(k, rat(1, 4))?)
        };
        for &n in &ns {
            let f = match &model {
                None => rint(1),
                Some(p) => f_model(p, &rint(n as i64)),
            };
            if !f.is_positive() {
                return Err(Error::InvalidParam {
                    name: "comparison.n_values".into(),
                    reason: format!("the model binomial vanishes at k={k}, n={n}"),
                });
            }
            let r = q_newton(&series, n) / f;
            let asserted = 2 * n >= k * k;
            if asserted {
                let slack = &r - &quarter;
                if slack.is_negative() {
                    violations += 1;
                    rb.witness(&[
                        ("k", k.to_string()),
                        ("n", n.to_string()),
                        ("ratio", r.to_string()),
                        ("kind", "asserted lower bound violated".into()),
                    ]);
                }
                if tighten(&mut worst, &slack) {
                    worst_witness = vec![
                        ("k".to_string(), k.to_string()),
                        ("n".to_string(), n.to_string()),
                        ("kind".to_string(), "smallest asserted slack".to_string()),
                    ];
                }
            }
            if min_r.as_ref().is_none_or(|(v, _, _)| r < *v) {
                min_r = Some((r.clone(), k, n));
            }
            if max_r.as_ref().is_none_or(|(v, _, _)| r > *v) {
                max_r = Some((r.clone(), k, n));
            }
        }
    }

    if let Some((r, k, n)) = &min_r {
        rb.witness(&[
            ("kind", "min_ratio".into()),
            ("k", k.to_string()),
            ("n", n.to_string()),
            ("ratio", r.to_string()),
        ]);
    }
    if let Some((r, k, n)) = &max_r {
        rb.witness(&[
            ("kind", "max_ratio".into()),
            ("k", k.to_string()),
            ("n", n.to_string()),
            ("ratio", r.to_string()),
        ]);
    }
    let verdict = if violations == 0 {
        let entries: Vec<(&str, String)> = worst_witness
            .iter()
            .map(|(k, v)| (k.as_str(), v.clone()))
            .collect();
        if !entries.is_empty() {
            rb.witness(&entries);
        }
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    Ok(rb.finish(verdict, Margin::exact(&worst.unwrap_or_else(Rational::zero))))
}

/// Library-level operation: the comparison check at one `k` over explicit
/// `n` values.
pub fn check_comparison(k: usize, n_values: &[usize]) -> Result<CheckReport> {
    let mut params = Params::new();
    params.insert("k".into(), k.to_string());
    params.insert(
        "n_values".into(),
        n_values.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
    );
    comparison(&params)
}

/// Monte Carlo consistency: the seeded estimator lands within
/// `sigma` standard errors of the exact value in at least `threshold` of the
/// grid cells.  Estimates are compared as reported (12 decimal digits), with
/// an explicit parse slop added to the allowance.
pub(super) fn monte_carlo(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new(
        "monte_carlo",
        params,
        &["k_max", "n_max", "samples", "seed", "sigma", "threshold"],
    )?;
    let k_max = reader.usize("k_max", 4)?;
    let n_max = reader.usize("n_max", 20)?;
    let samples = reader.u64("samples", 2000)?;
    let seed = reader.u64("seed", 20260814)?;
    let sigma = reader.usize("sigma", 5)?;
    let threshold = reader.rational("threshold", rat(19, 20))?;

    let mut rb = ReportBuilder::new("monte_carlo");
    rb.param("k_max", k_max);
    rb.param("n_max", n_max);
    rb.param("samples", samples);
    rb.param("seed", seed);
    rb.param("sigma", sigma);
    rb.param("threshold", &threshold);
    let slop = Rational::new(BigInt::from(sigma as i64 + 1), BigInt::from(10).pow(12));
    rb.constant("parse_slop", &slop);

    let mut cache = CoeffCache::in_memory();
    let mut within = 0usize;
    let mut total = 0usize;
    for k in 0..=k_max {
        let series = coeffs_by_recursion(k, &mut cache);
        for n in 1..=n_max {
            let exact = q_newton(&series, n);
            let cell_seed = seed.wrapping_add((k as u64) * 1_000_003 + n as u64);
            let estimate = monte_carlo_q(k, n, samples, cell_seed, ZVariant::Plain);
            let mean = decimal_to_rational(&estimate.mean)?;
            let se = decimal_to_rational(&estimate.standard_error)?;
            let diff = (mean - &exact).abs();
            let allowance = rint(sigma as i64) * se + &slop;
            total += 1;
            if diff <= allowance {
                within += 1;
            } else {
                rb.witness(&[
                    ("k", k.to_string()),
                    ("n", n.to_string()),
                    ("estimate", estimate.mean.clone()),
                    ("standard_error", estimate.standard_error.clone()),
                    ("exact", exact.to_string()),
                ]);
            }
        }
    }

    let fraction = rat(within as i64, total.max(1) as i64);
    let margin = &fraction - &threshold;
    rb.constant("within_cells", format!("{within}/{total}"));
    let verdict = if margin.is_negative() {
        CheckVerdict::Fail
    } else {
        CheckVerdict::Pass
    };
    Ok(rb.finish(verdict, Margin::exact(&margin)))
}

#[cfg(test)]
mod tests {
    use super::super::{run_check, CheckVerdict, Margin, Params};
    use super::*;

    fn p(entries: &[(&str, &str)]) -> Params {
        entries.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn absolute_monotonicity_passes() {
        let report =
            run_check("absolute_monotonicity", &p(&[("k_max", "4"), ("reach", "10")])).unwrap();
        assert_eq!(report.verdict, CheckVerdict::Pass, "{report:?}");
        assert_eq!(report.margin, Margin::zero());
    }

    #[test]
    fn three_circles_certifies_small_grid() {
        let report = run_check(
            "three_circles",
            &p(&[("k_max", "4"), ("n_max", "8"), ("precision", "128")]),
        )
        .unwrap();
        assert_eq!(report.verdict, CheckVerdict::Pass, "{report:?}");
        match &report.margin {
            Margin::Interval { lo, .. } => {
                assert!(!lo.starts_with('-'), "worst slack should be positive: {lo}")
            }
            other => panic!("expected interval margin, got {other:?}"),
        }
    }

    #[test]
    fn three_circles_is_monotone_in_precision() {
        for precision in ["64", "128", "256"] {
            let report = run_check(
                "three_circles",
                &p(&[("k_max", "3"), ("n_max", "6"), ("precision", precision)]),
            )
            .unwrap();
            assert_eq!(report.verdict, CheckVerdict::Pass, "at {precision} bits");
        }
    }

    #[test]
    fn leading_coefficient_rows_are_flat() {
        let report =
            run_check("leading_coefficient", &p(&[("j_max", "3"), ("span", "6")])).unwrap();
        assert_eq!(report.verdict, CheckVerdict::Pass, "{report:?}");
        assert_eq!(report.margin, Margin::zero());
    }

    #[test]
    fn leading_coefficient_needs_room_for_both_rows() {
        assert!(run_check("leading_coefficient", &p(&[("j_max", "4"), ("span", "4")])).is_err());
    }

    #[test]
    fn coefficient_global_bound_passes_with_pinned_constants() {
        let report = run_check("coefficient_global_bound", &p(&[("k_max", "8")])).unwrap();
        assert_eq!(report.verdict, CheckVerdict::Pass, "{report:?}");
        assert_eq!(report.constants_used.get("A1").unwrap(), "148");
        assert_eq!(report.constants_used.get("B1").unwrap(), "9");
    }

    #[test]
    fn coefficient_global_bound_fails_with_bad_constant() {
        // B1 = 1/100 cannot hold: already a_{0,0} = 1 > 1/100.
        let report = run_check(
            "coefficient_global_bound",
            &p(&[("k_max", "12"), ("B1", "1/100")]),
        )
        .unwrap();
        assert_eq!(report.verdict, CheckVerdict::Fail);
        assert!(!report.witnesses.is_empty());
        let first = &report.witnesses[0];
        assert_eq!(first.get("k").unwrap(), "0");
        assert_eq!(first.get("j").unwrap(), "0");
        match &report.margin {
            Margin::Exact { num, .. } => assert!(num.starts_with('-'), "{num}"),
            other => panic!("expected exact margin, got {other:?}"),
        }
    }

    #[test]
    fn truncation_bracket_passes() {
        let report = run_check("truncation_bracket", &p(&[("k_max", "5")])).unwrap();
        assert_eq!(report.verdict, CheckVerdict::Pass, "{report:?}");
        assert_eq!(report.constants_used.get("A").unwrap(), "2414");
        assert_eq!(report.constants_used.get("B").unwrap(), "11/2");
    }

    #[test]
    fn comparison_ratio_for_k1_spans_quarter_to_one() {
        // Q_1(n) = n against C(n + 1/4, 1) = n + 1/4: r(n) = n/(n+1/4).
        let report = check_comparison(1, &[1, 2, 3, 10]).unwrap();
        assert_eq!(report.verdict, CheckVerdict::Pass);
        let min_ratio = report
            .witnesses
            .iter()
            .find(|w| w.get("kind").map(String::as_str) == Some("min_ratio"))
            .unwrap();
        assert_eq!(min_ratio.get("ratio").unwrap(), "4/5");
        let max_ratio = report
            .witnesses
            .iter()
            .find(|w| w.get("kind").map(String::as_str) == Some("max_ratio"))
            .unwrap();
        assert_eq!(max_ratio.get("ratio").unwrap(), "40/41");
    }

    #[test]
    fn comparison_is_trivial_at_k0() {
        let report = check_comparison(0, &[1, 5, 9]).unwrap();
        assert_eq!(report.verdict, CheckVerdict::Pass);
        for kind in ["min_ratio", "max_ratio"] {
            let w = report
                .witnesses
                .iter()
                .find(|w| w.get("kind").map(String::as_str) == Some(kind))
                .unwrap();
            assert_eq!(w.get("ratio").unwrap(), "1");
        }
    }

    #[test]
    fn comparison_auto_grid_passes_for_k8() {
        let report = run_check("comparison", &p(&[("k", "8")])).unwrap();
        assert_eq!(report.verdict, CheckVerdict::Pass, "{report:?}");
    }

    #[test]
    fn monte_carlo_small_grid_is_consistent() {
        let report = run_check(
            "monte_carlo",
            &p(&[
                ("k_max", "2"),
                ("n_max", "6"),
                ("samples", "500"),
                ("seed", "20260814"),
            ]),
        )
        .unwrap();
        assert_eq!(report.verdict, CheckVerdict::Pass, "{report:?}");
    }
}
