//! Saturation of the three circles error term.
//!
//! `binomial_family` certifies that the model `f_{k,alpha}` beats the
//! log-convexity bound with the *smaller* error term `2^{-n^{1/2+eps}}`;
//! `sharpness_search` hunts for concrete `(k, n)` where `Q_k` itself does.

use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    claim_strict_gt, escalate, CheckReport, CheckVerdict, Margin, ParamReader, Params,
    ReportBuilder, ESCALATION_CAP,
};
use crate::error::{Error, Result};
use crate::exact::{
    pow2_neg_bounds, rat, real_power_bounds, rint, sqrt_bounds, DyadicInterval, Rational,
};
use crate::growth::{coeffs_by_recursion, q_newton, CoeffCache, NewtonSeries};
use crate::model::{f_model, model_ratios_interval, ModelParams};

/// Binomials are formed exactly up to this `k`; beyond it the check works
/// with the proof's own ratio products and never materializes a binomial.
const EXACT_ROUTE_MAX_K: usize = 500;

/// Certifies `f(2n) > C sqrt(f(n) f(4n)) + 2^{-n^{1/2+eps}} f(4n)` for
/// `f = f_{k,alpha}`.
///
/// Small `k` compares absolute values built from exact binomials.  Large `k`
/// divides through by `f(4n)` and certifies
/// `f(2n)/f(4n) > C sqrt(f(n)/f(4n)) + 2^{-n^{1/2+eps}}`
/// via interval ratio products, so the reported margin is in units of
/// `f(4n)`.  INCONCLUSIVE escalates precision up to the ceiling.
pub(super) fn binomial_family(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new(
        "binomial_family",
        params,
        &["alpha", "eps", "c", "k", "n", "precision", "route"],
    )?;
    let alpha = reader.rational("alpha", rat(1, 4))?;
    let eps = reader.rational("eps", rat(1, 2))?;
    let c = reader.rational("c", rint(1))?;
    let k = reader.usize("k", 100)?;
    let n = reader.u64("n", 1000)?;
    let base_precision = reader.u32("precision", 128)?;
    let route = reader.str("route", "auto");

    if n == 0 {
        return Err(Error::InvalidParam {
            name: "binomial_family.n".into(),
            reason: "n must be >= 1".into(),
        });
    }
    let model = ModelParams::new(k, alpha.clone())?;
    let exact_route = match route.as_str() {
        "auto" => k <= EXACT_ROUTE_MAX_K,
        "exact" => true,
        "product" => false,
        other => {
            return Err(Error::InvalidParam {
                name: "binomial_family.route".into(),
                reason: format!("expected auto, exact or product, got {other}"),
            })
        }
    };
    if !exact_route && n <= k as u64 {
        return Err(Error::InvalidParam {
            name: "binomial_family.n".into(),
            reason: "the ratio-product route needs n > k".into(),
        });
    }

    let mut rb = ReportBuilder::new("binomial_family");
    rb.param("alpha", &alpha);
    rb.param("eps", &eps);
    rb.param("c", &c);
    rb.param("k", k);
    rb.param("n", n);
    rb.param("precision", base_precision);
    rb.constant("route", if exact_route { "exact-binomial" } else { "interval-product" });

    let exponent = rat(1, 2) + &eps;
    let (verdict, slack, precision_used) = if exact_route {
        let at = |m: u64| f_model(&model, &rint(m as i64));
        let (f_n, f_2n, f_4n) = (at(n), at(2 * n), at(4 * n));
        for (label, value) in [("n", &f_n), ("2n", &f_2n), ("4n", &f_4n)] {
            if !value.is_positive() {
                return Err(Error::InvalidParam {
                    name: "binomial_family.n".into(),
                    reason: format!("f vanishes at {label} for these (k, alpha)"),
                });
            }
        }
        let product = &f_n * &f_4n;
        escalate(base_precision, ESCALATION_CAP, |p| {
            let sqrt = sqrt_bounds(&product, p)?;
            let tail = pow2_neg_bounds(&real_power_bounds(n, &exponent, p)?, p)?;
            let rhs = sqrt.scale(&c).add(&tail.scale(&f_4n));
            let lhs = DyadicInterval::from_rational(&f_2n, p);
            Ok((claim_strict_gt(&lhs, &rhs), lhs.sub(&rhs)))
        })?
    } else {
        rb.constant("margin_scale", "1/f(4n)");
        escalate(base_precision, ESCALATION_CAP, |p| {
            let ratios = model_ratios_interval(&model, n, p);
            // f(n)/f(4n) = decay^2 / logconv.
            let n_over_4n = ratios.decay.mul(&ratios.decay).div(&ratios.logconv)?;
            let sqrt = n_over_4n.sqrt()?;
            let tail = pow2_neg_bounds(&real_power_bounds(n, &exponent, p)?, p)?;
            let rhs = sqrt.scale(&c).add(&tail);
            Ok((claim_strict_gt(&ratios.decay, &rhs), ratios.decay.sub(&rhs)))
        })?
    };

    rb.constant("precision_used", precision_used);
    if verdict != CheckVerdict::Pass {
        rb.witness(&[
            ("k", k.to_string()),
            ("n", n.to_string()),
            (
                "issue",
                match verdict {
                    CheckVerdict::Fail => "inequality certified false".into(),
                    _ => "undecided at the precision ceiling".into(),
                },
            ),
        ]);
    }
    Ok(rb.finish(verdict, Margin::interval(&slack)))
}

/// Library-level operation: one certified instance of the model inequality.
pub fn check_binomial_family(
    alpha: &Rational,
    eps: &Rational,
    c: &Rational,
    k: usize,
    n: u64,
    precision: u32,
) -> Result<CheckReport> {
    let mut params = Params::new();
    params.insert("alpha".into(), alpha.to_string());
    params.insert("eps".into(), eps.to_string());
    params.insert("c".into(), c.to_string());
    params.insert("k".into(), k.to_string());
    params.insert("n".into(), n.to_string());
    params.insert("precision".into(), precision.to_string());
    binomial_family(&params)
}

/// A grid cell where the strict inequality was certified, with the certified
/// slack `Q_k(2n) - A sqrt(Q_k(n) Q_k(4n)) - 2^{-n^{1/2+eps}} Q_k(4n) > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchWitness {
    pub k: usize,
    pub n: usize,
    pub margin: Margin,
}

/// The grid cell maximizing the certified ratio
/// `(Q_k(2n) - 2^{-n^{1/2+eps}} Q_k(4n)) / sqrt(Q_k(n) Q_k(4n))`: every
/// `A < lo` is certified to admit a witness at `(k, n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBest {
    pub k: usize,
    pub n: usize,
    pub lo: String,
    pub hi: String,
    pub precision: u32,
}

/// Outcome of a sharpness grid search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub a: String,
    pub eps: String,
    pub k_min: usize,
    pub k_max: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub precision: u32,
    pub cells: usize,
    pub witnesses: Vec<SearchWitness>,
    pub best_a: Option<SearchBest>,
    pub elapsed_ms: u128,
}

struct CellOutcome {
    k: usize,
    n: usize,
    verdict: CheckVerdict,
    slack: DyadicInterval,
    ratio: Option<DyadicInterval>,
}

/// Searches the Cartesian grid `[k_min, k_max] x [n_min, n_max]` for points
/// where `Q_k(2n) > A sqrt(Q_k(n) Q_k(4n)) + 2^{-n^{1/2+eps}} Q_k(4n)` is
/// certified.  Cells evaluate concurrently; the report is reduced in sorted
/// `(k, n)` order, so output is deterministic regardless of thread count.
pub fn sharpness_search(
    a: &Rational,
    eps: &Rational,
    k_min: usize,
    k_max: usize,
    n_min: usize,
    n_max: usize,
    precision: u32,
) -> Result<SearchReport> {
    let started = std::time::Instant::now();
    let mut report = SearchReport {
        a: a.to_string(),
        eps: eps.to_string(),
        k_min,
        k_max,
        n_min,
        n_max,
        precision,
        cells: 0,
        witnesses: Vec::new(),
        best_a: None,
        elapsed_ms: 0,
    };
    if k_min > k_max || n_min > n_max || n_min == 0 {
        if n_min == 0 && n_min <= n_max {
            return Err(Error::InvalidParam {
                name: "sharpness_search.n_min".into(),
                reason: "n must be >= 1".into(),
            });
        }
        report.elapsed_ms = started.elapsed().as_millis();
        return Ok(report);
    }

    let mut cache = CoeffCache::in_memory();
    let series: Vec<(usize, NewtonSeries)> = (k_min..=k_max)
        .map(|k| (k, coeffs_by_recursion(k, &mut cache)))
        .collect();
    let exponent = rat(1, 2) + eps;

    let cells: Vec<(usize, &NewtonSeries, usize)> = series
        .iter()
        .flat_map(|(k, s)| (n_min..=n_max).map(move |n| (*k, s, n)))
        .collect();
    report.cells = cells.len();

    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|&(k, s, n)| -> Result<CellOutcome> {
            let q_n = q_newton(s, n);
            let q_2n = q_newton(s, 2 * n);
            let q_4n = q_newton(s, 4 * n);
            let product = &q_n * &q_4n;
            let (verdict, (slack, ratio), _) = escalate(precision, ESCALATION_CAP, |p| {
                let sqrt = sqrt_bounds(&product, p)?;
                let tail = pow2_neg_bounds(&real_power_bounds(n as u64, &exponent, p)?, p)?
                    .scale(&q_4n);
                let lhs = DyadicInterval::from_rational(&q_2n, p);
                let rhs = sqrt.scale(a).add(&tail);
                let ratio = if sqrt.is_strictly_positive() {
                    Some(lhs.sub(&tail).div(&sqrt)?)
                } else {
                    None
                };
                Ok((claim_strict_gt(&lhs, &rhs), (lhs.sub(&rhs), ratio)))
            })?;
            Ok(CellOutcome { k, n, verdict, slack, ratio })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(Rational, &CellOutcome)> = None;
    for outcome in &outcomes {
        if outcome.verdict == CheckVerdict::Pass {
            report.witnesses.push(SearchWitness {
                k: outcome.k,
                n: outcome.n,
                margin: Margin::interval(&outcome.slack),
            });
        }
        if let Some(ratio) = &outcome.ratio {
            let lo = ratio.lo_rational();
            if best.as_ref().is_none_or(|(b, _)| lo > *b) {
                best = Some((lo, outcome));
            }
        }
    }
    report.best_a = best.map(|(_, outcome)| {
        let ratio = outcome.ratio.as_ref().expect("best cell has a ratio");
        let (lo, hi) = ratio.display_rounded(48);
        SearchBest {
            k: outcome.k,
            n: outcome.n,
            lo: lo.to_string(),
            hi: hi.to_string(),
            precision: ratio.precision(),
        }
    });
    report.elapsed_ms = started.elapsed().as_millis();
    Ok(report)
}
