//! Named verification checks, each running a parameterized grid and returning
//! a structured [`CheckReport`].
//!
//! Verdicts are three-valued.  Exact comparisons (both sides rational) decide
//! PASS/FAIL outright and report an exact rational margin; interval
//! comparisons report an enclosure of the margin and may come back
//! INCONCLUSIVE, in which case the checks escalate precision up to
//! [`ESCALATION_CAP`] rather than guess.  A PASS margin is the worst-case
//! slack over the grid: `rhs - lhs` for a `lhs <= rhs` claim, so it is
//! nonnegative exactly when every tested instance holds.

mod bounds;
mod growth_checks;
mod identities;
mod sharpness;

pub use growth_checks::check_comparison;
pub use identities::check_recursion_consistency;
pub use sharpness::{
    check_binomial_family, sharpness_search, SearchBest, SearchReport, SearchWitness,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    certified_compare, decimal_to_rational, parse_rational, DyadicInterval, Rational, Verdict,
};

/// Parameters and report payloads travel as sorted string maps so that
/// serialized output is byte-stable.
pub type Params = BTreeMap<String, String>;

/// Outcome of one check over its whole grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckVerdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl fmt::Display for CheckVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckVerdict::Pass => write!(f, "PASS"),
            CheckVerdict::Fail => write!(f, "FAIL"),
            CheckVerdict::Inconclusive => write!(f, "INCONCLUSIVE"),
        }
    }
}

/// Worst-case slack over the grid.
///
/// For equalities the slack is minus the largest residual magnitude, so PASS
/// margins are exactly zero.  Interval margins carry outward-rounded endpoints
/// (48 displayed bits) and the working precision that produced them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Margin {
    Exact { num: String, den: String },
    Interval { lo: String, hi: String, precision: u32 },
}

impl Margin {
    pub fn exact(q: &Rational) -> Self {
        Margin::Exact {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
        }
    }

    pub fn zero() -> Self {
        Margin::exact(&Rational::from_integer(0.into()))
    }

    pub fn interval(iv: &DyadicInterval) -> Self {
        let (lo, hi) = iv.display_rounded(48);
        Margin::Interval {
            lo: lo.to_string(),
            hi: hi.to_string(),
            precision: iv.precision(),
        }
    }
}

/// One check's result.  Field names are the stable serialization contract.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    /// Effective parameters after defaulting, echoed back for auditability.
    pub params: Params,
    pub verdict: CheckVerdict,
    pub margin: Margin,
    /// Worst or violating instances; FAIL always carries at least one.
    pub witnesses: Vec<Params>,
    /// Rational stand-ins used for irrational constants, and other pinned
    /// values the verdict depends on.
    pub constants_used: Params,
    pub elapsed_ms: u128,
}

/// Preconfigured grid sizes for [`run_all`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(Error::InvalidParam {
                name: "level".into(),
                reason: format!("expected quick or full, got {other}"),
            }),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Quick => write!(f, "quick"),
            Level::Full => write!(f, "full"),
        }
    }
}

/// Every registered check id, in `run_all` execution order.
pub const CHECK_IDS: &[&str] = &[
    "harmonicity",
    "shift_identity",
    "laplace_power_identity",
    "derivative_laplacian",
    "absolute_monotonicity",
    "three_circles",
    "leading_coefficient",
    "coefficient_global_bound",
    "truncation_bracket",
    "fk_bound",
    "zk_bound",
    "moment_bound",
    "q_rough_bound",
    "vandermonde",
    "tail_estimate",
    "head_estimate",
    "model_abs_monotone",
    "pair_product",
    "recursion",
    "comparison",
    "binomial_family",
    "monte_carlo",
];

/// Dispatches a check by id.  Unknown ids and unknown or malformed parameters
/// are errors, not FAIL verdicts.
pub fn run_check(check_id: &str, params: &Params) -> Result<CheckReport> {
    match check_id {
        "harmonicity" => identities::harmonicity(params),
        "shift_identity" => identities::shift_identity(params),
        "laplace_power_identity" => identities::laplace_power_identity(params),
        "derivative_laplacian" => identities::derivative_laplacian(params),
        "absolute_monotonicity" => growth_checks::absolute_monotonicity(params),
        "three_circles" => growth_checks::three_circles(params),
        "leading_coefficient" => growth_checks::leading_coefficient(params),
        "coefficient_global_bound" => growth_checks::coefficient_global_bound(params),
        "truncation_bracket" => growth_checks::truncation_bracket(params),
        "fk_bound" => bounds::fk_bound(params),
        "zk_bound" => bounds::zk_bound(params),
        "moment_bound" => bounds::moment_bound(params),
        "q_rough_bound" => bounds::q_rough_bound(params),
        "vandermonde" => identities::vandermonde(params),
        "tail_estimate" => bounds::tail_estimate(params),
        "head_estimate" => bounds::head_estimate(params),
        "model_abs_monotone" => bounds::model_abs_monotone(params),
        "pair_product" => bounds::pair_product(params),
        "recursion" => identities::recursion(params),
        "comparison" => growth_checks::comparison(params),
        "binomial_family" => sharpness::binomial_family(params),
        "monte_carlo" => growth_checks::monte_carlo(params),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

/// The grid each check runs at a given level.  Grids are configuration data:
/// tweaking scale means editing this table, not check logic.
pub fn default_params(check_id: &str, level: Level) -> Params {
    let quick = level == Level::Quick;
    let entries: &[(&str, &str)] = match check_id {
        "harmonicity" => {
            if quick {
                &[("k_max", "6"), ("radius", "6")]
            } else {
                &[("k_max", "8"), ("radius", "8")]
            }
        }
        "shift_identity" => {
            if quick {
                &[("k_max", "6"), ("radius", "6")]
            } else {
                &[("k_max", "8"), ("radius", "8")]
            }
        }
        "laplace_power_identity" => {
            if quick {
                &[("k_max", "4"), ("l_max", "3")]
            } else {
                &[("k_max", "6"), ("l_max", "4")]
            }
        }
        "derivative_laplacian" => {
            if quick {
                &[("k_max", "4"), ("m_max", "3"), ("n_max", "5")]
            } else {
                &[("k_max", "6"), ("m_max", "4"), ("n_max", "8")]
            }
        }
        "absolute_monotonicity" => {
            if quick {
                &[("k_max", "6"), ("reach", "12")]
            } else {
                &[("k_max", "8"), ("reach", "16")]
            }
        }
        "three_circles" => {
            if quick {
                &[("k_max", "6"), ("n_max", "12"), ("precision", "128")]
            } else {
                &[("k_max", "8"), ("n_max", "16"), ("precision", "128")]
            }
        }
        "leading_coefficient" => {
            if quick {
                &[("j_max", "3"), ("span", "8")]
            } else {
                &[("j_max", "4"), ("span", "8")]
            }
        }
        "coefficient_global_bound" => {
            if quick {
                &[("k_max", "8")]
            } else {
                &[("k_max", "12")]
            }
        }
        "truncation_bracket" => {
            if quick {
                &[("k_max", "6")]
            } else {
                &[("k_max", "10")]
            }
        }
        "fk_bound" => {
            if quick {
                &[("j_max", "8"), ("radius", "16")]
            } else {
                &[("j_max", "12"), ("radius", "24")]
            }
        }
        "zk_bound" => {
            if quick {
                &[("k_max", "6"), ("radius", "8")]
            } else {
                &[("k_max", "10"), ("radius", "12")]
            }
        }
        "moment_bound" => {
            if quick {
                &[("k_max", "4"), ("n_max", "20")]
            } else {
                &[("k_max", "5"), ("n_max", "40")]
            }
        }
        "q_rough_bound" => {
            if quick {
                &[("k_max", "6"), ("n_max", "16")]
            } else {
                &[("k_max", "8"), ("n_max", "32")]
            }
        }
        "vandermonde" => {
            if quick {
                &[("samples", "100"), ("k_max", "8"), ("seed", "1")]
            } else {
                &[("samples", "500"), ("k_max", "12"), ("seed", "1")]
            }
        }
        "tail_estimate" | "head_estimate" => {
            if quick {
                &[("k_max", "5"), ("a_max", "100"), ("b_steps", "3")]
            } else {
                &[("k_max", "8"), ("a_max", "200"), ("b_steps", "4")]
            }
        }
        "model_abs_monotone" => {
            if quick {
                &[("k_max", "6")]
            } else {
                &[("k_max", "10")]
            }
        }
        "pair_product" => {
            if quick {
                &[("samples", "300"), ("n_max", "20"), ("seed", "1")]
            } else {
                &[("samples", "1000"), ("n_max", "50"), ("seed", "1")]
            }
        }
        "recursion" => {
            if quick {
                &[("k_max", "8")]
            } else {
                &[("k_max", "12")]
            }
        }
        "comparison" => {
            if quick {
                &[("k_list", "1,4,8")]
            } else {
                &[("k_list", "1,4,8,12,16")]
            }
        }
        "binomial_family" => {
            if quick {
                &[
                    ("alpha", "1/4"),
                    ("eps", "1/2"),
                    ("c", "1"),
                    ("k", "100"),
                    ("n", "1000"),
                    ("precision", "128"),
                ]
            } else {
                &[
                    ("alpha", "1/4"),
                    ("eps", "1/2"),
                    ("c", "3"),
                    ("k", "10000"),
                    ("n", "1000000"),
                    ("precision", "512"),
                ]
            }
        }
        "monte_carlo" => {
            if quick {
                &[
                    ("k_max", "4"),
                    ("n_max", "20"),
                    ("samples", "2000"),
                    ("seed", "20260814"),
                ]
            } else {
                &[
                    ("k_max", "4"),
                    ("n_max", "20"),
                    ("samples", "100000"),
                    ("seed", "20260814"),
                ]
            }
        }
        _ => &[],
    };
    entries
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Runs every registered check at its preconfigured grid, in registry order.
pub fn run_all(level: Level) -> Result<Vec<CheckReport>> {
    CHECK_IDS
        .iter()
        .map(|id| run_check(id, &default_params(id, level)))
        .collect()
}

/// FAIL dominates, then INCONCLUSIVE; PASS only when everything passed.
pub fn aggregate_verdict(reports: &[CheckReport]) -> CheckVerdict {
    let mut verdict = CheckVerdict::Pass;
    for r in reports {
        match r.verdict {
            CheckVerdict::Fail => return CheckVerdict::Fail,
            CheckVerdict::Inconclusive => verdict = CheckVerdict::Inconclusive,
            CheckVerdict::Pass => {}
        }
    }
    verdict
}

/// Precision ceiling for INCONCLUSIVE escalation.
pub const ESCALATION_CAP: u32 = 4096;

/// Reruns `eval` at doubling precision while it stays INCONCLUSIVE.
/// Returns the last attempt's outcome together with the precision that
/// produced it.
pub(crate) fn escalate<T>(
    start: u32,
    cap: u32,
    mut eval: impl FnMut(u32) -> Result<(CheckVerdict, T)>,
) -> Result<(CheckVerdict, T, u32)> {
    let mut precision = start.max(8);
    loop {
        let (verdict, payload) = eval(precision)?;
        if verdict != CheckVerdict::Inconclusive || precision >= cap {
            return Ok((verdict, payload, precision));
        }
        precision = precision.saturating_mul(2).min(cap);
    }
}

/// Maps a certified comparison to the verdict of the claim `lhs <= rhs`.
pub(crate) fn claim_le(lhs: &DyadicInterval, rhs: &DyadicInterval) -> CheckVerdict {
    match certified_compare(rhs, lhs) {
        Verdict::NotLess => CheckVerdict::Pass,
        Verdict::Less => CheckVerdict::Fail,
        Verdict::Inconclusive => CheckVerdict::Inconclusive,
    }
}

/// Maps a certified comparison to the verdict of the claim `lhs > rhs`.
pub(crate) fn claim_strict_gt(lhs: &DyadicInterval, rhs: &DyadicInterval) -> CheckVerdict {
    match certified_compare(rhs, lhs) {
        Verdict::Less => CheckVerdict::Pass,
        Verdict::NotLess => CheckVerdict::Fail,
        Verdict::Inconclusive => CheckVerdict::Inconclusive,
    }
}

/// Strict, typed access to a check's parameter map.  Construction fails on
/// keys the check does not know, so typos surface as errors instead of
/// silently running the default grid.
pub(crate) struct ParamReader<'a> {
    check: &'static str,
    params: &'a Params,
}

impl<'a> ParamReader<'a> {
    pub(crate) fn new(
        check: &'static str,
        params: &'a Params,
        known: &[&str],
    ) -> Result<Self> {
        for key in params.keys() {
            if !known.contains(&key.as_str()) {
                return Err(Error::InvalidParam {
                    name: format!("{check}.{key}"),
                    reason: "unknown parameter".into(),
                });
            }
        }
        Ok(Self { check, params })
    }

    fn bad(&self, key: &str, reason: &str) -> Error {
        Error::InvalidParam {
            name: format!("{}.{}", self.check, key),
            reason: reason.into(),
        }
    }

    pub(crate) fn usize(&self, key: &str, default: usize) -> Result<usize> {
        self.opt_usize(key).map(|v| v.unwrap_or(default))
    }

    pub(crate) fn opt_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(s) => s
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| self.bad(key, "expected a nonnegative integer")),
        }
    }

    pub(crate) fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| self.bad(key, "expected a nonnegative integer")),
        }
    }

    pub(crate) fn u32(&self, key: &str, default: u32) -> Result<u32> {
        match self.params.get(key) {
            None => Ok(default),
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| self.bad(key, "expected a nonnegative integer")),
        }
    }

    pub(crate) fn rational(&self, key: &str, default: Rational) -> Result<Rational> {
        self.opt_rational(key).map(|v| v.unwrap_or(default))
    }

    pub(crate) fn opt_rational(&self, key: &str) -> Result<Option<Rational>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(s) => {
                let s = s.trim();
                parse_rational(s)
                    .or_else(|_| decimal_to_rational(s))
                    .map(Some)
                    .map_err(|_| self.bad(key, "expected p/q, an integer, or a decimal"))
            }
        }
    }

    /// Comma-separated list of nonnegative integers.
    pub(crate) fn opt_usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(s) => s
                .split(',')
                .map(|part| part.trim().parse())
                .collect::<std::result::Result<Vec<usize>, _>>()
                .map(Some)
                .map_err(|_| self.bad(key, "expected a comma-separated list of integers")),
        }
    }

    pub(crate) fn str(&self, key: &str, default: &str) -> String {
        self.params
            .get(key)
            .map(|s| s.trim().to_string())
            .unwrap_or_else(|| default.to_string())
    }
}

/// Accumulates one report: effective params, witnesses, constants, timing.
pub(crate) struct ReportBuilder {
    check_id: &'static str,
    started: Instant,
    params: Params,
    witnesses: Vec<Params>,
    constants: Params,
}

impl ReportBuilder {
    pub(crate) fn new(check_id: &'static str) -> Self {
        Self {
            check_id,
            started: Instant::now(),
            params: Params::new(),
            witnesses: Vec::new(),
            constants: Params::new(),
        }
    }

    pub(crate) fn param(&mut self, key: &str, value: impl fmt::Display) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub(crate) fn constant(&mut self, key: &str, value: impl fmt::Display) {
        self.constants.insert(key.to_string(), value.to_string());
    }

    pub(crate) fn witness(&mut self, entries: &[(&str, String)]) {
        self.witnesses.push(
            entries
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
        );
    }

    pub(crate) fn finish(self, verdict: CheckVerdict, margin: Margin) -> CheckReport {
        CheckReport {
            check_id: self.check_id.to_string(),
            params: self.params,
            verdict,
            margin,
            witnesses: self.witnesses,
            constants_used: self.constants,
            elapsed_ms: self.started.elapsed().as_millis(),
        }
    }
}

/// Keeps the smallest slack seen so far; returns true when `candidate` is the
/// new worst case (so the caller can record its witness).
pub(crate) fn tighten(current: &mut Option<Rational>, candidate: &Rational) -> bool {
    match current {
        Some(worst) if *worst <= *candidate => false,
        _ => {
            *current = Some(candidate.clone());
            true
        }
    }
}

/// Uniform integer in `[lo, hi]` from the raw generator; modulo bias is
/// irrelevant at test scale.
pub(crate) fn rng_range(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    debug_assert!(lo <= hi);
    let span = (hi - lo + 1) as u64;
    lo + (rng.next_u64() % span) as i64
}
