//! The model family `f_{k,alpha}(n) = C(n + alpha k, k)`, Vandermonde
//! head/tail estimates, and certified evaluation of three-circles error
//! ratios.
//!
//! Two ratios of a positive function g drive everything downstream:
//!
//! * `logconv = g(2n)^2 / (g(n) g(4n))` — log-convexity defect; `<= 1` means
//!   no error term is needed at this scale, `> 1` measures the error;
//! * `decay  = g(2n) / g(4n)` — scale of g itself across the outer doubling.
//!
//! For small k both are exact rationals. For k in the tens of thousands the
//! binomials are needlessly enormous, but both ratios telescope into products
//! of k small rational factors, which we enclose factor-by-factor in dyadic
//! intervals with outward rounding.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{binom_general, e_lower, e_upper, rint, DyadicInterval, Rational};

/// Parameters of `f_{k,alpha}`: degree `k >= 1` and offset weight
/// `alpha` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelParams {
    k: usize,
    alpha: Rational,
}

impl ModelParams {
    pub fn new(k: usize, alpha: Rational) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParam {
                name: "k".into(),
                reason: "model degree must be positive".into(),
            });
        }
        if alpha.is_negative() || alpha > rint(1) {
            return Err(Error::AlphaRange(alpha.to_string()));
        }
        Ok(ModelParams { k, alpha })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }
}

/// The two ratios at one scale `n`, in whichever arithmetic the caller chose
/// (exact `Rational` or certified `DyadicInterval`).
#[derive(Clone, Debug, PartialEq)]
pub struct RatioPair<T> {
    pub logconv: T,
    pub decay: T,
}

/// `f_{k,alpha}(n) = C(n + alpha k, k)`, exact for any rational `n`.
pub fn f_model(p: &ModelParams, n: &Rational) -> Rational {
    let r = n + &p.alpha * rint(p.k as i64);
    binom_general(&r, p.k)
}

/// Exact ratio pair from three positive values `g(n), g(2n), g(4n)`.
pub fn ratios(g_n: &Rational, g_2n: &Rational, g_4n: &Rational) -> Result<RatioPair<Rational>> {
    for (name, v) in [("g(n)", g_n), ("g(2n)", g_2n), ("g(4n)", g_4n)] {
        if !v.is_positive() {
            return Err(Error::NonPositive(format!("{name} = {v}")));
        }
    }
    Ok(RatioPair {
        logconv: g_2n * g_2n / (g_n * g_4n),
        decay: g_2n / g_4n,
    })
}

/// Certified enclosures of the model ratios at scale `n`, via the telescoped
/// products
///
/// `logconv = prod_j (2n+ak-j)^2 / ((n+ak-j)(4n+ak-j))`,
/// `decay   = prod_j (2n+ak-j) / (4n+ak-j)`, `j = 0..k`,
///
/// never materializing a full binomial. Panics if any factor fails to be
/// positive (all are once `n > k`).
pub fn model_ratios_interval(
    p: &ModelParams,
    n: u64,
    precision: u32,
) -> RatioPair<DyadicInterval> {
    let ak = &p.alpha * rint(p.k as i64);
    let n = rint(n as i64);
    let mut logconv = DyadicInterval::from_integer(1, precision);
    let mut decay = logconv.clone();
    for j in 0..p.k as i64 {
        let f1 = &n + &ak - rint(j);
        let f2 = rint(2) * &n + &ak - rint(j);
        let f4 = rint(4) * &n + &ak - rint(j);
        assert!(
            f1.is_positive() && f2.is_positive() && f4.is_positive(),
            "nonpositive product factor at j={j}; the ratios need n > k"
        );
        let lc = &f2 * &f2 / (&f1 * &f4);
        let dc = f2 / f4;
        logconv = logconv.mul(&DyadicInterval::from_rational(&lc, precision));
        decay = decay.mul(&DyadicInterval::from_rational(&dc, precision));
    }
    RatioPair { logconv, decay }
}

/// `C(a+b, k) = sum_j C(a, k-j) C(b, j)`, evaluated as the right-hand sum.
pub fn vandermonde_sum(a: &Rational, b: &Rational, k: usize) -> Rational {
    let mut acc = Rational::zero();
    for j in 0..=k {
        acc += binom_general(a, k - j) * binom_general(b, j);
    }
    acc
}

/// Partial Vandermonde sum over `j <= jmax` (clamped to `k`).
pub fn head_sum(a: &Rational, b: &Rational, k: usize, jmax: usize) -> Rational {
    let mut acc = Rational::zero();
    for j in 0..=jmax.min(k) {
        acc += binom_general(a, k - j) * binom_general(b, j);
    }
    acc
}

/// Partial Vandermonde sum over `j >= jmin`; empty range gives 0.
pub fn tail_sum(a: &Rational, b: &Rational, k: usize, jmin: usize) -> Rational {
    let mut acc = Rational::zero();
    for j in jmin..=k {
        acc += binom_general(a, k - j) * binom_general(b, j);
    }
    acc
}

/// Largest integer at or below the tail threshold `6 e k b / a`, certified by
/// evaluating the floor with both rational brackets of `e`. `None` when the
/// brackets disagree — the caller must report an inconclusive verdict rather
/// than guess.
pub fn tail_threshold_floor(k: usize, a: &Rational, b: &Rational) -> Option<BigInt> {
    let base = rint(6) * rint(k as i64) * b / a;
    let with_lo = (&base * e_lower()).floor().to_integer();
    let with_hi = (base * e_upper()).floor().to_integer();
    (with_lo == with_hi).then_some(with_lo)
}

/// `F(x) = 1 + n x / ((n - x)(4n - x))`: the per-pair factor in the pairing
/// argument showing log-convexity of `Q_1` sums. Requires `|x| < n` (the
/// first pole).
pub fn pair_factor(n: u64, x: &Rational) -> Result<Rational> {
    let nr = rint(n as i64);
    if x.abs() >= nr {
        return Err(Error::PairFactorPole { n, x: x.to_string() });
    }
    Ok(rint(1) + &nr * x / ((&nr - x) * (rint(4) * &nr - x)))
}
