use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::dyadic::{Dyadic, Rounding};
use super::Rational;
use crate::error::{Error, Result};

/// Outcome of a certified comparison of two interval enclosures.
///
/// `Less` is returned only when every point of the left interval is strictly
/// below every point of the right one; `NotLess` only when every point of the
/// left is `>=` every point of the right. Anything else is `Inconclusive` and
/// callers retry at higher precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "LESS")]
    Less,
    #[serde(rename = "NOT_LESS")]
    NotLess,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

/// Closed interval with exact dyadic endpoints. Every operation rounds
/// outward, so the true value of the modelled quantity is always contained.
/// `precision` records the requested precision; endpoints internally carry a
/// few guard bits beyond it, and raising the precision never widens a result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicInterval {
    lo: Dyadic,
    hi: Dyadic,
    precision: u32,
}

/// Guard bits used for intermediate computations.
const GUARD: u32 = 32;
/// Guard bits kept on final endpoints beyond the requested precision.
const FINAL_GUARD: u32 = 4;

impl DyadicInterval {
    pub fn point(d: Dyadic, precision: u32) -> Self {
        DyadicInterval { lo: d.clone(), hi: d, precision }
    }

    pub fn from_endpoints(lo: Dyadic, hi: Dyadic, precision: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        DyadicInterval { lo, hi, precision }
    }

    pub fn from_integer(n: i64, precision: u32) -> Self {
        Self::point(Dyadic::from_i64(n), precision)
    }

    /// Tightest enclosure of a rational at the working precision. Exact when
    /// the denominator is a power of two and the numerator fits.
    pub fn from_rational(q: &Rational, precision: u32) -> Self {
        let p = precision + FINAL_GUARD;
        DyadicInterval {
            lo: Dyadic::from_rational(q, p, Rounding::Down),
            hi: Dyadic::from_rational(q, p, Rounding::Up),
            precision,
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn lo_rational(&self) -> Rational {
        self.lo.to_rational()
    }

    pub fn hi_rational(&self) -> Rational {
        self.hi.to_rational()
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        &self.lo_rational() <= q && q <= &self.hi_rational()
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_strictly_positive(&self) -> bool {
        !self.lo.is_negative() && !self.lo.is_zero()
    }

    fn rounded(lo: Dyadic, hi: Dyadic, precision: u32) -> Self {
        let p = precision + FINAL_GUARD;
        DyadicInterval {
            lo: lo.round(p, Rounding::Down),
            hi: hi.round(p, Rounding::Up),
            precision,
        }
    }

    pub fn neg(&self) -> Self {
        DyadicInterval {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
            precision: self.precision,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::rounded(
            self.lo.add(&other.lo),
            self.hi.add(&other.hi),
            self.precision.min(other.precision),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let candidates = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = candidates.iter().min().unwrap().clone();
        let hi = candidates.iter().max().unwrap().clone();
        Self::rounded(lo, hi, self.precision.min(other.precision))
    }

    /// Division; the divisor interval must not contain zero.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let zero = Dyadic::zero();
        if other.lo <= zero && zero <= other.hi {
            return Err(Error::DivisionByZero(
                other.lo_rational().to_string(),
                other.hi_rational().to_string(),
            ));
        }
        let prec = self.precision.min(other.precision);
        let p = prec + FINAL_GUARD;
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for a in [&self.lo, &self.hi] {
            for b in [&other.lo, &other.hi] {
                let down = a.div(b, p, Rounding::Down);
                let up = a.div(b, p, Rounding::Up);
                lo = Some(match lo {
                    Some(c) => c.min(down),
                    None => down,
                });
                hi = Some(match hi {
                    Some(c) => c.max(up),
                    None => up,
                });
            }
        }
        Ok(DyadicInterval { lo: lo.unwrap(), hi: hi.unwrap(), precision: prec })
    }

    /// Multiplication by an exact rational scalar.
    pub fn scale(&self, q: &Rational) -> Self {
        let s = Self::from_rational(q, self.precision);
        self.mul(&s)
    }

    /// Square root; requires a nonnegative lower endpoint.
    pub fn sqrt(&self) -> Result<Self> {
        if self.lo.is_negative() {
            return Err(Error::NegativeSqrt(self.lo_rational().to_string()));
        }
        let p = self.precision + FINAL_GUARD;
        Ok(DyadicInterval {
            lo: self.lo.sqrt(p, Rounding::Down),
            hi: self.hi.sqrt(p, Rounding::Up),
            precision: self.precision,
        })
    }

    /// Largest absolute value over the interval, as an upper-rounded dyadic.
    fn abs_hi(&self) -> Dyadic {
        self.lo.abs().max(self.hi.abs())
    }

    /// Hull of two intervals.
    pub fn hull(&self, other: &Self) -> Self {
        DyadicInterval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            precision: self.precision.min(other.precision),
        }
    }

    /// Endpoints re-rounded outward to at most `bits` mantissa bits; used to
    /// keep serialized reports compact while staying a valid enclosure.
    pub fn display_rounded(&self, bits: u32) -> (Rational, Rational) {
        (
            self.lo.round(bits, Rounding::Down).to_rational(),
            self.hi.round(bits, Rounding::Up).to_rational(),
        )
    }
}

/// Compares two enclosures. See [`Verdict`].
pub fn certified_compare(a: &DyadicInterval, b: &DyadicInterval) -> Verdict {
    if a.hi < b.lo {
        Verdict::Less
    } else if a.lo >= b.hi {
        Verdict::NotLess
    } else {
        Verdict::Inconclusive
    }
}

/// Certified enclosure of `sqrt(q)` for rational `q >= 0`.
///
/// Post: `lo^2 <= q <= hi^2` and `hi - lo <= 2^-precision * max(1, hi)`.
/// Exact square roots (e.g. perfect squares with dyadic roots) collapse to a
/// point interval.
pub fn sqrt_bounds(q: &Rational, precision: u32) -> Result<DyadicInterval> {
    if q.is_negative() {
        return Err(Error::NegativeSqrt(q.to_string()));
    }
    let enclosure = DyadicInterval::from_rational(q, precision + GUARD);
    let root = enclosure.sqrt()?;
    Ok(DyadicInterval {
        lo: root.lo.round(precision + FINAL_GUARD, Rounding::Down),
        hi: root.hi.round(precision + FINAL_GUARD, Rounding::Up),
        precision,
    })
}

/// Enclosure of `ln 2` via `2*atanh(1/3)`.
pub fn ln2_interval(precision: u32) -> DyadicInterval {
    let wp = precision + GUARD;
    let third = {
        let one = Dyadic::one();
        let three = Dyadic::from_i64(3);
        DyadicInterval {
            lo: one.div(&three, wp, Rounding::Down),
            hi: one.div(&three, wp, Rounding::Up),
            precision: wp,
        }
    };
    let at = atanh_small(&third, wp);
    let two = DyadicInterval::from_integer(2, wp);
    let r = two.mul(&at);
    DyadicInterval::rounded(r.lo, r.hi, precision)
}

/// `atanh(u)` for an interval `0 <= u <= 1/2`, by the odd power series with a
/// certified tail bound.
fn atanh_small(u: &DyadicInterval, precision: u32) -> DyadicInterval {
    debug_assert!(!u.lo.is_negative());
    debug_assert!(u.hi.abs_le_pow2(-1));
    let wp = precision + GUARD;
    let usq = u.mul(u);
    let mut term = u.clone(); // u^(2j+1)
    let mut sum = DyadicInterval::point(Dyadic::zero(), wp);
    let mut j = 0u32;
    loop {
        let denom = DyadicInterval::from_integer((2 * j + 1) as i64, wp);
        let contrib = term.div(&denom).expect("odd integer is nonzero");
        sum = sum.add(&contrib);
        term = term.mul(&usq);
        // Tail after adding u^(2j+1)/(2j+1): bounded by
        // u^(2j+3)/((2j+3)(1 - u^2)) <= term_next * 4/3 for u <= 1/2.
        let bound = term.abs_hi();
        if bound.abs_le_pow2(-((precision + 8) as i64)) {
            let tail_hi = bound.mul(&Dyadic::from_i64(2)); // 4/3 < 2
            let tail = DyadicInterval {
                lo: Dyadic::zero(),
                hi: tail_hi,
                precision: wp,
            };
            return sum.add(&tail);
        }
        j += 1;
        assert!(j < 100_000, "atanh series failed to converge");
    }
}

/// Enclosure of `exp(x)` for a dyadic point `x` with `|x| <= 2^40`.
fn exp_point(x: &Dyadic, precision: u32) -> DyadicInterval {
    let wp = precision + GUARD;
    let ln2 = ln2_interval(wp);
    // Heuristic range reduction: x = k*ln2 + r with |r| <= 1.
    let mut k = (x.to_f64_approx() / std::f64::consts::LN_2).round() as i64;
    let r = loop {
        let kln2 = ln2.mul(&DyadicInterval::from_integer(k, wp));
        let r = DyadicInterval::point(x.clone(), wp).sub(&kln2);
        if r.abs_hi().abs_le_pow2(0) {
            break r;
        }
        // to_f64 heuristic missed; nudge k toward x/ln2.
        if r.lo.is_negative() {
            k -= 1;
        } else {
            k += 1;
        }
    };
    // exp(r) by Taylor series with certified remainder.
    let mut term = DyadicInterval::point(Dyadic::one(), wp);
    let mut sum = term.clone();
    let mut j = 1i64;
    loop {
        term = term.mul(&r).div(&DyadicInterval::from_integer(j, wp)).unwrap();
        sum = sum.add(&term);
        let bound = term.abs_hi();
        if j >= 2 && bound.abs_le_pow2(-((precision + 8) as i64)) {
            // |r| <= 1 and j >= 2 make the tail a geometric series with
            // ratio <= 1/3; bound it by 2 * |term|.
            let tb = bound.mul(&Dyadic::from_i64(2));
            let tail = DyadicInterval { lo: tb.neg(), hi: tb, precision: wp };
            sum = sum.add(&tail);
            break;
        }
        j += 1;
        assert!(j < 100_000, "exp series failed to converge");
    }
    let shifted = DyadicInterval {
        lo: sum.lo.mul_pow2(k),
        hi: sum.hi.mul_pow2(k),
        precision: wp,
    };
    DyadicInterval::rounded(shifted.lo, shifted.hi, precision)
}

/// Enclosure of `exp` over an interval (monotone increasing).
fn exp_interval(x: &DyadicInterval, precision: u32) -> DyadicInterval {
    let lo = exp_point(&x.lo, precision);
    let hi = exp_point(&x.hi, precision);
    DyadicInterval {
        lo: lo.lo,
        hi: hi.hi,
        precision,
    }
}

/// Enclosure of `ln(y)` for a dyadic point `y > 0`.
fn ln_point(y: &Dyadic, precision: u32) -> DyadicInterval {
    assert!(!y.is_negative() && !y.is_zero());
    let wp = precision + GUARD;
    // y = m * 2^c with m in [1, 2).
    let c = y.mant_bits() as i64 - 1 + y.exponent();
    let m = y.mul_pow2(-c);
    // ln m = 2 atanh((m-1)/(m+1)), argument in [0, 1/3).
    let one = Dyadic::one();
    let num = DyadicInterval::point(m.sub(&one), wp);
    let den = DyadicInterval::point(m.add(&one), wp);
    let u = num.div(&den).expect("m + 1 >= 2");
    let at = atanh_small(&u, wp);
    let two = DyadicInterval::from_integer(2, wp);
    let ln_m = two.mul(&at);
    let ln2 = ln2_interval(wp);
    let c_iv = DyadicInterval::from_integer(c, wp);
    let r = ln_m.add(&ln2.mul(&c_iv));
    DyadicInterval::rounded(r.lo, r.hi, precision)
}

/// Enclosure of `{2^(-x) : x in t}` for a nonnegative interval `t`.
///
/// Integer exponents are exact: `pow2_neg_bounds([3,3]) = [1/8, 1/8]`.
pub fn pow2_neg_bounds(t: &DyadicInterval, precision: u32) -> Result<DyadicInterval> {
    if t.lo.is_negative() {
        return Err(Error::NegativeExponent(t.lo_rational().to_string()));
    }
    let lo_part = pow2_neg_point(&t.hi, precision)?;
    let hi_part = pow2_neg_point(&t.lo, precision)?;
    Ok(DyadicInterval {
        lo: lo_part.lo,
        hi: hi_part.hi,
        precision,
    })
}

/// Enclosure of `2^(-x)` for a dyadic point `x >= 0`.
fn pow2_neg_point(x: &Dyadic, precision: u32) -> Result<DyadicInterval> {
    let int_part = x.floor_bigint();
    let neg_k = (-&int_part).to_i64().ok_or(Error::ExponentRange)?;
    let frac = x.sub(&Dyadic::from_bigint(int_part)); // in [0, 1)
    if frac.is_zero() {
        let one = Dyadic::one().mul_pow2(neg_k);
        return Ok(DyadicInterval::point(one, precision));
    }
    let wp = precision + GUARD;
    let ln2 = ln2_interval(wp);
    let arg = ln2.mul(&DyadicInterval::point(frac.neg(), wp));
    let e = exp_interval(&arg, precision);
    Ok(DyadicInterval {
        lo: e.lo.mul_pow2(neg_k),
        hi: e.hi.mul_pow2(neg_k),
        precision,
    })
}

/// Enclosure of `n^e` for integer `n >= 1` and rational `e >= 0`.
///
/// Exact cases (integer `e`, or `n` a perfect power matching `e`'s
/// denominator) return point intervals: `real_power_bounds(16, 1/2) = [4,4]`.
pub fn real_power_bounds(n: u64, e: &Rational, precision: u32) -> Result<DyadicInterval> {
    if n == 0 {
        return Err(Error::NonPositive("n must be >= 1".into()));
    }
    if e.is_negative() {
        return Err(Error::NegativeExponent(e.to_string()));
    }
    if n == 1 || e.is_zero() {
        return Ok(DyadicInterval::point(Dyadic::one(), precision));
    }
    let p = e.numer();
    let q = e.denom();
    if let (Some(p_u), Some(q_u)) = (p.to_u32(), q.to_u32()) {
        if q_u == 1 {
            let v = BigInt::from(n).pow(p_u);
            return Ok(DyadicInterval::point(Dyadic::from_bigint(v), precision));
        }
        let root = num_integer::Roots::nth_root(&BigInt::from(n), q_u);
        if root.pow(q_u) == BigInt::from(n) {
            let v = root.pow(p_u);
            return Ok(DyadicInterval::point(Dyadic::from_bigint(v), precision));
        }
    }
    let wp = precision + GUARD;
    let ln_n = ln_point(&Dyadic::from_bigint(BigInt::from(n)), wp);
    let e_iv = DyadicInterval::from_rational(e, wp);
    let x = e_iv.mul(&ln_n);
    Ok(exp_interval(&x, precision))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rint};
    use proptest::prelude::*;

    #[test]
    fn sqrt_examples() {
        let four = sqrt_bounds(&rint(4), 10).unwrap();
        assert_eq!(four.lo_rational(), rint(2));
        assert_eq!(four.hi_rational(), rint(2));
        let zero = sqrt_bounds(&rint(0), 10).unwrap();
        assert_eq!(zero.lo_rational(), rint(0));
        assert_eq!(zero.hi_rational(), rint(0));
        let two = sqrt_bounds(&rint(2), 30).unwrap();
        let (lo, hi) = (two.lo_rational(), two.hi_rational());
        assert!(&lo * &lo <= rint(2) && rint(2) <= &hi * &hi);
        assert!(&hi - &lo <= rat(1, 2).pow(30) * hi.clone().max(rint(1)));
        assert!(sqrt_bounds(&rint(-1), 10).is_err());
    }

    #[test]
    fn sqrt_relative_width_large_values() {
        // width <= 2^-prec * max(1, hi) must hold for huge arguments too.
        let big = rint(10).pow(60) + rat(1, 3);
        let iv = sqrt_bounds(&big, 64).unwrap();
        let (lo, hi) = (iv.lo_rational(), iv.hi_rational());
        assert!(&lo * &lo <= big && big <= &hi * &hi);
        assert!(&hi - &lo <= rat(1, 2).pow(64) * hi.clone());
    }

    #[test]
    fn pow2_neg_examples() {
        let t = DyadicInterval::from_integer(3, 20);
        let r = pow2_neg_bounds(&t, 20).unwrap();
        assert_eq!(r.lo_rational(), rat(1, 8));
        assert_eq!(r.hi_rational(), rat(1, 8));

        // 2^(-1/2) = 1/sqrt(2): compare against the square-root route.
        let half = DyadicInterval::from_rational(&rat(1, 2), 40);
        let p = pow2_neg_bounds(&half, 30).unwrap();
        let s = sqrt_bounds(&rat(1, 2), 100).unwrap();
        assert!(p.lo_rational() <= s.hi_rational() && s.lo_rational() <= p.hi_rational());
        let w = p.width().to_rational();
        assert!(w <= rat(1, 2).pow(28));
        // Tighter precision stays inside the looser enclosure.
        let p2 = pow2_neg_bounds(&half, 60).unwrap();
        assert!(p.contains(&p2));

        assert!(pow2_neg_bounds(&DyadicInterval::from_integer(-1, 20), 20).is_err());
    }

    #[test]
    fn real_power_examples() {
        let r = real_power_bounds(16, &rat(1, 2), 20).unwrap();
        assert_eq!(r.lo_rational(), rint(4));
        assert_eq!(r.hi_rational(), rint(4));

        let one = real_power_bounds(1, &rat(2_718_281, 1_000_000), 20).unwrap();
        assert_eq!(one.lo_rational(), rint(1));
        assert_eq!(one.hi_rational(), rint(1));

        // 120^(3/5): independent bracket via integer 5th roots of 120^3 * 10^60.
        let r = real_power_bounds(120, &rat(3, 5), 40).unwrap();
        let scaled = BigInt::from(1_728_000u64) * BigInt::from(10u32).pow(60);
        let root = num_integer::Roots::nth_root(&scaled, 5);
        let lo_ref = Rational::new(root.clone(), BigInt::from(10u32).pow(12));
        let hi_ref = Rational::new(root + 1, BigInt::from(10u32).pow(12));
        assert!(r.lo_rational() <= hi_ref && lo_ref <= r.hi_rational());
        assert!(r.width().to_rational() <= rat(1, 2).pow(35) * rint(32));
    }

    #[test]
    fn ln2_matches_reference() {
        let iv = ln2_interval(80);
        // 50 decimal digits of ln 2.
        let lo_ref = crate::exact::decimal_to_rational("0.69314718055994530941723212145817656807550013436025")
            .unwrap();
        let hi_ref = &lo_ref + rat(1, 10).pow(49);
        assert!(iv.lo_rational() <= hi_ref && lo_ref <= iv.hi_rational());
        assert!(iv.width().to_rational() <= rat(1, 2).pow(78));
    }

    #[test]
    fn compare_verdicts() {
        let a = DyadicInterval::from_rational(&rat(1, 3), 40);
        let b = DyadicInterval::from_rational(&rat(1, 2), 40);
        assert_eq!(certified_compare(&a, &b), Verdict::Less);
        assert_eq!(certified_compare(&b, &a), Verdict::NotLess);
        let c = DyadicInterval::from_endpoints(Dyadic::zero(), Dyadic::one(), 10);
        assert_eq!(certified_compare(&c, &c), Verdict::Inconclusive);
        // Equal point intervals: not less, in both orders.
        let p = DyadicInterval::from_integer(5, 10);
        assert_eq!(certified_compare(&p, &p), Verdict::NotLess);
    }

    #[test]
    fn interval_division_rejects_zero_span() {
        let a = DyadicInterval::from_integer(1, 20);
        let b = DyadicInterval::from_endpoints(Dyadic::from_i64(-1), Dyadic::from_i64(1), 20);
        assert!(a.div(&b).is_err());
    }

    fn arb_q() -> impl Strategy<Value = Rational> {
        (-2000i64..2000, 1i64..500).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        // Exact rational results of +,-,*,/ always lie inside the interval
        // computed at modest precision.
        #[test]
        fn field_ops_sound(a in arb_q(), b in arb_q()) {
            let prec = 48u32;
            let ia = DyadicInterval::from_rational(&a, prec);
            let ib = DyadicInterval::from_rational(&b, prec);
            prop_assert!(ia.add(&ib).contains_rational(&(&a + &b)));
            prop_assert!(ia.sub(&ib).contains_rational(&(&a - &b)));
            prop_assert!(ia.mul(&ib).contains_rational(&(&a * &b)));
            if !b.is_zero() {
                let ibz = DyadicInterval::from_rational(&b, prec);
                if !(ibz.lo_rational() <= rint(0) && rint(0) <= ibz.hi_rational()) {
                    prop_assert!(ia.div(&ibz).unwrap().contains_rational(&(&a / &b)));
                }
            }
        }

        #[test]
        fn sqrt_sound_and_monotone(a in (0i64..4_000_000), d in 1i64..1000) {
            let q = rat(a, d);
            let lo_p = sqrt_bounds(&q, 32).unwrap();
            let hi_p = sqrt_bounds(&q, 64).unwrap();
            // lo^2 <= q <= hi^2 at both precisions.
            for iv in [&lo_p, &hi_p] {
                let (l, h) = (iv.lo_rational(), iv.hi_rational());
                prop_assert!(&l * &l <= q && q <= &h * &h);
            }
            // Doubling precision never widens.
            prop_assert!(lo_p.contains(&hi_p));
        }

        #[test]
        fn pow2_neg_monotone(n in 0i64..64, d in 1i64..64) {
            let t = DyadicInterval::from_rational(&rat(n, d), 80);
            let coarse = pow2_neg_bounds(&t, 24).unwrap();
            let fine = pow2_neg_bounds(&t, 48).unwrap();
            prop_assert!(coarse.contains(&fine));
            prop_assert!(!fine.lo.is_negative());
        }

        #[test]
        fn compare_antisymmetric(a in arb_q(), b in arb_q(), wa in 0i64..5, wb in 0i64..5) {
            let ia = DyadicInterval::from_endpoints(
                Dyadic::from_rational(&a, 40, Rounding::Down),
                Dyadic::from_rational(&(&a + rat(wa, 7)), 40, Rounding::Up),
                40,
            );
            let ib = DyadicInterval::from_endpoints(
                Dyadic::from_rational(&b, 40, Rounding::Down),
                Dyadic::from_rational(&(&b + rat(wb, 7)), 40, Rounding::Up),
                40,
            );
            if certified_compare(&ia, &ib) == Verdict::Less {
                prop_assert_eq!(certified_compare(&ib, &ia), Verdict::NotLess);
            }
        }
    }
}
