//! Exact scalar arithmetic: arbitrary-precision rationals, generalized
//! binomial coefficients, and certified dyadic interval enclosures for the
//! handful of irrational quantities (square roots, powers of two with
//! irrational exponents, real powers) that the inequality checks need.
//!
//! Rationals are kept in canonical form (reduced, positive denominator) by
//! construction. Everything irrational is represented by a [`DyadicInterval`]
//! whose endpoints are exact dyadics and which always contains the true value;
//! comparisons of intervals yield a three-valued [`Verdict`] so that a check
//! can distinguish "certified" from "needs more precision".

mod dyadic;
mod interval;

pub use dyadic::{Dyadic, Rounding};
pub use interval::{
    certified_compare, ln2_interval, pow2_neg_bounds, real_power_bounds, sqrt_bounds,
    DyadicInterval, Verdict,
};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision signed rational in canonical form. `num_rational`
/// already maintains the invariants this crate relies on: gcd-reduced and
/// denominator positive.
pub type Rational = num_rational::BigRational;

/// Shorthand constructor for small rationals.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand constructor for integer rationals.
pub fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses "p/q" or "p" into a rational. Wrapper around `FromStr` that maps
/// the error into this crate's error type.
pub fn parse_rational(s: &str) -> Result<Rational> {
    s.trim().parse::<Rational>().map_err(|e| Error::InvalidParam {
        name: "rational".into(),
        reason: format!("`{s}`: {e}"),
    })
}

/// `k!` as a big integer.
pub fn factorial(k: usize) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=k {
        f *= i;
    }
    f
}

/// Binomial coefficient with integer arguments, `C(n, k)`.
pub fn binom_integer(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// Generalized binomial coefficient `C(r, k) = r(r-1)...(r-k+1)/k!` for
/// rational (possibly negative or fractional) `r` and integer `k >= 0`.
///
/// `C(r, 0) = 1` for every `r`.
pub fn binom_general(r: &Rational, k: usize) -> Rational {
    // Single reduction at the end: numerator = prod (p - i q), denominator = q^k k!.
    let p = r.numer();
    let q = r.denom();
    let mut num = BigInt::one();
    for i in 0..k {
        num *= p - BigInt::from(i as u64) * q;
    }
    let den = q.pow(k as u32) * factorial(k);
    Rational::new(num, den)
}

/// Rational lower bound for Euler's number: `2718281/10^6 < e`.
pub fn e_lower() -> Rational {
    rat(2_718_281, 1_000_000)
}

/// Rational upper bound for Euler's number: `e < 2718282/10^6`.
pub fn e_upper() -> Rational {
    rat(2_718_282, 1_000_000)
}

/// Lower Stirling constant: `c0 (n/e)^n sqrt(n) <= n!` for all `n >= 1`.
pub fn stirling_c0() -> Rational {
    rat(5, 2)
}

/// Upper Stirling constant: `n! <= c1 (n/e)^n sqrt(n)` for all `n >= 1`.
pub fn stirling_c1() -> Rational {
    rat(11, 4)
}

/// Exact verification of both Stirling-type bounds at a single `n`.
///
/// The square root is eliminated by squaring, and `e^n` is bracketed by the
/// rational bounds above, so the test is a pure rational comparison. The
/// sequence `n! e^n / (n^n sqrt(n))` decreases from `e` towards `sqrt(2 pi)`,
/// so a finite prefix check extends to all `n`; callers exercise this for a
/// window of small `n`.
pub fn stirling_bounds_hold(n: u64) -> bool {
    assert!(n >= 1);
    let nf = {
        let mut f = BigInt::one();
        for i in 2..=n {
            f *= i;
        }
        Rational::from_integer(f)
    };
    let n_pow = Rational::from_integer(BigInt::from(n).pow(2 * n as u32 + 1));
    let lower = {
        // (n! * e_lo^n)^2 >= c0^2 * n^(2n+1)
        let lhs = (&nf * e_lower().pow(n as i32)).pow(2);
        let rhs = stirling_c0().pow(2) * &n_pow;
        lhs >= rhs
    };
    let upper = {
        // (n! * e_up^n)^2 <= c1^2 * n^(2n+1)
        let lhs = (&nf * e_upper().pow(n as i32)).pow(2);
        let rhs = stirling_c1().pow(2) * &n_pow;
        lhs <= rhs
    };
    lower && upper
}

/// Truncated decimal rendering of a rational (toward zero), with at most
/// `digits` fractional digits and trailing zeros stripped. Deterministic.
pub fn decimal_string(q: &Rational, digits: usize) -> String {
    let sign = if q.is_negative() { "-" } else { "" };
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (q.abs() * Rational::from_integer(scale.clone())).trunc();
    let scaled = scaled.to_integer();
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    if frac_part.is_zero() {
        return format!("{sign}{int_part}");
    }
    let mut frac = format!("{:0>width$}", frac_part.to_string(), width = digits);
    while frac.ends_with('0') {
        frac.pop();
    }
    format!("{sign}{int_part}.{frac}")
}

/// Truncated decimal rendering of `sqrt(q)`, same policy as
/// [`decimal_string`]: `floor(sqrt(q) * 10^digits) / 10^digits` via integer
/// square root, so the output is deterministic across platforms.
pub fn decimal_sqrt_string(q: &Rational, digits: usize) -> Result<String> {
    if q.is_negative() {
        return Err(Error::NegativeSqrt(q.to_string()));
    }
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (q * Rational::from_integer(&scale * &scale)).trunc().to_integer();
    let root = num_integer::Roots::sqrt(&scaled);
    Ok(decimal_string(&Rational::new(root, scale), digits))
}

/// Parses a plain decimal string ("12", "-0.375") back into an exact rational.
pub fn decimal_to_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1i64, r),
        None => (1, t),
    };
    let mk_err = || Error::InvalidParam {
        name: "decimal".into(),
        reason: format!("`{s}` is not a decimal literal"),
    };
    let (int_s, frac_s) = match rest.split_once('.') {
        Some((a, b)) => (a, b),
        None => (rest, ""),
    };
    if int_s.is_empty() && frac_s.is_empty() {
        return Err(mk_err());
    }
    if !int_s.chars().all(|c| c.is_ascii_digit()) || !frac_s.chars().all(|c| c.is_ascii_digit()) {
        return Err(mk_err());
    }
    let int_part: BigInt = if int_s.is_empty() { BigInt::zero() } else { int_s.parse().unwrap() };
    let frac_part: BigInt = if frac_s.is_empty() { BigInt::zero() } else { frac_s.parse().unwrap() };
    let den = BigInt::from(10u32).pow(frac_s.len() as u32);
    Ok(Rational::new(
        BigInt::from(sign) * (int_part * &den + frac_part),
        den,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..200).prop_map(|(n, d)| rat(n, d))
    }

    #[test]
    fn binom_examples() {
        assert_eq!(binom_general(&rat(7, 2), 2), rat(35, 8));
        assert_eq!(binom_general(&rat(-3, 1), 0), rint(1));
        assert_eq!(binom_general(&rat(123, 45), 0), rint(1));
        assert_eq!(binom_general(&rat(1, 4), 2), rat(-3, 32));
        // Integer agreement.
        for n in 0..=12u64 {
            for k in 0..=n {
                assert_eq!(
                    binom_general(&rint(n as i64), k as usize),
                    Rational::from_integer(binom_integer(n, k))
                );
            }
        }
    }

    #[test]
    fn binom_pascal_rule() {
        // C(r, k) = C(r-1, k-1) + C(r-1, k) holds for arbitrary rational r.
        for (num, den, k) in [(7, 2, 3), (-5, 3, 4), (1, 4, 5), (9, 1, 2)] {
            let r = rat(num, den);
            let r1 = &r - rint(1);
            assert_eq!(
                binom_general(&r, k),
                binom_general(&r1, k - 1) + binom_general(&r1, k)
            );
        }
    }

    #[test]
    fn factorial_small() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(factorial(10), BigInt::from(3628800u64));
    }

    #[test]
    fn e_bounds_order() {
        assert!(e_lower() < e_upper());
        // 2.718281 < e < 2.718282: check against a longer decimal expansion.
        let e_ref = decimal_to_rational("2.718281828459045").unwrap();
        assert!(e_lower() < e_ref && e_ref < e_upper());
    }

    #[test]
    fn stirling_window() {
        for n in 1..=40 {
            assert!(stirling_bounds_hold(n), "stirling bounds fail at n = {n}");
        }
    }

    #[test]
    fn decimal_round_trip() {
        assert_eq!(decimal_string(&rint(1), 30), "1");
        assert_eq!(decimal_string(&rint(0), 30), "0");
        assert_eq!(decimal_string(&rat(-3, 8), 30), "-0.375");
        assert_eq!(decimal_to_rational("-0.375").unwrap(), rat(-3, 8));
        assert_eq!(decimal_to_rational("12").unwrap(), rint(12));
    }

    #[test]
    fn decimal_sqrt_examples() {
        assert_eq!(decimal_sqrt_string(&rint(4), 8).unwrap(), "2");
        assert_eq!(decimal_sqrt_string(&rint(0), 8).unwrap(), "0");
        assert_eq!(decimal_sqrt_string(&rint(2), 11).unwrap(), "1.41421356237");
        assert_eq!(decimal_sqrt_string(&rat(1, 4), 6).unwrap(), "0.5");
        assert!(decimal_sqrt_string(&rint(-1), 4).is_err());
    }

    proptest! {
        #[test]
        fn rational_field_laws(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
            prop_assert_eq!(&a - &a, rint(0));
            if !b.numer().is_zero() {
                prop_assert_eq!((&a / &b) * &b, a.clone());
            }
            // Canonical form: reduced, positive denominator.
            let g = num_integer::gcd(a.numer().clone(), a.denom().clone());
            prop_assert_eq!(g, BigInt::from(1));
            prop_assert!(a.denom() > &BigInt::from(0));
        }

        #[test]
        fn decimal_trunc_error_small(a in arb_rational()) {
            let s = decimal_string(&a, 24);
            let back = decimal_to_rational(&s).unwrap();
            let err = (&a - &back).abs();
            prop_assert!(err <= rat(1, 1_000_000).pow(4));
        }
    }
}
