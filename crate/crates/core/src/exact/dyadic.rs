use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};

use super::Rational;

/// Rounding direction for operations that cannot be exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    /// Toward negative infinity.
    Down,
    /// Toward positive infinity.
    Up,
}

impl Rounding {
    pub fn flip(self) -> Self {
        match self {
            Rounding::Down => Rounding::Up,
            Rounding::Up => Rounding::Down,
        }
    }
}

/// Exact dyadic number `mant * 2^exp`, canonicalized so that `mant` is odd
/// (or zero with `exp = 0`). Addition and multiplication are exact; rounding
/// happens only where explicitly requested, always in a stated direction.
#[derive(Clone, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

/// Floor of `m / 2^s` for `s >= 0`.
fn floor_shr(m: &BigInt, s: u64) -> BigInt {
    if m.sign() != Sign::Minus {
        m >> s
    } else {
        // floor for negatives: -ceil(|m| / 2^s)
        let mag = -m;
        let bias = (BigInt::one() << s) - 1;
        let q: BigInt = (mag + bias) >> s;
        -q
    }
}

/// Ceiling of `m / 2^s` for `s >= 0`.
fn ceil_shr(m: &BigInt, s: u64) -> BigInt {
    -floor_shr(&-m, s)
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Dyadic { mant: n, exp: 0 }.normalized()
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_bigint(BigInt::from(n))
    }

    /// `mant * 2^exp` without assuming canonical form of the inputs.
    pub fn new(mant: BigInt, exp: i64) -> Self {
        Dyadic { mant, exp }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            // Exact: the low bits are zero.
            self.mant = floor_shr(&self.mant, tz);
            self.exp += tz as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn mant_bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Canonical exponent (mantissa is odd, or zero with exponent 0).
    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.mant << self.exp as u64)
        } else {
            Rational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Nearest f64, for heuristics only (range reduction); never used for
    /// soundness decisions.
    pub fn to_f64_approx(&self) -> f64 {
        let bits = self.mant.bits();
        if bits == 0 {
            return 0.0;
        }
        // Keep the top 53 bits and track the dropped scale.
        let drop = bits.saturating_sub(53);
        let top = floor_shr(&self.mant, drop);
        let m: f64 = top.to_string().parse().unwrap_or(0.0);
        m * 2f64.powi((self.exp + drop as i64) as i32)
    }

    /// Largest integer `<= self`.
    pub fn floor_bigint(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            floor_shr(&self.mant, (-self.exp) as u64)
        }
    }

    /// Rounds to at most `prec` mantissa bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Rounding) -> Dyadic {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        let mant = match dir {
            Rounding::Down => floor_shr(&self.mant, shift),
            Rounding::Up => ceil_shr(&self.mant, shift),
        };
        Dyadic { mant, exp: self.exp + shift as i64 }.normalized()
    }

    /// Exact sum. Mantissa growth is bounded by the exponent gap, so callers
    /// round afterwards when composing long chains.
    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Dyadic { mant: a + b, exp: e }.normalized()
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    /// Exact product.
    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic { mant: &self.mant * &other.mant, exp: self.exp + other.exp }.normalized()
    }

    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Directed quotient with roughly `prec` significant bits.
    pub fn div(&self, other: &Dyadic, prec: u32, dir: Rounding) -> Dyadic {
        assert!(!other.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let na = self.mant.bits();
        let nb = other.mant.bits();
        // Scale the numerator so the integer quotient carries >= prec + 2 bits.
        let t = (prec as u64 + 2 + nb).saturating_sub(na);
        let num = &self.mant << t;
        let (q, r) = num_integer::Integer::div_rem(&num, &other.mant);
        let exact = r.is_zero();
        // div_rem truncates toward zero; fix up to the requested direction.
        let negative = (self.mant.sign() == Sign::Minus) != (other.mant.sign() == Sign::Minus);
        let q = if exact {
            q
        } else {
            match (dir, negative) {
                (Rounding::Down, true) => q - 1,
                (Rounding::Down, false) => q,
                (Rounding::Up, true) => q,
                (Rounding::Up, false) => q + 1,
            }
        };
        Dyadic { mant: q, exp: self.exp - other.exp - t as i64 }
            .normalized()
            .round(prec, dir)
    }

    /// Directed square root; `self >= 0` required.
    pub fn sqrt(&self, prec: u32, dir: Rounding) -> Dyadic {
        assert!(!self.is_negative(), "dyadic sqrt of negative value");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let mut mant = self.mant.clone();
        let mut exp = self.exp;
        if exp % 2 != 0 {
            mant <<= 1;
            exp -= 1;
        }
        // Scale so the root has at least prec + 2 bits.
        let want = 2 * (prec as u64 + 2);
        let mut t = want.saturating_sub(mant.bits());
        if !t.is_multiple_of(2) {
            t += 1;
        }
        mant <<= t;
        exp -= t as i64;
        let root = num_integer::Roots::sqrt(&mant);
        let exact = (&root * &root) == mant;
        let root = match (dir, exact) {
            (_, true) | (Rounding::Down, false) => root,
            (Rounding::Up, false) => root + 1,
        };
        Dyadic { mant: root, exp: exp / 2 }.normalized().round(prec, dir)
    }

    /// Directed conversion of a rational.
    pub fn from_rational(q: &Rational, prec: u32, dir: Rounding) -> Dyadic {
        let num = Dyadic::from_bigint(q.numer().clone());
        let den = Dyadic::from_bigint(q.denom().clone());
        num.div(&den, prec, dir)
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// True if `|self| <= 2^k`.
    pub fn abs_le_pow2(&self, k: i64) -> bool {
        if self.is_zero() {
            return true;
        }
        // |mant| * 2^exp <= 2^k  <=>  bits(|mant|) - 1 + exp <= k, with care at powers of two.
        let bits = self.mant.bits() as i64;
        if bits - 1 + self.exp < k {
            return true;
        }
        if bits - 1 + self.exp > k {
            return false;
        }
        // Boundary: equal only when mant is exactly +-2^(bits-1), i.e. bits == 1 after
        // normalization (mant odd).
        self.mant.abs() == BigInt::one()
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.mant.sign(), other.mant.sign()) {
            (Sign::Minus, Sign::NoSign | Sign::Plus) => return Ordering::Less,
            (Sign::NoSign, Sign::Plus) => return Ordering::Less,
            (Sign::Plus, Sign::Minus | Sign::NoSign) => return Ordering::Greater,
            (Sign::NoSign, Sign::Minus) => return Ordering::Greater,
            (Sign::NoSign, Sign::NoSign) => return Ordering::Equal,
            _ => {}
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        a.cmp(&b)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn shifts_floor_and_ceil() {
        assert_eq!(floor_shr(&BigInt::from(-5), 1), BigInt::from(-3));
        assert_eq!(ceil_shr(&BigInt::from(-5), 1), BigInt::from(-2));
        assert_eq!(floor_shr(&BigInt::from(5), 1), BigInt::from(2));
        assert_eq!(ceil_shr(&BigInt::from(5), 1), BigInt::from(3));
    }

    #[test]
    fn normalization_strips_twos() {
        let d = Dyadic::new(BigInt::from(24), -2);
        assert_eq!(d.to_rational(), rat(6, 1));
        let e = Dyadic::new(BigInt::from(-24), -5);
        assert_eq!(e.to_rational(), rat(-3, 4));
    }

    #[test]
    fn directed_division_brackets_quotient() {
        let a = Dyadic::from_i64(1);
        let b = Dyadic::from_i64(3);
        for prec in [4u32, 16, 53, 128] {
            let lo = a.div(&b, prec, Rounding::Down).to_rational();
            let hi = a.div(&b, prec, Rounding::Up).to_rational();
            assert!(lo <= rat(1, 3) && rat(1, 3) <= hi);
            assert!(&hi - &lo <= rat(1, 2).pow(prec as i32 - 2) * rat(1, 2));
        }
        // Negative numerators round the other way.
        let c = Dyadic::from_i64(-1);
        let lo = c.div(&b, 16, Rounding::Down).to_rational();
        let hi = c.div(&b, 16, Rounding::Up).to_rational();
        assert!(lo <= rat(-1, 3) && rat(-1, 3) <= hi);
    }

    #[test]
    fn directed_sqrt_brackets_root() {
        let two = Dyadic::from_i64(2);
        let lo = two.sqrt(60, Rounding::Down);
        let hi = two.sqrt(60, Rounding::Up);
        assert!(lo <= hi);
        let lo_q = lo.to_rational();
        let hi_q = hi.to_rational();
        assert!(&lo_q * &lo_q <= rat(2, 1));
        assert!(&hi_q * &hi_q >= rat(2, 1));
        // Perfect squares come out exact.
        let four = Dyadic::from_i64(4);
        assert_eq!(four.sqrt(10, Rounding::Down), four.sqrt(10, Rounding::Up));
        assert_eq!(four.sqrt(10, Rounding::Down).to_rational(), rat(2, 1));
    }

    #[test]
    fn ordering_across_exponents() {
        let a = Dyadic::new(BigInt::from(1), -80); // tiny positive
        let b = Dyadic::from_i64(1);
        let c = Dyadic::from_i64(-1);
        assert!(a < b);
        assert!(c < a);
        assert!(Dyadic::zero() < a);
    }

    #[test]
    fn abs_le_pow2_boundaries() {
        assert!(Dyadic::from_i64(8).abs_le_pow2(3));
        assert!(!Dyadic::from_i64(9).abs_le_pow2(3));
        assert!(Dyadic::from_i64(-8).abs_le_pow2(3));
        assert!(Dyadic::new(BigInt::from(3), -2).abs_le_pow2(0));
        assert!(!Dyadic::new(BigInt::from(5), -2).abs_le_pow2(0));
    }

    #[test]
    fn rounding_is_monotone_in_precision() {
        let v = Dyadic::from_rational(&rat(355, 113), 200, Rounding::Down);
        let mut prev_lo = v.round(8, Rounding::Down);
        let mut prev_hi = v.round(8, Rounding::Up);
        for prec in [16u32, 32, 64, 128] {
            let lo = v.round(prec, Rounding::Down);
            let hi = v.round(prec, Rounding::Up);
            assert!(lo >= prev_lo && hi <= prev_hi);
            assert!(lo <= v && v <= hi);
            prev_lo = lo;
            prev_hi = hi;
        }
    }
}
