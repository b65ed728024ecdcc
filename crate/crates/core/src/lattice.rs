//! Discrete harmonic polynomials on the lattice.
//!
//! `F_k(x) = C(x + (k-1)/2, k)` is a one-dimensional discrete analogue of
//! `x^k/k!`; combining two of them with powers of `i` gives
//! `Z_k(x, y) = sum_l i^l F_{k-l}(x) F_l(y)`, a discrete-harmonic analogue of
//! `z^k/k!`. Both are defined on half-integers, stored here as doubled
//! integer coordinates so that all lattice geometry stays in `i64`.
//!
//! The normalized variant `Z~_k(x, y) = 2^k Z_k(x/2, y/2)` lives on the
//! integer sublattice and is the natural object for the coefficient recursion.
//!
//! Discrete calculus: `partial(u, s, p) = u(p + s) - u(p)` for one of the four
//! axis directions, and `laplacian(u, p) = (1/4) sum_s (u(p+s) - u(p))`. Both
//! preserve harmonicity, and on the `Z_k` family the partial derivative is a
//! half-step shift of `Z_{k-1}`.

use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{factorial, Rational};

/// Gaussian rational: exact complex number with rational re/im parts.
pub type GaussianRational = num_complex::Complex<Rational>;

pub fn gaussian(re: Rational, im: Rational) -> GaussianRational {
    GaussianRational::new(re, im)
}

/// Half-integer stored as its doubled value: `HalfInt(d)` represents `d/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i64);

impl HalfInt {
    pub fn from_integer(v: i64) -> Self {
        HalfInt(2 * v)
    }

    pub fn from_doubled(d: i64) -> Self {
        HalfInt(d)
    }

    pub fn doubled(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn as_integer(self) -> Option<i64> {
        if self.is_integer() {
            Some(self.0 / 2)
        } else {
            None
        }
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(BigInt::from(self.0), BigInt::from(2))
    }

    /// Parses "p" or "p/2" (also accepts even `p/q` forms reducing to
    /// half-integers, e.g. "3/2", "-7/2", "4/2").
    pub fn from_rational(q: &Rational) -> Result<Self> {
        let doubled = q * Rational::from_integer(BigInt::from(2));
        if !doubled.is_integer() {
            return Err(Error::NotHalfInteger(q.to_string()));
        }
        let d = doubled.to_integer();
        let d: i64 = d.try_into().map_err(|_| Error::NotHalfInteger(q.to_string()))?;
        Ok(HalfInt(d))
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

/// Point of the half-integer lattice `(Z/2)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HalfPoint {
    pub x: HalfInt,
    pub y: HalfInt,
}

impl HalfPoint {
    pub fn from_integer(x: i64, y: i64) -> Self {
        HalfPoint { x: HalfInt::from_integer(x), y: HalfInt::from_integer(y) }
    }

    pub fn from_doubled(x2: i64, y2: i64) -> Self {
        HalfPoint { x: HalfInt::from_doubled(x2), y: HalfInt::from_doubled(y2) }
    }

    pub fn origin() -> Self {
        Self::from_integer(0, 0)
    }

    pub fn is_integer(&self) -> bool {
        self.x.is_integer() && self.y.is_integer()
    }

    /// Full step in direction `s`.
    pub fn step(&self, s: Direction) -> Self {
        let (dx, dy) = s.vector();
        HalfPoint {
            x: HalfInt(self.x.0 + 2 * dx),
            y: HalfInt(self.y.0 + 2 * dy),
        }
    }

    /// Half step `p + s/2`.
    pub fn half_step(&self, s: Direction) -> Self {
        let (dx, dy) = s.vector();
        HalfPoint {
            x: HalfInt(self.x.0 + dx),
            y: HalfInt(self.y.0 + dy),
        }
    }

    pub fn offset(&self, dx: i64, dy: i64) -> Self {
        HalfPoint {
            x: HalfInt(self.x.0 + 2 * dx),
            y: HalfInt(self.y.0 + 2 * dy),
        }
    }
}

/// The four lattice directions, in the fixed order used by all sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    North,
    South,
    East,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::South,
        Direction::East,
        Direction::West,
    ];

    pub fn vector(self) -> (i64, i64) {
        match self {
            Direction::North => (0, 1),
            Direction::South => (0, -1),
            Direction::East => (1, 0),
            Direction::West => (-1, 0),
        }
    }

    /// The direction as a complex unit (`E -> 1`, `N -> i`, ...); this is the
    /// factor appearing in the shift identity
    /// `partial_s Z_k(p) = unit(s) * Z_{k-1}(p + s/2)`.
    pub fn unit_complex(self) -> GaussianRational {
        let (dx, dy) = self.vector();
        gaussian(
            Rational::from_integer(BigInt::from(dx)),
            Rational::from_integer(BigInt::from(dy)),
        )
    }
}

/// `F_k` scaled to an integer: `f_hat(k, x) = F_k(x) * 2^k * k!`, a product of
/// `k` integers forming a symmetric window around the doubled coordinate.
pub fn f_hat(k: usize, x: HalfInt) -> BigInt {
    let x2 = x.doubled();
    let mut prod = BigInt::one();
    for i in 0..k as i64 {
        prod *= x2 + (k as i64 - 1) - 2 * i;
    }
    prod
}

/// `f_hat(j, x)` for all `j = 0..=k`, built along the two parity chains
/// `f_hat(j+2) = f_hat(j) * (x2+j+1)(x2-j-1)`.
pub fn f_hat_table(k: usize, x: HalfInt) -> Vec<BigInt> {
    let x2 = x.doubled();
    let mut table = Vec::with_capacity(k + 1);
    table.push(BigInt::one());
    if k >= 1 {
        table.push(BigInt::from(x2));
    }
    for j in 2..=k {
        let w = j as i64 - 1;
        let next = &table[j - 2] * ((x2 + w) * (x2 - w));
        table.push(next);
    }
    table
}

/// `F_k(x) = C(x + (k-1)/2, k)` as an exact rational.
pub fn eval_f(k: usize, x: HalfInt) -> Rational {
    Rational::new(f_hat(k, x), BigInt::one() << k as u64) / Rational::from_integer(factorial(k))
}

/// Gaussian integer `2^k k! Z_k(p)` as `(re, im)`.
///
/// This is the hot evaluation path: all arithmetic is over `BigInt`, and the
/// rational scale is divided out exactly once by the callers that need it.
pub fn z_scaled(k: usize, p: HalfPoint) -> (BigInt, BigInt) {
    let fx = f_hat_table(k, p.x);
    let fy = f_hat_table(k, p.y);
    let mut re = BigInt::zero();
    let mut im = BigInt::zero();
    let mut binom = BigInt::one(); // C(k, l), updated incrementally
    for l in 0..=k {
        let term = &binom * (&fx[k - l] * &fy[l]);
        match l % 4 {
            0 => re += term,
            1 => im += term,
            2 => re -= term,
            _ => im -= term,
        }
        if l < k {
            binom = binom * (k - l) / (l + 1);
        }
    }
    (re, im)
}

/// Scale factor `2^k k!` linking [`z_scaled`] to `Z_k`.
pub fn z_scale(k: usize) -> BigInt {
    factorial(k) << k as u64
}

/// `Z_k(p) = sum_l i^l F_{k-l}(x) F_l(y)` as an exact Gaussian rational.
pub fn eval_z(k: usize, p: HalfPoint) -> GaussianRational {
    let (re, im) = z_scaled(k, p);
    let scale = z_scale(k);
    gaussian(
        Rational::new(re, scale.clone()),
        Rational::new(im, scale),
    )
}

/// Normalized polynomial `Z~_k(x, y) = 2^k Z_k(x/2, y/2)`, defined on integer
/// points only; genuine half-integer input is rejected.
pub fn eval_z_tilde(k: usize, p: HalfPoint) -> Result<GaussianRational> {
    let (x, y) = integer_coords(p)?;
    let (re, im) = z_tilde_scaled(k, x, y);
    let scale = factorial(k);
    Ok(gaussian(
        Rational::new(re, scale.clone()),
        Rational::new(im, scale),
    ))
}

/// Gaussian integer `k! Z~_k(x, y)` at an integer point.
pub fn z_tilde_scaled(k: usize, x: i64, y: i64) -> (BigInt, BigInt) {
    // Z~_k(x, y) = 2^k Z_k(x/2, y/2); the halved point has doubled coords (x, y).
    z_scaled(k, HalfPoint::from_doubled(x, y))
}

fn integer_coords(p: HalfPoint) -> Result<(i64, i64)> {
    match (p.x.as_integer(), p.y.as_integer()) {
        (Some(x), Some(y)) => Ok((x, y)),
        _ => Err(Error::NonIntegerPoint(
            p.x.to_rational().to_string(),
            p.y.to_rational().to_string(),
        )),
    }
}

/// Squared modulus `|Z_k(p)|^2` as an exact rational.
pub fn z_norm_sqr(k: usize, p: HalfPoint) -> Rational {
    let (re, im) = z_scaled(k, p);
    let scale = z_scale(k);
    Rational::new(&re * &re + &im * &im, &scale * &scale)
}

/// Squared modulus `|Z~_k(x, y)|^2` at an integer point.
pub fn z_tilde_norm_sqr(k: usize, x: i64, y: i64) -> Rational {
    let (re, im) = z_tilde_scaled(k, x, y);
    let f = factorial(k);
    Rational::new(&re * &re + &im * &im, &f * &f)
}

/// Selects between the half-integer-normalized `Z_k` and the integer-lattice
/// `Z~_k` in code paths that handle both.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZVariant {
    Plain,
    Tilde,
}

impl ZVariant {
    /// Integer numerator of `|Z|^2` at an integer point:
    /// `norm_sqr_scaled / norm_sqr_denom` is the exact squared modulus.
    pub fn norm_sqr_scaled(self, k: usize, x: i64, y: i64) -> BigInt {
        let (re, im) = match self {
            ZVariant::Plain => z_scaled(k, HalfPoint::from_integer(x, y)),
            ZVariant::Tilde => z_tilde_scaled(k, x, y),
        };
        &re * &re + &im * &im
    }

    pub fn norm_sqr_denom(self, k: usize) -> BigInt {
        let f = factorial(k);
        let sq = &f * &f;
        match self {
            ZVariant::Plain => sq << (2 * k as u64),
            ZVariant::Tilde => sq,
        }
    }
}

/// Sub-lattice a function is defined on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    HalfIntegers,
    Integers,
}

/// An evaluation rule on (a sub-lattice of) the half-integer lattice, closed
/// over its parameters. Shared immutably, so grids can be evaluated in
/// parallel.
#[derive(Clone)]
pub struct LatticeFunction {
    domain: Domain,
    eval: Arc<dyn Fn(HalfPoint) -> GaussianRational + Send + Sync>,
}

impl LatticeFunction {
    pub fn new(
        domain: Domain,
        f: impl Fn(HalfPoint) -> GaussianRational + Send + Sync + 'static,
    ) -> Self {
        LatticeFunction { domain, eval: Arc::new(f) }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn eval(&self, p: HalfPoint) -> GaussianRational {
        if self.domain == Domain::Integers {
            assert!(
                p.is_integer(),
                "integer-lattice function evaluated at half-point ({}, {})",
                p.x.to_rational(),
                p.y.to_rational()
            );
        }
        (self.eval)(p)
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::new(Domain::HalfIntegers, move |_| c.clone())
    }

    /// `Z_k` as a lattice function.
    pub fn z(k: usize) -> Self {
        Self::new(Domain::HalfIntegers, move |p| eval_z(k, p))
    }

    /// `Z~_k` as a lattice function on the integer sublattice.
    pub fn z_tilde(k: usize) -> Self {
        Self::new(Domain::Integers, move |p| {
            eval_z_tilde(k, p).expect("domain enforced by LatticeFunction::eval")
        })
    }

    /// `|Z_k|^2` as a real-valued (imaginary part zero) lattice function.
    pub fn z_norm_sqr(k: usize) -> Self {
        Self::new(Domain::HalfIntegers, move |p| {
            gaussian(z_norm_sqr(k, p), Rational::zero())
        })
    }

    /// `|Z~_k|^2` on the integer sublattice.
    pub fn z_tilde_norm_sqr(k: usize) -> Self {
        Self::new(Domain::Integers, move |p| {
            let (x, y) = integer_coords(p).expect("domain enforced by LatticeFunction::eval");
            gaussian(z_tilde_norm_sqr(k, x, y), Rational::zero())
        })
    }
}

/// Discrete partial derivative `(partial_s u)(p) = u(p + s) - u(p)`.
pub fn partial(u: &LatticeFunction, s: Direction, p: HalfPoint) -> GaussianRational {
    u.eval(p.step(s)) - u.eval(p)
}

/// Lattice Laplacian `(1/4) sum_s (u(p+s) - u(p))`.
pub fn laplacian(u: &LatticeFunction, p: HalfPoint) -> GaussianRational {
    let mut acc = gaussian(Rational::zero(), Rational::zero());
    for s in Direction::ALL {
        acc += u.eval(p.step(s));
    }
    let quarter = Rational::new(BigInt::one(), BigInt::from(4));
    gaussian(quarter.clone() * acc.re, quarter * acc.im) - u.eval(p)
}

/// Iterated partial derivative along `dirs` (applied right to left, though the
/// operators commute; the empty list is the identity).
pub fn iterated_partial(
    u: &LatticeFunction,
    dirs: &[Direction],
    p: HalfPoint,
) -> GaussianRational {
    match dirs.split_first() {
        None => u.eval(p),
        Some((&s, rest)) => {
            iterated_partial(u, rest, p.step(s)) - iterated_partial(u, rest, p)
        }
    }
}

/// `l`-fold Laplacian by nested single-Laplacian passes over a shrinking
/// L1-ball stencil: `O(l^2)` evaluations of `u` instead of `4^l`.
pub fn laplacian_power(u: &LatticeFunction, l: usize, p: HalfPoint) -> GaussianRational {
    let r = l as i64;
    // Level 0: u on the L1 ball of radius l around p.
    let mut values: std::collections::HashMap<(i64, i64), GaussianRational> =
        std::collections::HashMap::new();
    for dx in -r..=r {
        let rem = r - dx.abs();
        for dy in -rem..=rem {
            values.insert((dx, dy), u.eval(p.offset(dx, dy)));
        }
    }
    let quarter = Rational::new(BigInt::one(), BigInt::from(4));
    for level in 1..=l {
        let radius = r - level as i64;
        let mut next = std::collections::HashMap::new();
        for dx in -radius..=radius {
            let rem = radius - dx.abs();
            for dy in -rem..=rem {
                let mut acc = gaussian(Rational::zero(), Rational::zero());
                for s in Direction::ALL {
                    let (sx, sy) = s.vector();
                    acc += values[&(dx + sx, dy + sy)].clone();
                }
                let v = gaussian(quarter.clone() * acc.re, quarter.clone() * acc.im)
                    - values[&(dx, dy)].clone();
                next.insert((dx, dy), v);
            }
        }
        values = next;
    }
    values.remove(&(0, 0)).expect("center survives all passes")
}
