//! Exact distribution of the simple random walk on Z^2, expectations against
//! it, and a seeded Monte Carlo cross-check.
//!
//! Path counts are kept as integers and normalized by `4^n` only when an
//! expectation is taken, so every expectation is an exact rational. The
//! sampled estimator exists purely as an independent statistical oracle for
//! the exact pipeline; it never feeds back into any certified quantity.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::exact::{decimal_sqrt_string, decimal_string, Rational};
use crate::lattice::ZVariant;

/// Number-of-paths table of the `n`-step simple random walk started at the
/// origin: `count(v)` is the number of `n`-step paths ending at `v`, so the
/// endpoint law is `count(v) / 4^n`.
///
/// Dense square `[-radius, radius]^2` with parity skipping; the support after
/// `t` steps is `{|x|+|y| <= t, x+y = t (mod 2)}`.
#[derive(Clone)]
pub struct WalkDistribution {
    steps: usize,
    radius: usize,
    side: usize,
    counts: Vec<BigInt>,
}

/// Exact endpoint distribution after `n` steps.
pub fn walk_distribution(n: usize) -> WalkDistribution {
    let mut w = WalkDistribution::with_capacity(n);
    for _ in 0..n {
        w.advance();
    }
    w
}

impl WalkDistribution {
    /// Delta mass at the origin, with room to advance `radius` steps.
    pub fn with_capacity(radius: usize) -> Self {
        let side = 2 * radius + 1;
        let mut counts = vec![BigInt::zero(); side * side];
        counts[radius * side + radius] = BigInt::one();
        WalkDistribution { steps: 0, radius, side, counts }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn idx(&self, x: i64, y: i64) -> usize {
        let r = self.radius as i64;
        ((x + r) as usize) * self.side + ((y + r) as usize)
    }

    fn get(&self, x: i64, y: i64) -> &BigInt {
        &self.counts[self.idx(x, y)]
    }

    pub fn count(&self, x: i64, y: i64) -> BigInt {
        if x.unsigned_abs() + y.unsigned_abs() <= self.steps as u64 {
            self.get(x, y).clone()
        } else {
            BigInt::zero()
        }
    }

    /// One convolution step `count_{t+1}(v) = sum_s count_t(v - s)`.
    pub fn advance(&mut self) {
        let t = self.steps;
        assert!(t < self.radius, "walk advanced past its allocated radius");
        let r1 = t as i64 + 1;
        let mut next = vec![BigInt::zero(); self.counts.len()];
        for x in -r1..=r1 {
            let rem = r1 - x.abs();
            let mut y = -rem;
            while y <= rem {
                let mut acc = BigInt::zero();
                for (dx, dy) in [(0, 1), (0, -1), (1, 0), (-1, 0)] {
                    let (px, py) = (x - dx, y - dy);
                    if px.abs() + py.abs() <= t as i64 {
                        acc += self.get(px, py);
                    }
                }
                next[self.idx(x, y)] = acc;
                y += 2;
            }
        }
        self.counts = next;
        self.steps = t + 1;
    }

    /// `4^n`, the number of `n`-step paths.
    pub fn total(&self) -> BigInt {
        BigInt::one() << (2 * self.steps as u64)
    }

    /// Sum of the stored counts; equals [`total`](Self::total) by the mass
    /// invariant, and is kept as an independent route for tests.
    pub fn support_sum(&self) -> BigInt {
        self.counts.iter().sum()
    }

    fn for_each_support(&self, mut f: impl FnMut(i64, i64, &BigInt)) {
        let t = self.steps as i64;
        for x in -t..=t {
            let rem = t - x.abs();
            let mut y = -rem;
            while y <= rem {
                f(x, y, self.get(x, y));
                y += 2;
            }
        }
    }

    /// Exact expectation `E f(S_n) = sum_v count(v) f(v) / 4^n`.
    pub fn expect(&self, f: impl Fn(i64, i64) -> Rational) -> Rational {
        let mut acc = Rational::zero();
        self.for_each_support(|x, y, c| {
            acc += f(x, y) * Rational::from_integer(c.clone());
        });
        acc / Rational::from_integer(self.total())
    }

    /// Expectation of an integer-scaled integrand: `E [f(S_n) / denom]`.
    /// Accumulates in plain integers, which is the fast path for `|Z_k|^2`.
    pub fn expect_scaled(&self, f: impl Fn(i64, i64) -> BigInt, denom: &BigInt) -> Rational {
        let mut acc = BigInt::zero();
        self.for_each_support(|x, y, c| {
            acc += c * f(x, y);
        });
        Rational::new(acc, self.total() * denom)
    }

    /// Same expectation restricted to the octant `x >= y >= 0`, weighting each
    /// orbit by its size. Requires `f` invariant under the 8 lattice
    /// symmetries (sign flips and coordinate swap); the walk counts always
    /// are. Visits ~1/8 of the support.
    pub fn expect_octant(&self, f: impl Fn(i64, i64) -> BigInt, denom: &BigInt) -> Rational {
        let t = self.steps as i64;
        let mut acc = BigInt::zero();
        for x in 0..=t {
            // x >= y >= 0 and x + y <= t and x + y = t (mod 2)
            let hi = (t - x).min(x);
            let mut y = if (x + t) % 2 == 0 { 0 } else { 1 };
            while y <= hi {
                let orbit = if y > 0 && x > y {
                    8
                } else if y > 0 || x > 0 {
                    4
                } else {
                    1
                };
                acc += self.get(x, y) * f(x, y) * BigInt::from(orbit);
                y += 2;
            }
        }
        Rational::new(acc, self.total() * denom)
    }

    /// Exact even moment `E x^{2k}(S_n)` of one coordinate.
    pub fn coordinate_moment(&self, two_k: usize) -> Rational {
        assert!(two_k.is_multiple_of(2), "coordinate_moment takes an even order");
        self.expect_scaled(
            |x, _| BigInt::from(x).pow(two_k as u32),
            &BigInt::one(),
        )
    }

    /// `E |S_n|^2`, which equals `n` exactly.
    pub fn radial_second_moment(&self) -> Rational {
        self.expect_scaled(|x, y| BigInt::from(x * x + y * y), &BigInt::one())
    }
}

/// Endpoint of one sampled `n`-step walk. Draws two bits per step; the step
/// order matches [`Direction::ALL`](crate::lattice::Direction::ALL).
pub fn sample_endpoint(n: usize, rng: &mut impl RngCore) -> (i64, i64) {
    let (mut x, mut y) = (0i64, 0i64);
    for _ in 0..n {
        match rng.next_u32() & 3 {
            0 => y += 1,
            1 => y -= 1,
            2 => x += 1,
            _ => x -= 1,
        }
    }
    (x, y)
}

/// Monte Carlo estimate with the sampling configuration pinned alongside it.
///
/// `mean` and `standard_error` are truncated decimals of exact rationals: the
/// per-sample values are integers (scaled `|Z|^2`), accumulated without
/// rounding, so the estimate is bit-identical for a given `(seed, samples)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct McEstimate {
    pub mean: String,
    pub standard_error: String,
    pub samples: u64,
    pub seed: u64,
}

const MC_DIGITS: usize = 12;

/// Empirical mean of `|Z_k(S_n)|^2` (or `|Z~_k|^2`) over `samples`
/// independent seeded walks. Sample `i` reads stream `i` of a counter-based
/// generator, so the estimate does not depend on thread count or scheduling.
pub fn monte_carlo_q(
    k: usize,
    n: usize,
    samples: u64,
    seed: u64,
    variant: ZVariant,
) -> McEstimate {
    assert!(samples >= 1, "monte_carlo_q needs at least one sample");
    let (sum, sum_sq) = (0..samples)
        .into_par_iter()
        .fold(
            || (BigInt::zero(), BigInt::zero()),
            |(s, ss), i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let (x, y) = sample_endpoint(n, &mut rng);
                let v = variant.norm_sqr_scaled(k, x, y);
                let sq = &v * &v;
                (s + v, ss + sq)
            },
        )
        .reduce(
            || (BigInt::zero(), BigInt::zero()),
            |a, b| (a.0 + b.0, a.1 + b.1),
        );
    let denom = variant.norm_sqr_denom(k);
    let m = BigInt::from(samples);
    let mean = Rational::new(sum.clone(), &m * &denom);
    // Unbiased sample variance over m samples, divided once more by m:
    // stderr^2 = (m*sum_sq - sum^2) / (m^2 (m-1) denom^2).
    let stderr_sq = if samples >= 2 {
        let num = &m * sum_sq - &sum * &sum;
        debug_assert!(!num.is_negative());
        Rational::new(num, &m * &m * (&m - BigInt::one()) * &denom * &denom)
    } else {
        Rational::zero()
    };
    McEstimate {
        mean: decimal_string(&mean, MC_DIGITS),
        standard_error: decimal_sqrt_string(&stderr_sq, MC_DIGITS)
            .expect("sample variance is non-negative"),
        samples,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{decimal_to_rational, rat, rint};
    use crate::lattice::z_norm_sqr;
    use crate::lattice::HalfPoint;
    use proptest::prelude::*;

    /// Brute-force endpoint counter: walks all 4^n step sequences.
    fn enumerate_counts(n: usize) -> std::collections::HashMap<(i64, i64), u64> {
        let mut counts = std::collections::HashMap::new();
        let steps = [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)];
        let mut stack = vec![(0i64, 0i64, n)];
        while let Some((x, y, left)) = stack.pop() {
            if left == 0 {
                *counts.entry((x, y)).or_insert(0) += 1;
                continue;
            }
            for (dx, dy) in steps {
                stack.push((x + dx, y + dy, left - 1));
            }
        }
        counts
    }

    #[test]
    fn matches_brute_force_enumeration() {
        for n in 0..=6usize {
            let d = walk_distribution(n);
            let brute = enumerate_counts(n);
            let r = n as i64;
            for x in -r..=r {
                for y in -r..=r {
                    let expected = brute.get(&(x, y)).copied().unwrap_or(0);
                    assert_eq!(d.count(x, y), BigInt::from(expected), "n={n} ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn mass_is_conserved() {
        for n in 0..=25usize {
            let d = walk_distribution(n);
            assert_eq!(d.support_sum(), d.total(), "n={n}");
        }
    }

    #[test]
    fn small_distributions() {
        let d0 = walk_distribution(0);
        assert_eq!(d0.count(0, 0), BigInt::one());
        let d1 = walk_distribution(1);
        for (x, y) in [(0, 1), (0, -1), (1, 0), (-1, 0)] {
            assert_eq!(d1.count(x, y), BigInt::one());
        }
        assert_eq!(d1.count(0, 0), BigInt::zero());
        assert_eq!(walk_distribution(2).count(0, 0), BigInt::from(4));
    }

    #[test]
    fn eight_fold_symmetry() {
        let d = walk_distribution(9);
        for x in -9i64..=9 {
            for y in -9i64..=9 {
                let c = d.count(x, y);
                assert_eq!(d.count(-x, y), c);
                assert_eq!(d.count(x, -y), c);
                assert_eq!(d.count(y, x), c);
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let d5 = walk_distribution(5);
        assert_eq!(d5.expect(|_, _| rint(1)), rint(1));
        assert_eq!(d5.radial_second_moment(), rint(5));
        assert_eq!(walk_distribution(4).coordinate_moment(2), rint(2));
    }

    #[test]
    fn coordinate_moments() {
        for n in 0..=10usize {
            let d = walk_distribution(n);
            assert_eq!(d.coordinate_moment(0), rint(1));
            assert_eq!(d.coordinate_moment(2), rat(n as i64, 2), "n={n}");
        }
        // Fourth moment after two steps: 16-path enumeration gives 5/2,
        // strictly under the (2k)!/(4^k k!) n^k bound of 3.
        assert_eq!(walk_distribution(2).coordinate_moment(4), rat(5, 2));
    }

    #[test]
    fn z1_growth_is_linear() {
        let denom = ZVariant::Plain.norm_sqr_denom(1);
        for n in 0..=12usize {
            let d = walk_distribution(n);
            let q = d.expect_scaled(|x, y| ZVariant::Plain.norm_sqr_scaled(1, x, y), &denom);
            assert_eq!(q, rint(n as i64));
        }
    }

    #[test]
    fn octant_route_matches_full_route() {
        for k in 0..=4usize {
            let denom = ZVariant::Plain.norm_sqr_denom(k);
            for n in 0..=7usize {
                let d = walk_distribution(n);
                let full =
                    d.expect_scaled(|x, y| ZVariant::Plain.norm_sqr_scaled(k, x, y), &denom);
                let oct =
                    d.expect_octant(|x, y| ZVariant::Plain.norm_sqr_scaled(k, x, y), &denom);
                assert_eq!(full, oct, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn expect_agrees_with_expect_scaled() {
        let d = walk_distribution(6);
        let via_rational = d.expect(|x, y| z_norm_sqr(2, HalfPoint::from_integer(x, y)));
        let denom = ZVariant::Plain.norm_sqr_denom(2);
        let via_scaled = d.expect_scaled(|x, y| ZVariant::Plain.norm_sqr_scaled(2, x, y), &denom);
        assert_eq!(via_rational, via_scaled);
    }

    #[test]
    fn incremental_advance_matches_fresh_build() {
        let mut w = WalkDistribution::with_capacity(8);
        for n in 0..=8usize {
            let fresh = walk_distribution(n);
            assert_eq!(w.steps(), n);
            for x in -(n as i64)..=n as i64 {
                for y in -(n as i64)..=n as i64 {
                    assert_eq!(w.count(x, y), fresh.count(x, y));
                }
            }
            if n < 8 {
                w.advance();
            }
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(17);
        let mut b = ChaCha8Rng::seed_from_u64(17);
        for n in [0usize, 1, 5, 33] {
            assert_eq!(sample_endpoint(n, &mut a), sample_endpoint(n, &mut b));
        }
        let (x, y) = sample_endpoint(9, &mut a);
        assert!(x.abs() + y.abs() <= 9);
        assert_eq!((x + y).rem_euclid(2), 1); // parity of the step count
    }

    #[test]
    fn monte_carlo_degenerate_cases() {
        // |Z_0|^2 = 1 identically: the estimator is exact.
        let est = monte_carlo_q(0, 7, 500, 42, ZVariant::Plain);
        assert_eq!(est.mean, "1");
        assert_eq!(est.standard_error, "0");
        let est = monte_carlo_q(0, 7, 500, 42, ZVariant::Tilde);
        assert_eq!(est.mean, "1");
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = monte_carlo_q(2, 9, 2000, 7, ZVariant::Plain);
        let b = monte_carlo_q(2, 9, 2000, 7, ZVariant::Plain);
        assert_eq!(a, b);
        let c = monte_carlo_q(2, 9, 2000, 8, ZVariant::Plain);
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn monte_carlo_tracks_exact_value() {
        // k=1, n=5: exact Q is 5. A loose 5-sigma band keeps this stable.
        let est = monte_carlo_q(1, 5, 20_000, 1, ZVariant::Plain);
        let mean = decimal_to_rational(&est.mean).unwrap();
        let se = decimal_to_rational(&est.standard_error).unwrap();
        let dev = (mean - rint(5)).abs();
        assert!(dev <= rint(5) * se.max(rat(1, 1000)), "dev={dev}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn mass_and_symmetry(n in 0usize..14) {
            let d = walk_distribution(n);
            prop_assert_eq!(d.support_sum(), d.total());
            let r = n as i64;
            for x in 0..=r {
                for y in 0..=r - x {
                    let c = d.count(x, y);
                    prop_assert_eq!(&d.count(y, x), &c);
                    prop_assert_eq!(&d.count(-x, -y), &c);
                }
            }
        }

        #[test]
        fn octant_matches_full_on_symmetric_integrands(n in 0usize..10, k in 0usize..4) {
            let d = walk_distribution(n);
            let denom = ZVariant::Tilde.norm_sqr_denom(k);
            let full = d.expect_scaled(|x, y| ZVariant::Tilde.norm_sqr_scaled(k, x, y), &denom);
            let oct = d.expect_octant(|x, y| ZVariant::Tilde.norm_sqr_scaled(k, x, y), &denom);
            prop_assert_eq!(full, oct);
        }
    }
}
