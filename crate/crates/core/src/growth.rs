//! Growth functionals `Q_k`, their Newton expansions, and the coefficient
//! recursion.
//!
//! `Q_k(n) = E|Z_k(S_n)|^2` is a polynomial in `n` of degree `k`, so it is
//! captured exactly by its Newton form `Q_k(n) = sum_j a_{k,j} C(n, k-j)`.
//! Coefficients are extracted by two deliberately independent algorithms:
//!
//! * difference route — evaluate `Q_k(0..k)` against exact walk
//!   distributions and read `a_{k,j}` off the forward-difference triangle;
//! * recursion route — `a_{k,j} = 4^{-j} Q~_j(k-j)`, one tilde-growth value
//!   per coefficient, sharing a single incrementally advanced walk.
//!
//! Their exact agreement is a theorem, asserted coefficient by coefficient in
//! the test suites. Keep the routes independent: do not "optimize" one into
//! calling the other.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{binom_integer, rat, rint, Rational};
use crate::lattice::{laplacian_power, HalfPoint, LatticeFunction, ZVariant};
use crate::walk::{walk_distribution, WalkDistribution};

/// Newton-basis form of `Q_k`: `coeffs[j]` is `a_{k,j}`, the weight of
/// `C(n, k-j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonSeries {
    k: usize,
    coeffs: Vec<Rational>,
}

impl NewtonSeries {
    pub fn new(k: usize, coeffs: Vec<Rational>) -> Self {
        assert_eq!(coeffs.len(), k + 1, "degree-{k} series needs {} coefficients", k + 1);
        NewtonSeries { k, coeffs }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coeff(&self, j: usize) -> &Rational {
        &self.coeffs[j]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }
}

/// Exact `E|Z_k(S_n)|^2` (plain) or `E|Z~_k(S_n)|^2` (tilde) against the full
/// endpoint distribution.
pub fn q_direct(k: usize, n: usize, variant: ZVariant) -> Rational {
    q_direct_given(&walk_distribution(n), k, variant)
}

/// Same, against a caller-held distribution (reused across `k` or across
/// incremental steps).
pub fn q_direct_given(d: &WalkDistribution, k: usize, variant: ZVariant) -> Rational {
    let denom = variant.norm_sqr_denom(k);
    d.expect_octant(|x, y| variant.norm_sqr_scaled(k, x, y), &denom)
}

/// Full forward-difference triangle: row 0 is the input, row `m` holds the
/// `m`-th differences, i.e. `f^(m)(0..N-m)` for input `f(0..N)`.
pub fn forward_differences(values: &[Rational]) -> Vec<Vec<Rational>> {
    assert!(!values.is_empty(), "difference triangle of an empty list");
    let mut triangle = vec![values.to_vec()];
    while triangle.last().unwrap().len() > 1 {
        let prev = triangle.last().unwrap();
        let next: Vec<Rational> = prev.windows(2).map(|w| &w[1] - &w[0]).collect();
        triangle.push(next);
    }
    triangle
}

/// Newton coefficients via the difference triangle: `a_{k,j} = Q_k^(k-j)(0)`,
/// with `Q_k(0..k)` computed directly against walk distributions.
pub fn coeffs_by_difference(k: usize) -> NewtonSeries {
    let mut w = WalkDistribution::with_capacity(k);
    let mut values = Vec::with_capacity(k + 1);
    loop {
        values.push(q_direct_given(&w, k, ZVariant::Plain));
        if w.steps() == k {
            break;
        }
        w.advance();
    }
    let triangle = forward_differences(&values);
    let coeffs = (0..=k).map(|j| triangle[k - j][0].clone()).collect();
    NewtonSeries::new(k, coeffs)
}

/// Newton coefficients via the recursion `a_{k,j} = 4^{-j} Q~_j(k-j)`.
/// Misses are computed against one shared walk (advanced from 0 to k steps)
/// and written back to the cache.
pub fn coeffs_by_recursion(k: usize, cache: &mut CoeffCache) -> NewtonSeries {
    let mut coeffs = vec![Rational::zero(); k + 1];
    let mut walk: Option<WalkDistribution> = None;
    for m in 0..=k {
        let j = k - m;
        if let Some(v) = cache.get(k, j) {
            coeffs[j] = v.clone();
            continue;
        }
        let d = walk.get_or_insert_with(|| WalkDistribution::with_capacity(k));
        while d.steps() < m {
            d.advance();
        }
        let scale = Rational::new(BigInt::one(), BigInt::one() << (2 * j as u64));
        let v = scale * q_direct_given(d, j, ZVariant::Tilde);
        cache.insert(k, j, v.clone());
        coeffs[j] = v;
    }
    NewtonSeries::new(k, coeffs)
}

/// `Q_k(n) = sum_j a_{k,j} C(n, k-j)`; exact for every `n`, since `Q_k` is a
/// polynomial of degree `k`.
pub fn q_newton(series: &NewtonSeries, n: usize) -> Rational {
    q_truncated(series, n, series.k)
}

/// Partial Newton sum over `j <= jmax`. Nondecreasing in `jmax` because every
/// coefficient is nonnegative.
pub fn q_truncated(series: &NewtonSeries, n: usize, jmax: usize) -> Rational {
    assert!(jmax <= series.k, "jmax {jmax} exceeds degree {}", series.k);
    let mut acc = Rational::zero();
    for (j, a) in series.coeffs.iter().enumerate().take(jmax + 1) {
        if a.is_zero() {
            continue;
        }
        acc += a * Rational::from_integer(binom_integer(n as u64, (series.k - j) as u64));
    }
    acc
}

/// `min(k, ceil(c k^2 / n))`: the truncation index for a window constant `c`.
pub fn truncation_cutoff(c: &Rational, k: usize, n: usize) -> usize {
    assert!(n >= 1, "truncation cutoff needs n >= 1");
    let raw = (c * rint((k * k) as i64) / rint(n as i64)).ceil().to_integer();
    if raw >= BigInt::from(k) {
        k
    } else {
        usize::try_from(raw.max(BigInt::zero())).expect("cutoff below k fits usize")
    }
}

/// Lower truncation window `5 k^2 / n`.
pub fn lower_cutoff(k: usize, n: usize) -> usize {
    truncation_cutoff(&rint(5), k, n)
}

/// Upper truncation window `A k^2 / n` with the pinned `A`.
pub fn upper_cutoff(k: usize, n: usize) -> usize {
    truncation_cutoff(&truncation_a(), k, n)
}

/// Coefficient-bound constants: `0 <= a_{k,j} <= B1 C(A1 k, j)`.
/// `A1 = 148 >= 20 e^2` and `B1 = 9 >= 8 c1/c0` with the pinned Stirling
/// constants `c0 = 5/2`, `c1 = 11/4`.
pub fn coeff_bound_a1() -> u64 {
    148
}

pub fn coeff_bound_b1() -> u64 {
    9
}

/// Truncation constants: window scale `A = 2414 >= 6 e A1` and envelope
/// factor `B = 11/2 >= 1 + B1/2`; the truncated sum with window `A k^2/n`
/// captures `Q_k(n)` up to a factor of at most `B`.
pub fn truncation_a() -> Rational {
    rint(2414)
}

pub fn truncation_b() -> Rational {
    rat(11, 2)
}

/// How to evaluate the forward derivative `Q_k^(m)(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeMethod {
    /// Finite differences of directly computed `Q_k(n..n+m)`.
    Table,
    /// `E (Delta^m |Z_k|^2)(S_n)`: push the difference operator onto the
    /// integrand as an iterated lattice Laplacian.
    Laplacian,
}

/// `m`-th forward difference of `Q_k` at `n`, by either route; the two agree
/// exactly and the test suites pin that down.
pub fn q_forward_derivative(k: usize, m: usize, n: usize, method: DerivativeMethod) -> Rational {
    match method {
        DerivativeMethod::Table => {
            let mut w = WalkDistribution::with_capacity(n + m);
            let mut values = Vec::with_capacity(m + 1);
            loop {
                if w.steps() >= n {
                    values.push(q_direct_given(&w, k, ZVariant::Plain));
                }
                if w.steps() == n + m {
                    break;
                }
                w.advance();
            }
            let mut acc = Rational::zero();
            for (i, v) in values.iter().enumerate() {
                let c = Rational::from_integer(binom_integer(m as u64, i as u64));
                if (m - i).is_multiple_of(2) {
                    acc += c * v;
                } else {
                    acc -= c * v;
                }
            }
            acc
        }
        DerivativeMethod::Laplacian => {
            let u = LatticeFunction::z_norm_sqr(k);
            let d = walk_distribution(n);
            d.expect(|x, y| laplacian_power(&u, m, HalfPoint::from_integer(x, y)).re)
        }
    }
}

/// Name of the environment variable holding the default cache location.
pub const CACHE_ENV_VAR: &str = "LATTICE_GROWTH_CACHE";

const CACHE_HEADER: &str = "qgrowth-coeff-cache v1";

/// Persistent store of Newton coefficients keyed by `(k, j)`.
///
/// Entries are immutable once written: a rewrite with a different value is a
/// logic error and panics. The on-disk format is a header line followed by
/// one `k j numerator denominator` record per line; saves go through a
/// temporary file and an atomic rename.
#[derive(Clone, Debug)]
pub struct CoeffCache {
    path: Option<PathBuf>,
    entries: BTreeMap<(usize, usize), Rational>,
}

impl CoeffCache {
    /// Cache with no backing file; `save` is a no-op.
    pub fn in_memory() -> Self {
        CoeffCache { path: None, entries: BTreeMap::new() }
    }

    /// Opens (or initializes, if the file does not exist yet) a cache bound
    /// to `path`.
    pub fn load(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Ok(CoeffCache { path: Some(path), entries: BTreeMap::new() });
            }
            Err(e) => return Err(e.into()),
        };
        let fail = |reason: String| Error::CacheFormat {
            path: path.display().to_string(),
            reason,
        };
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == CACHE_HEADER => {}
            other => {
                return Err(fail(format!(
                    "expected header `{CACHE_HEADER}`, found {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let mut entries = BTreeMap::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(fail(format!("line {}: expected 4 fields", lineno + 2)));
            }
            let parse = |what: &str, s: &str| -> Result<BigInt> {
                s.parse::<BigInt>().map_err(|_| fail(format!("line {}: bad {what} `{s}`", lineno + 2)))
            };
            let k = parse("k", fields[0])?;
            let j = parse("j", fields[1])?;
            let num = parse("numerator", fields[2])?;
            let den = parse("denominator", fields[3])?;
            if den <= BigInt::zero() {
                return Err(fail(format!("line {}: nonpositive denominator", lineno + 2)));
            }
            let key = (
                usize::try_from(&k).map_err(|_| fail(format!("line {}: k out of range", lineno + 2)))?,
                usize::try_from(&j).map_err(|_| fail(format!("line {}: j out of range", lineno + 2)))?,
            );
            let value = Rational::new(num, den);
            if let Some(old) = entries.get(&key) {
                if old != &value {
                    return Err(fail(format!(
                        "conflicting records for k={} j={}",
                        key.0, key.1
                    )));
                }
            }
            entries.insert(key, value);
        }
        Ok(CoeffCache { path: Some(path), entries })
    }

    /// Cache location from `LATTICE_GROWTH_CACHE`, if set and nonempty.
    pub fn env_path() -> Option<PathBuf> {
        match std::env::var_os(CACHE_ENV_VAR) {
            Some(v) if !v.is_empty() => Some(PathBuf::from(v)),
            _ => None,
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, k: usize, j: usize) -> Option<&Rational> {
        self.entries.get(&(k, j))
    }

    pub fn insert(&mut self, k: usize, j: usize, value: Rational) {
        match self.entries.entry((k, j)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(e) => {
                assert_eq!(
                    e.get(),
                    &value,
                    "coefficient cache is immutable: (k={k}, j={j}) rewritten with a different value"
                );
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes all entries (sorted by key, so the bytes are deterministic)
    /// through a sibling temp file and an atomic rename. No-op for in-memory
    /// caches.
    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        let mut out = String::from(CACHE_HEADER);
        out.push('\n');
        for ((k, j), v) in &self.entries {
            out.push_str(&format!("{k} {j} {} {}\n", v.numer(), v.denom()));
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, out)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn difference_triangle_examples() {
        let squares: Vec<Rational> = [0, 1, 4, 9].iter().map(|&v| rint(v)).collect();
        let tri = forward_differences(&squares);
        assert_eq!(tri[0], squares);
        assert_eq!(tri[1], vec![rint(1), rint(3), rint(5)]);
        assert_eq!(tri[2], vec![rint(2), rint(2)]);
        assert_eq!(tri[3], vec![rint(0)]);

        let constant = vec![rat(7, 3); 5];
        for row in &forward_differences(&constant)[1..] {
            assert!(row.iter().all(|v| v.is_zero()));
        }

        let choose2: Vec<Rational> = (0..5u64)
            .map(|n| Rational::from_integer(binom_integer(n, 2)))
            .collect();
        let tri = forward_differences(&choose2);
        let choose1: Vec<Rational> = (0..4u64)
            .map(|n| Rational::from_integer(binom_integer(n, 1)))
            .collect();
        assert_eq!(tri[1], choose1);
    }

    #[test]
    fn q_direct_examples() {
        for n in 0..=6 {
            assert_eq!(q_direct(0, n, ZVariant::Plain), rint(1));
            assert_eq!(q_direct(0, n, ZVariant::Tilde), rint(1));
        }
        assert_eq!(q_direct(1, 5, ZVariant::Plain), rint(5));
        assert_eq!(q_direct(2, 0, ZVariant::Plain), rint(0));
    }

    #[test]
    fn coefficients_by_difference_examples() {
        assert_eq!(coeffs_by_difference(0).coeffs(), &[rint(1)]);
        assert_eq!(coeffs_by_difference(1).coeffs(), &[rint(1), rint(0)]);
        assert_eq!(coeffs_by_difference(5).coeff(1), &rint(1));
    }

    #[test]
    fn coefficients_by_recursion_examples() {
        let mut cache = CoeffCache::in_memory();
        for k in 0..=8 {
            let s = coeffs_by_recursion(k, &mut cache);
            assert_eq!(s.coeff(0), &rint(1), "a_(k,0) at k={k}");
            if k >= 1 {
                assert_eq!(s.coeff(1), &rat(k as i64 - 1, 4), "a_(k,1) at k={k}");
            }
        }
    }

    #[test]
    fn recursion_matches_difference_route() {
        let mut cache = CoeffCache::in_memory();
        for k in 0..=7 {
            let rec = coeffs_by_recursion(k, &mut cache);
            let dif = coeffs_by_difference(k);
            assert_eq!(rec, dif, "k={k}");
        }
    }

    #[test]
    fn coefficients_match_iterated_laplacian_at_origin() {
        // Third route: a_{k,j} = (Delta^(k-j) |Z_k|^2)(0).
        for k in 0..=5usize {
            let series = coeffs_by_difference(k);
            let u = LatticeFunction::z_norm_sqr(k);
            for j in 0..=k {
                let v = laplacian_power(&u, k - j, HalfPoint::origin());
                assert_eq!(&v.re, series.coeff(j), "k={k} j={j}");
                assert!(v.im.is_zero());
            }
        }
    }

    #[test]
    fn newton_evaluation_examples() {
        let s0 = coeffs_by_difference(0);
        for n in [0, 3, 17] {
            assert_eq!(q_newton(&s0, n), rint(1));
        }
        let s1 = coeffs_by_difference(1);
        for n in 0..8 {
            assert_eq!(q_newton(&s1, n), rint(n as i64));
        }
        let s3 = coeffs_by_difference(3);
        assert_eq!(q_newton(&s3, 7), q_direct(3, 7, ZVariant::Plain));
    }

    #[test]
    fn truncated_sums() {
        let mut cache = CoeffCache::in_memory();
        let s = coeffs_by_recursion(4, &mut cache);
        for n in [1usize, 4, 16] {
            assert_eq!(q_truncated(&s, n, 4), q_newton(&s, n));
            assert_eq!(
                q_truncated(&s, n, 0),
                Rational::from_integer(binom_integer(n as u64, 4))
            );
            let mut prev = Rational::zero();
            for jmax in 0..=4 {
                let v = q_truncated(&s, n, jmax);
                assert!(v >= prev, "monotone in jmax");
                prev = v;
            }
        }
    }

    #[test]
    fn truncation_cutoffs() {
        assert_eq!(lower_cutoff(4, 16), 4); // ceil(80/16) = 5, capped at k
        assert_eq!(lower_cutoff(4, 100), 1);
        assert_eq!(upper_cutoff(10, 1_000_000), 1);
        assert_eq!(upper_cutoff(10, 10), 10);
        assert_eq!(truncation_cutoff(&rat(1, 2), 6, 9), 2);
    }

    #[test]
    fn pinned_constants_dominate_their_lower_bounds() {
        use crate::exact::{e_upper, stirling_c0, stirling_c1};
        // A1 >= 20 e^2, B1 >= 8 c1/c0, A >= 6 e A1, B >= 1 + B1/2.
        let e_up = e_upper();
        assert!(rint(coeff_bound_a1() as i64) >= rint(20) * &e_up * &e_up);
        assert!(rint(coeff_bound_b1() as i64) >= rint(8) * stirling_c1() / stirling_c0());
        assert!(truncation_a() >= rint(6) * &e_up * rint(coeff_bound_a1() as i64));
        assert!(truncation_b() >= rint(1) + rint(coeff_bound_b1() as i64) / rint(2));
    }

    #[test]
    fn forward_derivative_examples() {
        for n in 0..=4 {
            assert_eq!(
                q_forward_derivative(1, 1, n, DerivativeMethod::Table),
                rint(1)
            );
            assert_eq!(
                q_forward_derivative(0, 2, n, DerivativeMethod::Laplacian),
                rint(0)
            );
        }
        for k in 0..=5 {
            assert_eq!(
                q_forward_derivative(k, k, 0, DerivativeMethod::Table),
                rint(1),
                "k={k}"
            );
        }
    }

    #[test]
    fn derivative_methods_agree() {
        for k in 0..=3usize {
            for m in 0..=2usize {
                for n in 0..=3usize {
                    assert_eq!(
                        q_forward_derivative(k, m, n, DerivativeMethod::Table),
                        q_forward_derivative(k, m, n, DerivativeMethod::Laplacian),
                        "k={k} m={m} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("coeffs.cache");
        let mut cache = CoeffCache::load(&path).unwrap();
        assert!(cache.is_empty());
        let series = coeffs_by_recursion(6, &mut cache);
        cache.save().unwrap();

        let mut reloaded = CoeffCache::load(&path).unwrap();
        assert_eq!(reloaded.len(), cache.len());
        let series2 = coeffs_by_recursion(6, &mut reloaded);
        assert_eq!(series, series2);
        // A fully cached run never touches a walk; spot-check a value too.
        assert_eq!(reloaded.get(6, 1), Some(&rat(5, 4)));

        // Saved bytes are stable.
        let bytes1 = std::fs::read(&path).unwrap();
        reloaded.save().unwrap();
        assert_eq!(bytes1, std::fs::read(&path).unwrap());
    }

    #[test]
    fn cache_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let bad_header = dir.path().join("bad_header");
        std::fs::write(&bad_header, "not a cache\n0 0 1 1\n").unwrap();
        assert!(matches!(CoeffCache::load(&bad_header), Err(Error::CacheFormat { .. })));

        let bad_fields = dir.path().join("bad_fields");
        std::fs::write(&bad_fields, format!("{CACHE_HEADER}\n0 0 1\n")).unwrap();
        assert!(matches!(CoeffCache::load(&bad_fields), Err(Error::CacheFormat { .. })));

        let bad_den = dir.path().join("bad_den");
        std::fs::write(&bad_den, format!("{CACHE_HEADER}\n0 0 1 0\n")).unwrap();
        assert!(matches!(CoeffCache::load(&bad_den), Err(Error::CacheFormat { .. })));

        let conflict = dir.path().join("conflict");
        std::fs::write(&conflict, format!("{CACHE_HEADER}\n1 1 0 1\n1 1 1 1\n")).unwrap();
        assert!(matches!(CoeffCache::load(&conflict), Err(Error::CacheFormat { .. })));
    }

    #[test]
    #[should_panic(expected = "immutable")]
    fn cache_insert_conflict_panics() {
        let mut cache = CoeffCache::in_memory();
        cache.insert(2, 1, rat(1, 4));
        cache.insert(2, 1, rat(1, 4)); // idempotent re-insert is fine
        cache.insert(2, 1, rat(1, 2));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn newton_matches_direct(k in 0usize..5, n in 0usize..9) {
            let series = coeffs_by_difference(k);
            prop_assert_eq!(q_newton(&series, n), q_direct(k, n, ZVariant::Plain));
        }

        #[test]
        fn triangle_reconstructs_values(len in 1usize..7, seed in 0i64..1000) {
            // Newton interpolation inverts the triangle:
            // f(n) = sum_j f^(j)(0) C(n, j).
            let values: Vec<Rational> =
                (0..len).map(|i| rat(seed.wrapping_mul(i as i64 + 3) % 50, 7)).collect();
            let tri = forward_differences(&values);
            for (n, expected) in values.iter().enumerate() {
                let mut acc = Rational::zero();
                for (j, row) in tri.iter().enumerate().take(n + 1) {
                    acc += &row[0]
                        * Rational::from_integer(binom_integer(n as u64, j as u64));
                }
                prop_assert_eq!(acc, expected.clone());
            }
        }
    }
}
