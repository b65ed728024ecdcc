//! Exact identity checks: both sides are rational and the only acceptable
//! margin is literally zero.

use num_traits::Zero;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{rng_range, CheckReport, CheckVerdict, Margin, ParamReader, Params, ReportBuilder};
use crate::error::Result;
use crate::exact::{binom_general, rat, rint, Rational};
use crate::growth::{
    coeffs_by_difference, coeffs_by_recursion, q_forward_derivative, CoeffCache, DerivativeMethod,
};
use crate::lattice::{
    eval_z, iterated_partial, laplacian, laplacian_power, partial, Direction, GaussianRational,
    HalfPoint, LatticeFunction,
};
use crate::model::{head_sum, tail_sum, vandermonde_sum};

fn residual_size(g: &GaussianRational) -> Rational {
    let abs = |q: &Rational| if q < &Rational::zero() { -q.clone() } else { q.clone() };
    abs(&g.re) + abs(&g.im)
}

/// `Z_k` is harmonic: the lattice Laplacian vanishes at every point of the
/// half-integer window `|x|, |y| <= radius/2`.
pub(super) fn harmonicity(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new("harmonicity", params, &["k_max", "radius"])?;
    let k_max = reader.usize("k_max", 6)?;
    let radius = reader.usize("radius", 6)? as i64;

    let mut rb = ReportBuilder::new("harmonicity");
    rb.param("k_max", k_max);
    rb.param("radius", radius);

    let mut worst = Rational::zero();
    for k in 0..=k_max {
        let zk = LatticeFunction::z(k);
        for x2 in -radius..=radius {
            for y2 in -radius..=radius {
                let p = HalfPoint::from_doubled(x2, y2);
                let lap = laplacian(&zk, p);
                if !lap.is_zero() {
                    rb.witness(&[
                        ("k", k.to_string()),
                        ("x2", x2.to_string()),
                        ("y2", y2.to_string()),
                        ("residual_re", lap.re.to_string()),
                        ("residual_im", lap.im.to_string()),
                    ]);
                    let size = residual_size(&lap);
                    if size > worst {
                        worst = size;
                    }
                }
            }
        }
    }

    let verdict = if worst.is_zero() { CheckVerdict::Pass } else { CheckVerdict::Fail };
    Ok(rb.finish(verdict, Margin::exact(&-worst)))
}

/// Differencing drops the degree by one and shifts by half a step:
/// `(d_s Z_k)(p) = unit(s) * Z_{k-1}(p + s/2)` with the unimodular direction
/// factor `unit(E), unit(W), unit(N), unit(S) = 1, -1, i, -i`, hence also
/// `|d_s Z_k|^2(p) = |Z_{k-1}|^2(p + s/2)`.  Both forms are asserted.
pub(super) fn shift_identity(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new("shift_identity", params, &["k_max", "radius"])?;
    let k_max = reader.usize("k_max", 6)?;
    let radius = reader.usize("radius", 6)? as i64;

    let mut rb = ReportBuilder::new("shift_identity");
    rb.param("k_max", k_max);
    rb.param("radius", radius);

    let mut worst = Rational::zero();
    for k in 1..=k_max {
        let zk = LatticeFunction::z(k);
        for s in Direction::ALL {
            for x2 in -radius..=radius {
                for y2 in -radius..=radius {
                    let p = HalfPoint::from_doubled(x2, y2);
                    let lhs = partial(&zk, s, p);
                    let rhs = s.unit_complex() * eval_z(k - 1, p.half_step(s));
                    let exact_gap = lhs.clone() - rhs;
                    let modulus_gap = lhs.norm_sqr() - eval_z(k - 1, p.half_step(s)).norm_sqr();
                    if !exact_gap.is_zero() || !modulus_gap.is_zero() {
                        rb.witness(&[
                            ("k", k.to_string()),
                            ("direction", format!("{s:?}")),
                            ("x2", x2.to_string()),
                            ("y2", y2.to_string()),
                        ]);
                        let size = residual_size(&exact_gap)
                            + if modulus_gap < Rational::zero() { -modulus_gap } else { modulus_gap };
                        if size > worst {
                            worst = size;
                        }
                    }
                }
            }
        }
    }

    let verdict = if worst.is_zero() { CheckVerdict::Pass } else { CheckVerdict::Fail };
    Ok(rb.finish(verdict, Margin::exact(&-worst)))
}

/// For harmonic `f`, iterated Laplacians of `|f|^2` at the origin expand into
/// a mean of squared iterated partials:
/// `Delta^l |f|^2 (0) = 4^{-l} sum over (s_1..s_l) of |d_{s_1}..d_{s_l} f|^2(0)`.
pub(super) fn laplace_power_identity(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new("laplace_power_identity", params, &["k_max", "l_max"])?;
    let k_max = reader.usize("k_max", 4)?;
    let l_max = reader.usize("l_max", 3)?;

    let mut rb = ReportBuilder::new("laplace_power_identity");
    rb.param("k_max", k_max);
    rb.param("l_max", l_max);

    let origin = HalfPoint::origin();
    let mut worst = Rational::zero();
    for k in 0..=k_max {
        let zk = LatticeFunction::z(k);
        let nsq = LatticeFunction::z_norm_sqr(k);
        for l in 0..=l_max {
            let lhs = laplacian_power(&nsq, l, origin);

            let mut sum = Rational::zero();
            let mut dirs = vec![Direction::East; l];
            for code in 0..4usize.pow(l as u32) {
                let mut c = code;
                for slot in dirs.iter_mut() {
                    *slot = Direction::ALL[c % 4];
                    c /= 4;
                }
                sum += iterated_partial(&zk, &dirs, origin).norm_sqr();
            }
            let rhs = sum / Rational::from_integer(num_bigint::BigInt::from(4).pow(l as u32));

            let diff = lhs.re.clone() - rhs;
            let size = {
                let abs_diff = if diff < Rational::zero() { -diff.clone() } else { diff.clone() };
                let abs_im = if lhs.im < Rational::zero() { -lhs.im.clone() } else { lhs.im.clone() };
                abs_diff + abs_im
            };
            if !size.is_zero() {
                rb.witness(&[
                    ("k", k.to_string()),
                    ("l", l.to_string()),
                    ("gap", diff.to_string()),
                ]);
                if size > worst {
                    worst = size;
                }
            }
        }
    }

    let verdict = if worst.is_zero() { CheckVerdict::Pass } else { CheckVerdict::Fail };
    Ok(rb.finish(verdict, Margin::exact(&-worst)))
}

/// Forward derivatives of `Q_k` computed two ways agree: finite differences of
/// the value table versus the expectation of the iterated Laplacian of
/// `|Z_k|^2`.  At `n = 0` the derivatives are the Newton coefficients, so the
/// coefficient extraction is pinned against the Laplacian route as well.
pub(super) fn derivative_laplacian(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new("derivative_laplacian", params, &["k_max", "m_max", "n_max"])?;
    let k_max = reader.usize("k_max", 4)?;
    let m_max = reader.usize("m_max", 3)?;
    let n_max = reader.usize("n_max", 5)?;

    let mut rb = ReportBuilder::new("derivative_laplacian");
    rb.param("k_max", k_max);
    rb.param("m_max", m_max);
    rb.param("n_max", n_max);

    let mut worst = Rational::zero();
    let note = |rb: &mut ReportBuilder, worst: &mut Rational, entries: &[(&str, String)], gap: Rational| {
        if !gap.is_zero() {
            rb.witness(entries);
            let size = if gap < Rational::zero() { -gap } else { gap };
            if size > *worst {
                *worst = size;
            }
        }
    };

    for k in 0..=k_max {
        for m in 0..=m_max {
            for n in 0..=n_max {
                let table = q_forward_derivative(k, m, n, DerivativeMethod::Table);
                let lap = q_forward_derivative(k, m, n, DerivativeMethod::Laplacian);
                note(
                    &mut rb,
                    &mut worst,
                    &[
                        ("k", k.to_string()),
                        ("m", m.to_string()),
                        ("n", n.to_string()),
                        ("table", table.to_string()),
                        ("laplacian", lap.to_string()),
                    ],
                    table - lap,
                );
            }
        }

        let coeffs = coeffs_by_difference(k);
        let nsq = LatticeFunction::z_norm_sqr(k);
        for j in 0..=k {
            let lap = laplacian_power(&nsq, k - j, HalfPoint::origin());
            note(
                &mut rb,
                &mut worst,
                &[
                    ("k", k.to_string()),
                    ("j", j.to_string()),
                    ("coefficient", coeffs.coeff(j).to_string()),
                    ("laplacian", lap.re.to_string()),
                ],
                coeffs.coeff(j) - lap.re,
            );
        }
    }

    let verdict = if worst.is_zero() { CheckVerdict::Pass } else { CheckVerdict::Fail };
    Ok(rb.finish(verdict, Margin::exact(&-worst)))
}

/// The difference and recursion coefficient extractions agree exactly, and
/// the closed forms `a_{k,0} = 1`, `a_{k,1} = (k-1)/4` hold.
pub(super) fn recursion(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new("recursion", params, &["k", "k_max"])?;
    let ks: Vec<usize> = match reader.opt_usize("k")? {
        Some(k) => vec![k],
        None => (0..=reader.usize("k_max", 8)?).collect(),
    };

    let mut rb = ReportBuilder::new("recursion");
    match ks.as_slice() {
        [k] if params.contains_key("k") => rb.param("k", k),
        _ => rb.param("k_max", ks.last().copied().unwrap_or(0)),
    }

    let mut cache = CoeffCache::in_memory();
    let mut worst = Rational::zero();
    for &k in &ks {
        let by_difference = coeffs_by_difference(k);
        let by_recursion = coeffs_by_recursion(k, &mut cache);
        for j in 0..=k {
            let gap = by_difference.coeff(j) - by_recursion.coeff(j);
            let expected = match j {
                0 => Some(rint(1)),
                1 => Some(rat(k as i64 - 1, 4)),
                _ => None,
            };
            let closed_gap = expected
                .map(|e| by_recursion.coeff(j) - e)
                .unwrap_or_else(Rational::zero);
            if !gap.is_zero() || !closed_gap.is_zero() {
                rb.witness(&[
                    ("k", k.to_string()),
                    ("j", j.to_string()),
                    ("difference", by_difference.coeff(j).to_string()),
                    ("recursion", by_recursion.coeff(j).to_string()),
                ]);
                let abs = |q: Rational| if q < Rational::zero() { -q } else { q };
                let size = abs(gap) + abs(closed_gap);
                if size > worst {
                    worst = size;
                }
            }
        }
    }

    let verdict = if worst.is_zero() { CheckVerdict::Pass } else { CheckVerdict::Fail };
    Ok(rb.finish(verdict, Margin::exact(&-worst)))
}

/// Convenience wrapper matching the library-level operation: consistency of
/// the two coefficient extractions at one `k`.
pub fn check_recursion_consistency(k: usize) -> Result<CheckReport> {
    let mut params = Params::new();
    params.insert("k".into(), k.to_string());
    recursion(&params)
}

/// Vandermonde convolution for rational upper arguments:
/// `C(a+b, k) = sum_j C(a, k-j) C(b, j)`, plus the head/tail partition of the
/// same sum.  Runs fixed cases and seeded random rational instances.
pub(super) fn vandermonde(params: &Params) -> Result<CheckReport> {
    let reader = ParamReader::new("vandermonde", params, &["samples", "k_max", "seed"])?;
    let samples = reader.usize("samples", 100)?;
    let k_max = reader.usize("k_max", 8)?;
    let seed = reader.u64("seed", 1)?;

    let mut rb = ReportBuilder::new("vandermonde");
    rb.param("samples", samples);
    rb.param("k_max", k_max);
    rb.param("seed", seed);

    let mut worst = Rational::zero();
    let check_instance = |rb: &mut ReportBuilder, worst: &mut Rational, a: Rational, b: Rational, k: usize, split: usize| {
        let total = vandermonde_sum(&a, &b, k);
        let direct = binom_general(&(a.clone() + b.clone()), k);
        let partition = head_sum(&a, &b, k, split) + tail_sum(&a, &b, k, split + 1);
        let gap = total.clone() - direct;
        let partition_gap = total - partition;
        if !gap.is_zero() || !partition_gap.is_zero() {
            rb.witness(&[
                ("a", a.to_string()),
                ("b", b.to_string()),
                ("k", k.to_string()),
                ("identity_gap", gap.to_string()),
                ("partition_gap", partition_gap.to_string()),
            ]);
            let abs = |q: Rational| if q < Rational::zero() { -q } else { q };
            let size = abs(gap) + abs(partition_gap);
            if size > *worst {
                *worst = size;
            }
        }
    };

    check_instance(&mut rb, &mut worst, rint(3), rint(2), 2, 1);
    check_instance(&mut rb, &mut worst, rat(7, 2), rat(1, 2), 1, 0);
    check_instance(&mut rb, &mut worst, rat(11, 3), Rational::zero(), 4, 2);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let a = rat(rng_range(&mut rng, -40, 40), rng_range(&mut rng, 1, 12));
        let b = rat(rng_range(&mut rng, -40, 40), rng_range(&mut rng, 1, 12));
        let k = rng_range(&mut rng, 0, k_max as i64) as usize;
        let split = rng_range(&mut rng, 0, k as i64) as usize;
        check_instance(&mut rb, &mut worst, a, b, k, split);
    }

    let verdict = if worst.is_zero() { CheckVerdict::Pass } else { CheckVerdict::Fail };
    Ok(rb.finish(verdict, Margin::exact(&-worst)))
}

#[cfg(test)]
mod tests {
    use super::super::{run_check, CheckVerdict, Margin, Params};
    use super::*;

    fn p(entries: &[(&str, &str)]) -> Params {
        entries.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn assert_clean_pass(report: &CheckReport) {
        assert_eq!(report.verdict, CheckVerdict::Pass, "{report:?}");
        assert_eq!(report.margin, Margin::zero());
        assert!(report.witnesses.is_empty());
    }

    #[test]
    fn harmonicity_passes_with_zero_margin() {
        let report = run_check("harmonicity", &p(&[("k_max", "8"), ("radius", "8")])).unwrap();
        assert_clean_pass(&report);
        assert_eq!(report.params.get("k_max").unwrap(), "8");
    }

    #[test]
    fn shift_identity_passes() {
        let report = run_check("shift_identity", &p(&[("k_max", "5"), ("radius", "5")])).unwrap();
        assert_clean_pass(&report);
    }

    #[test]
    fn laplace_power_identity_passes() {
        let report =
            run_check("laplace_power_identity", &p(&[("k_max", "3"), ("l_max", "2")])).unwrap();
        assert_clean_pass(&report);
    }

    #[test]
    fn derivative_laplacian_passes() {
        let report = run_check(
            "derivative_laplacian",
            &p(&[("k_max", "2"), ("m_max", "2"), ("n_max", "2")]),
        )
        .unwrap();
        assert_clean_pass(&report);
    }

    #[test]
    fn recursion_passes_for_trivial_and_small_k() {
        let trivial = check_recursion_consistency(0).unwrap();
        assert_clean_pass(&trivial);
        assert_eq!(trivial.params.get("k").unwrap(), "0");

        let k6 = check_recursion_consistency(6).unwrap();
        assert_clean_pass(&k6);

        let grid = run_check("recursion", &p(&[("k_max", "5")])).unwrap();
        assert_clean_pass(&grid);
        assert_eq!(grid.params.get("k_max").unwrap(), "5");
    }

    #[test]
    fn vandermonde_passes_on_random_rationals() {
        let report = run_check(
            "vandermonde",
            &p(&[("samples", "50"), ("k_max", "8"), ("seed", "1")]),
        )
        .unwrap();
        assert_clean_pass(&report);
    }
}
