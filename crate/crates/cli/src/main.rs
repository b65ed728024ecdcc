//! `qgrowth`: exact evaluation, coefficient extraction, verification, and
//! the sharpness search, from one binary.
//!
//! Exit codes: 0 success/PASS, 1 FAIL, 2 usage or configuration error,
//! 3 INCONCLUSIVE at the precision ceiling.

mod emit;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;

use emit::{echo_config, emit_record, emit_reports, emit_scalar, verdict_exit, write_rows, Format};
use qgrowth::checks::{
    aggregate_verdict, default_params, run_all, run_check, sharpness_search, CheckReport, Level,
    Params, CHECK_IDS,
};
use qgrowth::exact::{binom_general, decimal_to_rational, parse_rational, rat, rint, Rational};
use qgrowth::growth::{coeffs_by_difference, coeffs_by_recursion, q_direct, q_newton, CoeffCache};
use qgrowth::lattice::ZVariant;
use qgrowth::walk::walk_distribution;

const DEFAULT_CACHE: &str = ".lattice-growth/coeffs.txt";

#[derive(Parser)]
#[command(
    name = "qgrowth",
    version,
    about = "Exact L^2 growth of discrete harmonic functions on the square lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Output format (walk and coeffs default to csv, everything else to table).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Coefficient cache file; overrides LATTICE_GROWTH_CACHE and the local default.
    #[arg(long, global = true, value_name = "FILE")]
    cache: Option<PathBuf>,
    /// Worker threads for grid evaluations; ordering of results is unaffected.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Report real elapsed times (off by default so reruns are byte-identical).
    #[arg(long, global = true)]
    timings: bool,
}

// The `Verify` variant carries every override flag and dwarfs the others; the
// enum is built once per process, so boxing would only add noise.
#[allow(clippy::large_enum_variant)]
#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the one-dimensional factor F_k at a rational point.
    Fk {
        #[arg(long)]
        k: usize,
        /// Argument as p/q (integers and halves included).
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Evaluate the harmonic polynomial Z_k (or its integer-lattice rescaling).
    Zk {
        #[arg(long)]
        k: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        /// Evaluate 2^k Z_k(x/2, y/2) instead.
        #[arg(long)]
        tilde: bool,
    },
    /// Exact n-step walk distribution as x,y,count rows.
    Walk {
        #[arg(long)]
        n: usize,
        /// Write the rows to a file instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// The growth value Q_k(n), by direct expectation or the Newton form.
    Qk {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        method: QkMethod,
        /// Use the integer-lattice rescaling (direct method only).
        #[arg(long)]
        tilde: bool,
    },
    /// Newton coefficients of Q_k as k,j,numerator,denominator rows.
    Coeffs {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        method: CoeffMethod,
    },
    /// The binomial model f_{k,alpha} at the three-circles scales n, 2n, 4n.
    Model {
        #[arg(long)]
        k: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        n: u64,
        /// Also print the log-convexity and decay ratios.
        #[arg(long)]
        ratios: bool,
    },
    /// Run one registered check (or `all`) and emit its report.
    Verify {
        /// A check id from the registry, or `all`.
        check: String,
        /// Parameter preset: quick or full.
        #[arg(long, default_value = "quick")]
        level: String,
        /// Override a check parameter (repeatable).
        #[arg(long = "param", value_name = "KEY=VALUE", allow_hyphen_values = true)]
        param: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        #[arg(long)]
        precision: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        samples: Option<String>,
    },
    /// Search a (k, n) grid for certified three-circles sharpness witnesses.
    Sharpness {
        /// Coefficient in front of the geometric mean, as p/q.
        #[arg(long = "A", allow_hyphen_values = true)]
        a: String,
        /// Exponent offset: the error term is 2^(-n^(1/2 + epsilon)).
        #[arg(long, allow_hyphen_values = true)]
        epsilon: String,
        #[arg(long)]
        k_min: usize,
        #[arg(long)]
        k_max: usize,
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        /// Starting interval precision in bits.
        #[arg(long, value_name = "BITS", default_value_t = 128)]
        precision: u32,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QkMethod {
    Direct,
    Newton,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoeffMethod {
    Difference,
    Recursion,
    Both,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and succeed; anything else is
            // a usage error.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(message) => {
            eprintln!("error: {message}");
            std::process::exit(2);
        }
    }
}

/// `p/q`, integer, or decimal.
fn rational_arg(name: &str, s: &str) -> Result<Rational, String> {
    parse_rational(s)
        .or_else(|_| decimal_to_rational(s))
        .map_err(|_| format!("--{name}: expected a rational like 3/4, got `{s}`"))
}

/// `F_k(x) = C(x + (k-1)/2, k)` for arbitrary rational `x`.
fn f_general(k: usize, x: &Rational) -> Rational {
    binom_general(&(x + rat(k as i64 - 1, 2)), k)
}

/// `Z_k(x, y) = sum_l i^l F_{k-l}(x) F_l(y)` as (re, im), for arbitrary
/// rational arguments.
fn z_general(k: usize, x: &Rational, y: &Rational) -> (Rational, Rational) {
    let (mut re, mut im) = (Rational::zero(), Rational::zero());
    for l in 0..=k {
        let term = f_general(k - l, x) * f_general(l, y);
        match l % 4 {
            0 => re += term,
            1 => im += term,
            2 => re -= term,
            _ => im -= term,
        }
    }
    (re, im)
}

fn resolve_cache(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(CoeffCache::env_path)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE))
}

fn open_cache(path: &Path) -> Result<CoeffCache, String> {
    CoeffCache::load(path.to_path_buf()).map_err(|e| e.to_string())
}

fn save_cache(cache: &CoeffCache) -> Result<(), String> {
    if let Some(parent) = cache.path().and_then(|p| p.parent()) {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| e.to_string())?;
        }
    }
    cache.save().map_err(|e| e.to_string())
}

/// Result note on the echo channel (stderr under JSON, stdout otherwise).
fn note(format: Format, message: &str) {
    match format {
        Format::Json => eprintln!("# {message}"),
        Format::Table | Format::Csv => println!("# {message}"),
    }
}

fn run(cli: Cli) -> Result<i32, String> {
    let jobs = cli.jobs.map_or("auto".to_string(), |j| j.to_string());
    let timings = cli.timings;
    let base: Vec<(&str, String)> = vec![
        ("jobs", jobs),
        ("timings", if timings { "on".into() } else { "off".into() }),
    ];
    let fmt_or = |preferred: Format| cli.format.unwrap_or(preferred);

    match &cli.command {
        Cmd::Fk { k, x } => {
            let format = fmt_or(Format::Table);
            let x = rational_arg("x", x)?;
            let mut entries = vec![("k", k.to_string()), ("x", x.to_string())];
            entries.extend(base);
            echo_config(format, "fk", &entries);
            let value = f_general(*k, &x);
            emit_scalar(
                format,
                &[("k", k.to_string()), ("x", x.to_string())],
                &value.to_string(),
            );
            Ok(0)
        }
        Cmd::Zk { k, x, y, tilde } => {
            let format = fmt_or(Format::Table);
            let x = rational_arg("x", x)?;
            let y = rational_arg("y", y)?;
            let mut entries = vec![
                ("k", k.to_string()),
                ("x", x.to_string()),
                ("y", y.to_string()),
                ("tilde", tilde.to_string()),
            ];
            entries.extend(base);
            echo_config(format, "zk", &entries);
            let (re, im) = if *tilde {
                let (re, im) = z_general(*k, &(&x / rint(2)), &(&y / rint(2)));
                let scale: Rational = (0..*k).map(|_| rint(2)).product();
                (re * &scale, im * scale)
            } else {
                z_general(*k, &x, &y)
            };
            emit_record(
                format,
                &[
                    ("k", k.to_string()),
                    ("x", x.to_string()),
                    ("y", y.to_string()),
                    ("tilde", tilde.to_string()),
                ],
                &[("re", re.to_string()), ("im", im.to_string())],
            );
            Ok(0)
        }
        Cmd::Walk { n, out } => {
            let format = fmt_or(Format::Csv);
            let mut entries = vec![("n", n.to_string())];
            if let Some(path) = out {
                entries.push(("out", path.display().to_string()));
            }
            entries.extend(base);
            echo_config(format, "walk", &entries);
            let w = walk_distribution(*n);
            let m = *n as i64;
            let mut rows = Vec::new();
            for x in -m..=m {
                for y in -m..=m {
                    let c = w.count(x, y);
                    if !c.is_zero() {
                        rows.push(vec![x.to_string(), y.to_string(), c.to_string()]);
                    }
                }
            }
            let header = ["x", "y", "count"];
            match out {
                Some(path) => {
                    let mut file = std::fs::File::create(path).map_err(|e| e.to_string())?;
                    write_rows(&mut file, format, &header, &rows).map_err(|e| e.to_string())?;
                    note(format, &format!("wrote {} ({} rows)", path.display(), rows.len()));
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    write_rows(&mut stdout, format, &header, &rows).map_err(|e| e.to_string())?;
                }
            }
            Ok(0)
        }
        Cmd::Qk { k, n, method, tilde } => {
            let format = fmt_or(Format::Table);
            if *tilde && *method == QkMethod::Newton {
                return Err("--tilde requires --method direct".into());
            }
            let method_name = match method {
                QkMethod::Direct => "direct",
                QkMethod::Newton => "newton",
            };
            let mut entries = vec![
                ("k", k.to_string()),
                ("n", n.to_string()),
                ("method", method_name.to_string()),
                ("tilde", tilde.to_string()),
            ];
            let value = match method {
                QkMethod::Direct => {
                    let variant = if *tilde { ZVariant::Tilde } else { ZVariant::Plain };
                    entries.extend(base);
                    echo_config(format, "qk", &entries);
                    q_direct(*k, *n, variant)
                }
                QkMethod::Newton => {
                    let path = resolve_cache(&cli.cache);
                    entries.push(("cache", path.display().to_string()));
                    entries.extend(base);
                    echo_config(format, "qk", &entries);
                    let mut cache = open_cache(&path)?;
                    let series = coeffs_by_recursion(*k, &mut cache);
                    save_cache(&cache)?;
                    q_newton(&series, *n)
                }
            };
            emit_scalar(
                format,
                &[
                    ("k", k.to_string()),
                    ("n", n.to_string()),
                    ("method", method_name.to_string()),
                    ("tilde", tilde.to_string()),
                ],
                &value.to_string(),
            );
            Ok(0)
        }
        Cmd::Coeffs { k, method } => {
            let format = fmt_or(Format::Csv);
            let method_name = match method {
                CoeffMethod::Difference => "difference",
                CoeffMethod::Recursion => "recursion",
                CoeffMethod::Both => "both",
            };
            let mut entries = vec![("k", k.to_string()), ("method", method_name.to_string())];
            let series = match method {
                CoeffMethod::Difference => {
                    entries.extend(base);
                    echo_config(format, "coeffs", &entries);
                    coeffs_by_difference(*k)
                }
                CoeffMethod::Recursion | CoeffMethod::Both => {
                    let path = resolve_cache(&cli.cache);
                    entries.push(("cache", path.display().to_string()));
                    entries.extend(base);
                    echo_config(format, "coeffs", &entries);
                    let mut cache = open_cache(&path)?;
                    let series = coeffs_by_recursion(*k, &mut cache);
                    save_cache(&cache)?;
                    if *method == CoeffMethod::Both {
                        let other = coeffs_by_difference(*k);
                        if other.coeffs() != series.coeffs() {
                            eprintln!(
                                "FAIL: difference and recursion coefficients disagree at k = {k}"
                            );
                            return Ok(1);
                        }
                        note(format, "difference and recursion routes agree");
                    }
                    series
                }
            };
            let rows: Vec<Vec<String>> = series
                .coeffs()
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    vec![
                        k.to_string(),
                        j.to_string(),
                        a.numer().to_string(),
                        a.denom().to_string(),
                    ]
                })
                .collect();
            let mut stdout = std::io::stdout().lock();
            write_rows(&mut stdout, format, &["k", "j", "numerator", "denominator"], &rows)
                .map_err(|e| e.to_string())?;
            Ok(0)
        }
        Cmd::Model { k, alpha, n, ratios } => {
            let format = fmt_or(Format::Table);
            let alpha = rational_arg("alpha", alpha)?;
            let mut entries = vec![
                ("k", k.to_string()),
                ("alpha", alpha.to_string()),
                ("n", n.to_string()),
                ("ratios", ratios.to_string()),
            ];
            entries.extend(base);
            echo_config(format, "model", &entries);
            let params =
                qgrowth::model::ModelParams::new(*k, alpha.clone()).map_err(|e| e.to_string())?;
            let at = |m: u64| qgrowth::model::f_model(&params, &rint(m as i64));
            let (f_n, f_2n, f_4n) = (at(*n), at(2 * n), at(4 * n));
            let mut outputs = vec![
                ("f_n", f_n.to_string()),
                ("f_2n", f_2n.to_string()),
                ("f_4n", f_4n.to_string()),
            ];
            if *ratios {
                let pair =
                    qgrowth::model::ratios(&f_n, &f_2n, &f_4n).map_err(|e| e.to_string())?;
                outputs.push(("logconv", pair.logconv.to_string()));
                outputs.push(("decay", pair.decay.to_string()));
            }
            emit_record(
                format,
                &[
                    ("k", k.to_string()),
                    ("alpha", alpha.to_string()),
                    ("n", n.to_string()),
                ],
                &outputs,
            );
            Ok(0)
        }
        Cmd::Verify {
            check,
            level,
            param,
            k,
            n,
            a,
            b,
            alpha,
            eps,
            c,
            precision,
            seed,
            samples,
        } => {
            let format = fmt_or(Format::Table);
            let level: Level = level
                .parse()
                .map_err(|_| format!("--level: expected quick or full, got `{level}`"))?;
            let named: Vec<(&str, &Option<String>)> = vec![
                ("k", k),
                ("n", n),
                ("a", a),
                ("b", b),
                ("alpha", alpha),
                ("eps", eps),
                ("c", c),
                ("precision", precision),
                ("seed", seed),
                ("samples", samples),
            ];
            let mut overrides = Params::new();
            for entry in param {
                let (key, value) = entry
                    .split_once('=')
                    .ok_or_else(|| format!("--param: expected KEY=VALUE, got `{entry}`"))?;
                overrides.insert(key.trim().to_string(), value.trim().to_string());
            }
            for (key, value) in named {
                if let Some(v) = value {
                    overrides.insert(key.to_string(), v.clone());
                }
            }

            let mut entries = vec![("check", check.clone()), ("level", level.to_string())];
            for (key, value) in &overrides {
                entries.push(("override", format!("{key}={value}")));
            }
            entries.extend(base);
            echo_config(format, "verify", &entries);

            let mut reports: Vec<CheckReport> = if check == "all" {
                if !overrides.is_empty() {
                    return Err(
                        "parameter overrides apply to a single check, not `all`".into()
                    );
                }
                run_all(level).map_err(|e| e.to_string())?
            } else {
                if !CHECK_IDS.contains(&check.as_str()) {
                    return Err(format!(
                        "unknown check `{check}`; known: {}",
                        CHECK_IDS.join(", ")
                    ));
                }
                let mut params = default_params(check, level);
                params.extend(overrides);
                vec![run_check(check, &params).map_err(|e| e.to_string())?]
            };
            if !timings {
                for r in &mut reports {
                    r.elapsed_ms = 0;
                }
            }
            emit_reports(format, &reports);
            Ok(verdict_exit(aggregate_verdict(&reports)))
        }
        Cmd::Sharpness {
            a,
            epsilon,
            k_min,
            k_max,
            n_min,
            n_max,
            precision,
        } => {
            let format = fmt_or(Format::Table);
            let a = rational_arg("A", a)?;
            let eps = rational_arg("epsilon", epsilon)?;
            let mut entries = vec![
                ("A", a.to_string()),
                ("epsilon", eps.to_string()),
                ("k_min", k_min.to_string()),
                ("k_max", k_max.to_string()),
                ("n_min", n_min.to_string()),
                ("n_max", n_max.to_string()),
                ("precision", precision.to_string()),
            ];
            entries.extend(base);
            echo_config(format, "sharpness", &entries);
            let mut report =
                sharpness_search(&a, &eps, *k_min, *k_max, *n_min, *n_max, *precision)
                    .map_err(|e| e.to_string())?;
            if !timings {
                report.elapsed_ms = 0;
            }
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("search report serializes")
                ),
                Format::Table | Format::Csv => {
                    note(format, &format!("cells: {}", report.cells));
                    note(format, &format!("witnesses: {}", report.witnesses.len()));
                    match &report.best_a {
                        Some(best) => note(
                            format,
                            &format!(
                                "best certified A in [{}, {}] at (k, n) = ({}, {}) ({} bits)",
                                best.lo, best.hi, best.k, best.n, best.precision
                            ),
                        ),
                        None => note(format, "best certified A: none (no positive cells)"),
                    }
                    let rows: Vec<Vec<String>> = report
                        .witnesses
                        .iter()
                        .map(|w| {
                            let (kind, lo, hi) = emit::margin_cells(&w.margin);
                            vec![w.k.to_string(), w.n.to_string(), kind, lo, hi]
                        })
                        .collect();
                    let mut stdout = std::io::stdout().lock();
                    write_rows(
                        &mut stdout,
                        format,
                        &["k", "n", "margin_kind", "margin_lo", "margin_hi"],
                        &rows,
                    )
                    .map_err(|e| e.to_string())?;
                }
            }
            Ok(if report.witnesses.is_empty() { 1 } else { 0 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qgrowth::lattice::{eval_z, HalfPoint};

    #[test]
    fn general_evaluator_matches_lattice_values() {
        for k in 0..=6usize {
            for x2 in -6i64..=6 {
                for y2 in -6i64..=6 {
                    let p = HalfPoint::from_doubled(x2, y2);
                    let g = eval_z(k, p);
                    let (re, im) = z_general(k, &rat(x2, 2), &rat(y2, 2));
                    assert_eq!((re, im), (g.re, g.im), "k={k} x2={x2} y2={y2}");
                }
            }
        }
    }

    #[test]
    fn f_general_reduces_to_binomials_on_integers() {
        // F_1(x) = x, F_2(x) = (x^2 - 1/4)/2 on the lattice.
        assert_eq!(f_general(1, &rint(5)), rint(5));
        assert_eq!(f_general(2, &rat(7, 2)), rat(48, 8));
        assert_eq!(f_general(0, &rat(-3, 4)), rint(1));
    }

    #[test]
    fn argument_parser_accepts_all_rational_spellings() {
        assert_eq!(rational_arg("x", "3/4").unwrap(), rat(3, 4));
        assert_eq!(rational_arg("x", "-2").unwrap(), rint(-2));
        assert_eq!(rational_arg("x", "0.25").unwrap(), rat(1, 4));
        assert!(rational_arg("x", "nope").is_err());
    }
}
