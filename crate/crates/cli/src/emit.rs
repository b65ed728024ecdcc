//! Output plumbing: the three formats, the `#` config-echo header, and the
//! verdict-to-exit-code mapping.
//!
//! Invariant: for a fixed argv and environment every emitter here produces
//! identical bytes run to run, so goldens can compare whole streams.

use std::io::Write;

use qgrowth::checks::{CheckReport, CheckVerdict, Margin};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Table => "table",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Echoes the effective configuration: one `# key: value` line per entry,
/// first line naming the subcommand. Sent to stderr for JSON output so
/// stdout stays a single well-formed document.
pub fn echo_config(format: Format, command: &str, entries: &[(&str, String)]) {
    let mut lines = format!("# qgrowth {command}\n# format: {}\n", format.name());
    for (key, value) in entries {
        lines.push_str(&format!("# {key}: {value}\n"));
    }
    match format {
        Format::Json => eprint!("{lines}"),
        Format::Table | Format::Csv => print!("{lines}"),
    }
}

/// One scalar result (`fk`, `qk`): bare value as a table, one-column CSV,
/// or the inputs echoed back alongside the value as JSON.
pub fn emit_scalar(format: Format, fields: &[(&str, String)], value: &str) {
    match format {
        Format::Table => println!("{value}"),
        Format::Csv => println!("value\n{value}"),
        Format::Json => {
            let mut map = serde_json::Map::new();
            for (k, v) in fields {
                map.insert((*k).into(), as_json_value(v));
            }
            map.insert("value".into(), serde_json::Value::String(value.into()));
            println!("{}", serde_json::Value::Object(map));
        }
    }
}

/// Named values in a fixed order (`zk`, `model`).
pub fn emit_record(format: Format, inputs: &[(&str, String)], outputs: &[(&str, String)]) {
    match format {
        Format::Table => {
            for (k, v) in outputs {
                println!("{k} = {v}");
            }
        }
        Format::Csv => {
            println!("name,value");
            for (k, v) in outputs {
                println!("{k},{v}");
            }
        }
        Format::Json => {
            let mut map = serde_json::Map::new();
            for (k, v) in inputs.iter().chain(outputs) {
                map.insert((*k).into(), as_json_value(v));
            }
            println!("{}", serde_json::Value::Object(map));
        }
    }
}

/// Homogeneous rows under a fixed header (`walk`, `coeffs`, sharpness
/// witnesses). `to` lets `walk --out` target a file with the same bytes.
pub fn write_rows(
    to: &mut dyn Write,
    format: Format,
    header: &[&str],
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(to, "{}", header.join(","))?;
            for row in rows {
                writeln!(to, "{}", row.join(","))?;
            }
        }
        Format::Table => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for row in rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            let line = |cells: Vec<&str>| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            writeln!(to, "{}", line(header.to_vec()))?;
            for row in rows {
                writeln!(to, "{}", line(row.iter().map(String::as_str).collect()))?;
            }
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let mut map = serde_json::Map::new();
                    for (k, v) in header.iter().zip(row) {
                        map.insert((*k).into(), as_json_value(v));
                    }
                    serde_json::Value::Object(map)
                })
                .collect();
            writeln!(to, "{}", serde_json::Value::Array(items))?;
        }
    }
    Ok(())
}

/// Integers stay JSON numbers; everything else (rationals, verdicts) is a
/// string. i64 keeps counts and coordinates inside the safe range; larger
/// values fall back to strings.
fn as_json_value(s: &str) -> serde_json::Value {
    match s.parse::<i64>() {
        Ok(n) => serde_json::Value::Number(n.into()),
        Err(_) => serde_json::Value::String(s.into()),
    }
}

pub fn margin_cells(margin: &Margin) -> (String, String, String) {
    match margin {
        Margin::Exact { num, den } => {
            let v = if den == "1" { num.clone() } else { format!("{num}/{den}") };
            ("exact".into(), v.clone(), v)
        }
        Margin::Interval { lo, hi, precision } => {
            (format!("interval@{precision}"), lo.clone(), hi.clone())
        }
    }
}

/// Check reports in all three formats; JSON is the full schema, the other
/// two are a fixed-width digest (witness rows indented under each check).
pub fn emit_reports(format: Format, reports: &[CheckReport]) {
    match format {
        Format::Json => {
            let doc = if reports.len() == 1 {
                serde_json::to_string_pretty(&reports[0])
            } else {
                serde_json::to_string_pretty(&reports)
            };
            println!("{}", doc.expect("reports serialize"));
        }
        Format::Csv => {
            println!("check_id,verdict,margin_kind,margin_lo,margin_hi,witnesses,elapsed_ms");
            for r in reports {
                let (kind, lo, hi) = margin_cells(&r.margin);
                println!(
                    "{},{},{kind},{lo},{hi},{},{}",
                    r.check_id,
                    r.verdict,
                    r.witnesses.len(),
                    r.elapsed_ms
                );
            }
        }
        Format::Table => {
            for r in reports {
                let (kind, lo, hi) = margin_cells(&r.margin);
                let margin = if lo == hi { lo } else { format!("[{lo}, {hi}]") };
                println!("{:<24} {:<12} margin({kind}) = {margin}", r.check_id, r.verdict);
                for w in &r.witnesses {
                    let cells: Vec<String> =
                        w.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    println!("    witness: {}", cells.join(" "));
                }
            }
        }
    }
}

pub fn verdict_exit(verdict: CheckVerdict) -> i32 {
    match verdict {
        CheckVerdict::Pass => 0,
        CheckVerdict::Fail => 1,
        CheckVerdict::Inconclusive => 3,
    }
}
