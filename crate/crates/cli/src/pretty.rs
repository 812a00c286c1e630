//! Aligned text rendering of a report.

use std::fmt::Write;

use serde_json::Value;

use crate::report::RunReport;

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.12e}"),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        Value::Array(xs) if xs.len() == 2 && xs.iter().all(Value::is_number) => {
            let re = xs[0].as_f64().unwrap_or(f64::NAN);
            let im = xs[1].as_f64().unwrap_or(f64::NAN);
            Some(format!("{re:+.12e} {im:+.12e}i"))
        }
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    if let Some(s) = scalar(v) {
        rows.push((prefix.to_owned(), s));
        return;
    }
    let join = |k: &str| if prefix.is_empty() { k.to_owned() } else { format!("{prefix}.{k}") };
    match v {
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&join(&i.to_string()), x, rows);
            }
        }
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&join(k), x, rows);
            }
        }
        _ => unreachable!("scalars handled above"),
    }
}

fn table(out: &mut String, rows: &[(String, String)]) {
    let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (k, v) in rows {
        let _ = writeln!(out, "  {k:<w$}  {v}");
    }
}

pub fn render(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command   {}", report.command);
    let status = match report.exit_code() {
        0 => "pass",
        1 => "identity failure",
        _ => "input error",
    };
    let _ = writeln!(out, "status    {status}");
    let _ = writeln!(
        out,
        "elapsed   {:.1} ms on {} thread(s)",
        report.timing.elapsed_ms, report.timing.threads
    );
    if let Some(e) = &report.error {
        let _ = writeln!(out, "error     {e}");
    }
    if !report.checks.is_empty() {
        let _ = writeln!(out, "\nchecks");
        let w = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &report.checks {
            let v = c.value.map_or("-".to_owned(), |x| format!("{x:.3e}"));
            let _ = writeln!(
                out,
                "  {:<w$}  {:>10}  {:>2} {:<9.1e}  {}",
                c.name,
                v,
                c.relation,
                c.tolerance,
                if c.passed { "ok" } else { "FAIL" }
            );
        }
    }
    if !report.warnings.is_empty() {
        let _ = writeln!(out, "\nwarnings");
        for w in &report.warnings {
            let _ = writeln!(out, "  {w}");
        }
    }
    let mut rows = Vec::new();
    flatten("", &report.results, &mut rows);
    if !rows.is_empty() {
        let _ = writeln!(out, "\nresults");
        table(&mut out, &rows);
    }
    out
}
