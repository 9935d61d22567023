use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::Result;
use crate::model::UnitKind;
use crate::scenarios::{Report, SweepRow, SweepSpec, Table};

/// Decimal rendering with 9 significant digits.
pub fn fmt_value(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let v = crate::scenarios::sig(x, 9);
    // Avoid "-0".
    format!("{}", if v == 0.0 { 0.0 } else { v })
}

pub fn table_csv(t: &Table) -> String {
    let mut s = t.columns.join(",");
    s.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_value(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn sweep_csv(spec: &SweepSpec, metric: &str, rows: &[SweepRow]) -> String {
    let mut s = format!("{},{},status\n", spec.param, metric);
    for r in rows {
        let m = r.metric.map(fmt_value).unwrap_or_default();
        // Status text may contain commas.
        let status = if r.status.contains([',', '"', '\n']) {
            format!("\"{}\"", r.status.replace('"', "\"\"").replace('\n', " "))
        } else {
            r.status.clone()
        };
        let _ = writeln!(s, "{},{m},{status}", fmt_value(r.value));
    }
    s
}

/// Machine-readable record of a run: every resolved parameter (with its
/// MHz reading where one applies), each override as given and as stored,
/// knobs, integrator settings, metrics and check outcomes.
pub fn summary_json(report: &Report) -> Value {
    let params: Vec<Value> = report
        .setup
        .params
        .resolved()
        .into_iter()
        .map(|(key, value, kind)| {
            let mut row = json!({ "key": key, "value": value, "unit": kind.unit() });
            match kind {
                UnitKind::Angular => row["over_2pi_MHz"] = json!(value / std::f64::consts::TAU),
                UnitKind::Rate => row["MHz"] = json!(value),
                _ => {}
            }
            row
        })
        .collect();
    json!({
        "scenario": report.scenario,
        "reference": report.reference,
        "variant": report.variant,
        "passed": report.passed(),
        "params": params,
        "overrides": report.overrides,
        "knobs": report.setup.knobs,
        "integrator": report.setup.integrator,
        "metrics": report.metrics,
        "checks": report.checks,
    })
}

/// Generic plotting script for a CSV whose first column is the abscissa.
pub fn plot_script(csv_name: &str, title: &str) -> String {
    format!(
        r#"# Plot every column of {csv_name} against the first one.
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
with open(path, newline="") as fh:
    rows = list(csv.reader(fh))
header, data = rows[0], [[float(x) for x in r] for r in rows[1:]]
x = [r[0] for r in data]
for j, name in enumerate(header[1:], start=1):
    plt.plot(x, [r[j] for r in data], label=name)
plt.xlabel(header[0])
plt.title("{title}")
plt.legend()
plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
"#
    )
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

/// One line per check.
pub fn check_lines(report: &Report) -> Vec<String> {
    report
        .checks
        .iter()
        .map(|c| {
            let measured = c.measured.map(fmt_value).unwrap_or_else(|| "missing".into());
            format!(
                "{} {} {}: measured {} required {} [{:?}]",
                if c.passed { "PASS" } else { "FAIL" },
                report.scenario,
                c.check.metric,
                measured,
                c.check.requirement(),
                c.check.provenance
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_have_nine_significant_digits() {
        assert_eq!(fmt_value(0.123456789123), "0.123456789");
        assert_eq!(fmt_value(17.677669529663685), "17.6776695");
        assert_eq!(fmt_value(-0.0), "0");
        assert_eq!(fmt_value(1e-12), "0.000000000001");
        assert_eq!(fmt_value(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(["t_us", "P"]);
        t.push(vec![0.0, 1.0]);
        t.push(vec![0.5, 0.25]);
        assert_eq!(table_csv(&t), "t_us,P\n0,1\n0.5,0.25\n");
    }

    #[test]
    fn sweep_status_is_quoted() {
        let spec = SweepSpec { scenario: "s".into(), param: "p".into(), values: vec![], metric: None, base: vec![] };
        let rows = [
            SweepRow { value: 1.0, metric: Some(0.5), status: "ok".into() },
            SweepRow { value: 2.0, metric: None, status: "bad, \"really\"".into() },
        ];
        assert_eq!(sweep_csv(&spec, "m", &rows), "p,m,status\n1,0.5,ok\n2,,\"bad, \"\"really\"\"\"\n");
    }
}
