use std::fmt::Write as _;
use std::path::Path;

use super::ResultRow;

pub const CSV_HEADER: &str = "experiment,c_half,s,k,r,metric,value,ci,trials,seed";

/// Nine significant digits, `%g` style: fixed notation for exponents in
/// `-4..9`, scientific otherwise, trailing zeros dropped.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Header plus one line per row. Failed rows carry `error:` before the metric.
pub fn emit_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let metric = if r.error.is_some() {
            format!("error:{}", r.metric)
        } else {
            r.metric.clone()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.c_half.map(format_float).unwrap_or_default(),
            opt(r.s),
            opt(r.k),
            opt(r.r),
            metric,
            format_float(r.value),
            r.ci.map(format_float).unwrap_or_default(),
            opt(r.trials),
            r.seed
        );
    }
    out
}

/// Writes the CSV and, next to it, a plotting script that reads only that CSV.
pub fn write_csv(rows: &[ResultRow], path: &Path) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, emit_csv(rows))?;
    std::fs::write(path.with_extension("plot.py"), PLOT_SCRIPT)
}

pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plot every metric in a results CSV against its varying sweep axis."""
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

csv_path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).with_suffix("").with_suffix(".csv")
rows = [r for r in csv.DictReader(open(csv_path)) if not r["metric"].startswith("error:")]
axes = [a for a in ("c_half", "r", "k") if len({r[a] for r in rows if r[a]}) > 1] or ["c_half"]
x_axis = axes[0]

curves = defaultdict(list)
flat = []
for r in rows:
    if r[x_axis]:
        label = r["metric"] + "".join(f" {a}={r[a]}" for a in ("s", "k", "r") if a != x_axis and r[a])
        curves[label].append((float(r[x_axis]), float(r["value"])))
    else:
        flat.append(r)

fig, ax = plt.subplots(figsize=(8, 5))
for label, pts in sorted(curves.items()):
    pts.sort()
    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
for r in flat:
    if r["metric"].startswith(("throughput", "ecm_trace")):
        ax.axhline(float(r["value"]), linestyle="--", linewidth=0.8, label=r["metric"])
ax.set_xlabel(x_axis)
ax.set_ylabel("value")
ax.legend(fontsize=6)
fig.tight_layout()
fig.savefig(csv_path.with_suffix(".png"), dpi=150)
"#;
