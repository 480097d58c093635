//! Plot-script emission. The scripts are self-contained Python/matplotlib
//! readers of the CSVs: they recompute nothing, so the data files remain the
//! single source of truth.

use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::ExpError;

const READER_PRELUDE: &str = r##"import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_rows(name):
    if not os.path.exists(name):
        sys.exit(f"missing input: {name} (re-run the experiment first)")
    with open(name) as f:
        lines = [l for l in f if not l.startswith("#")]
    return list(csv.DictReader(lines))
"##;

fn script_body(id: &str) -> Option<(&'static str, &'static str)> {
    match id {
        "rates-toy" | "custom" => Some((
            "plot_estimators.py",
            r#"
rows = read_rows("estimators_summary.csv")
ts = [int(r["t"]) for r in rows]
fig, ax = plt.subplots()
for col, label in [("sme_median", "set-membership"),
                   ("ucb_median", "inflated-bound set-membership"),
                   ("lse_median", "least-squares ellipsoid")]:
    ax.loglog(ts, [float(r[col]) for r in rows], marker="o", label=label)
ax.set_xlabel("samples T")
ax.set_ylabel("median diameter")
ax.legend()
fig.savefig("estimators.png", dpi=150, bbox_inches="tight")
print("wrote estimators.png")
"#,
        )),
        "inflated-jet" => Some((
            "plot_inflated.py",
            r#"
rows = read_rows("inflated.csv")
by_mult = {}
for r in rows:
    by_mult.setdefault(float(r["multiplier"]), {}).setdefault(int(r["t"]), []).append(
        float(r["diameter"]))
fig, ax = plt.subplots()
for mult in sorted(by_mult):
    series = sorted(by_mult[mult].items())
    ts = [t for t, _ in series]
    med = [sorted(v)[len(v) // 2] for _, v in series]
    ax.loglog(ts, med, marker="o", label=f"bound x{mult:g}")
ax.set_xlabel("samples T")
ax.set_ylabel("median diameter")
ax.legend()
fig.savefig("inflated.png", dpi=150, bbox_inches="tight")
print("wrote inflated.png")
"#,
        )),
        "dim-sweep" => Some((
            "plot_dimensions.py",
            r#"
rows = read_rows("dimensions.csv")
by_dim = {}
for r in rows:
    by_dim.setdefault(int(r["n_x"]), []).append(
        (float(r["sme_diameter"]), float(r["ucb_diameter"]), float(r["lse_diameter"])))
dims = sorted(by_dim)
fig, ax = plt.subplots()
for idx, label in [(0, "set-membership"), (1, "inflated-bound"), (2, "least-squares")]:
    med = []
    for d in dims:
        vals = sorted(v[idx] for v in by_dim[d])
        med.append(vals[len(vals) // 2])
    ax.plot(dims, med, marker="o", label=label)
ax.set_xlabel("state dimension")
ax.set_ylabel("median diameter at fixed T")
ax.legend()
fig.savefig("dimensions.png", dpi=150, bbox_inches="tight")
print("wrote dimensions.png")
"#,
        )),
        "tracking-tube" => Some((
            "plot_tracking.py",
            r#"
rows = read_rows("tracking_summary.csv")
seeds = [int(r["seed"]) for r in rows]
fig, ax = plt.subplots()
ax.bar([s - 0.2 for s in seeds], [float(r["sme_gap"]) for r in rows], 0.4,
       label="set-membership gap")
ax.bar([s + 0.2 for s in seeds], [float(r["lse_gap"]) for r in rows], 0.4,
       label="least-squares gap")
ax.set_xlabel("seed")
ax.set_ylabel("mean tail cost gap to oracle")
ax.legend()
fig.savefig("tracking.png", dpi=150, bbox_inches="tight")
print("wrote tracking.png")
"#,
        )),
        "bounds-table" => Some((
            "plot_bounds.py",
            r#"
rows = read_rows("bounds.csv")
by_delta = {}
for r in rows:
    by_delta.setdefault(float(r["delta"]), []).append((int(r["t"]), float(r["total"])))
fig, ax = plt.subplots()
for delta in sorted(by_delta):
    series = sorted(by_delta[delta])
    ax.semilogx([t for t, _ in series], [v for _, v in series], marker="o",
                label=f"delta={delta:g}")
ax.set_xlabel("samples T")
ax.set_ylabel("failure-probability bound (clamped to 1)")
ax.legend()
fig.savefig("bounds.png", dpi=150, bbox_inches="tight")
print("wrote bounds.png")
"#,
        )),
        _ => None,
    }
}

/// Writes the plot script for the experiment into its output directory.
pub fn emit_plot_scripts(config: &ExperimentConfig) -> Result<Vec<PathBuf>, ExpError> {
    let (name, body) = script_body(&config.id)
        .ok_or_else(|| ExpError::Config(format!("no plot script for '{}'", config.id)))?;
    std::fs::create_dir_all(&config.out_dir)?;
    let path = config.out_dir.join(name);
    std::fs::write(&path, format!("{READER_PRELUDE}{body}"))?;
    Ok(vec![path])
}

/// Convenience for tests: emit into an explicit directory.
pub fn emit_into(config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>, ExpError> {
    let mut adjusted = config.clone();
    adjusted.out_dir = dir.to_path_buf();
    emit_plot_scripts(&adjusted)
}
