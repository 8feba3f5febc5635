//! Trace and model file formats.
//!
//! Traces are CSV with the fixed header `iter,cpu_ms,primal_J,smooth_J,
//! test_metric`; columns that do not apply stay empty. Model files are
//! plain text: the feature count on the first line, then one weight per
//! line with 17 significant digits so reading them back is bit-exact.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use smoothrank::TracePoint;

pub const TRACE_HEADER: &str = "iter,cpu_ms,primal_J,smooth_J,test_metric";

pub fn render_trace(points: &[TracePoint]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for p in points {
        let smooth = p.smooth_j.map(|v| v.to_string()).unwrap_or_default();
        let metric = p.test_metric.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{}\n", p.iter, p.cpu_ms, p.primal_j, smooth, metric));
    }
    out
}

pub fn write_trace(path: &Path, points: &[TracePoint]) -> Result<()> {
    fs::write(path, render_trace(points))
        .with_context(|| format!("writing trace {}", path.display()))
}

pub fn write_model(path: &Path, w: &[f64]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{}\n", w.len()));
    for v in w {
        out.push_str(&format!("{v:.16e}\n"));
    }
    fs::write(path, out).with_context(|| format!("writing model {}", path.display()))
}

pub fn read_model(path: &Path) -> Result<Vec<f64>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("model file is empty")?;
    let p: usize = header.trim().parse().context("model file: bad feature count")?;
    let mut w = Vec::with_capacity(p);
    for (k, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .with_context(|| format!("model file: bad weight on line {}", k + 2))?;
        if !v.is_finite() {
            bail!("model file: non-finite weight on line {}", k + 2);
        }
        w.push(v);
    }
    if w.len() != p {
        bail!("model file: expected {} weights, found {}", p, w.len());
    }
    Ok(w)
}
