//! CSV and JSON renderings of runs, histograms, fits and figure tables.
//!
//! Everything is rendered to memory first; [`OutputSet::write`] then creates
//! the output directory, so a failed command leaves no partial results.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use beliefnet_core::analysis::DistanceSummary;
use beliefnet_core::{CycleReport, DegreeHistogram, FigureData, PowerLawFit};
use serde_json::{json, Map, Value};

pub fn trace_csv(trace: &[CycleReport]) -> String {
    let mut out = String::from("cycle,attached,time_used,removed_count,n_vertices,n_edges\n");
    for c in trace {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.ordinal,
            c.attached,
            c.time_used,
            c.removed.len(),
            c.n_vertices,
            c.n_edges
        )
        .unwrap();
    }
    out
}

pub fn histogram_csv(hist: &DegreeHistogram) -> String {
    let mut out = String::from("k,p_k\n");
    for (k, p) in &hist.probs {
        writeln!(out, "{k},{p}").unwrap();
    }
    out
}

pub fn figure_csv(data: &FigureData) -> String {
    let mut out = data.columns.join(",");
    out.push('\n');
    for row in &data.rows {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn fit_json(fit: &PowerLawFit) -> Value {
    json!({
        "gamma": fit.gamma,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "k_min": fit.k_min,
        "k_max": fit.k_max,
        "bins": fit.bins,
    })
}

pub fn histogram_json(hist: &DegreeHistogram) -> Value {
    Value::Array(
        hist.probs
            .iter()
            .map(|(k, p)| json!({ "k": k, "p_k": p }))
            .collect(),
    )
}

pub fn distance_json(d: &DistanceSummary) -> Value {
    json!({
        "mean": d.mean,
        "std_err": d.std_err,
        "exact": d.exact,
        "pairs": d.pairs,
        "component_size": d.component_size,
        "components": d.components,
    })
}

/// Fits keyed by series label; `None` when the figure has no fit.
pub fn figure_fits_json(data: &FigureData) -> Option<Value> {
    if data.fits.is_empty() {
        return None;
    }
    let map: Map<String, Value> = data
        .fits
        .iter()
        .map(|(label, fit)| (label.clone(), fit_json(fit)))
        .collect();
    Some(Value::Object(map))
}

pub fn summary_json(data: &FigureData) -> Value {
    Value::Object(
        data.summary
            .iter()
            .map(|(k, v)| (k.clone(), json_number(*v)))
            .collect(),
    )
}

/// Non-finite values have no JSON form; they are written as `null`.
pub fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}

/// Files destined for one output directory.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(PathBuf, String)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Queues `contents` under the relative path `name`.
    pub fn add(&mut self, name: impl Into<PathBuf>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn names(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, contents)?;
        }
        Ok(())
    }
}
