//! Plain-text network dumps.
//!
//! ```text
//! # optional comments and blank lines
//! N <vertex count> H <tolerance>
//! V <id> <fitness> <g> <h> <ordinal>
//! E <u> <v> <sign: -1 | 0 | 1>
//! ```
//!
//! The header comes first. Each undirected edge is listed once; listing it a
//! second time, in either orientation, is an error. Floating-point values are
//! written in their shortest round-trip form, so a dump reloads bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use beliefnet_core::{EdgeSign, SignedNetwork, VertexAttrs, VertexId};
use thiserror::Error;

/// Largest vertex id accepted when loading; ids index a dense table.
pub const MAX_VERTEX_ID: u32 = 1 << 26;

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Structure(String),
}

impl DumpError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        DumpError::Syntax {
            line,
            message: message.into(),
        }
    }

    /// Line number of a syntax error, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            DumpError::Syntax { line, .. } => Some(*line),
            _ => None,
        }
    }
}

pub fn write_network(net: &SignedNetwork) -> String {
    let mut out = String::new();
    writeln!(out, "N {} H {}", net.vertex_count(), net.tolerance()).unwrap();
    for (v, a) in net.vertices() {
        writeln!(out, "V {} {} {} {} {}", v, a.fitness, a.g, a.h, a.ordinal).unwrap();
    }
    for (u, v, s) in net.edges() {
        writeln!(out, "E {u} {v} {}", s.value()).unwrap();
    }
    out
}

pub fn read_file(path: &Path) -> Result<SignedNetwork, DumpError> {
    let text = std::fs::read_to_string(path).map_err(|source| DumpError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_network(&text)
}

fn field<T: std::str::FromStr>(
    fields: &[&str],
    idx: usize,
    line: usize,
    what: &str,
) -> Result<T, DumpError> {
    let raw = fields
        .get(idx)
        .ok_or_else(|| DumpError::at(line, format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| DumpError::at(line, format!("invalid {what} `{raw}`")))
}

fn vertex_id(fields: &[&str], idx: usize, line: usize) -> Result<VertexId, DumpError> {
    let id: u32 = field(fields, idx, line, "vertex id")?;
    if id > MAX_VERTEX_ID {
        return Err(DumpError::at(
            line,
            format!("vertex id {id} exceeds the limit {MAX_VERTEX_ID}"),
        ));
    }
    Ok(VertexId(id))
}

pub fn parse_network(text: &str) -> Result<SignedNetwork, DumpError> {
    let mut net: Option<SignedNetwork> = None;
    let mut declared = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let arity = |n: usize| -> Result<(), DumpError> {
            if fields.len() == n {
                Ok(())
            } else {
                Err(DumpError::at(
                    line,
                    format!("expected {n} fields, found {}", fields.len()),
                ))
            }
        };
        match fields[0] {
            "N" => {
                arity(4)?;
                if net.is_some() {
                    return Err(DumpError::at(line, "repeated header"));
                }
                if fields[2] != "H" {
                    return Err(DumpError::at(
                        line,
                        "header must read `N <count> H <tolerance>`",
                    ));
                }
                declared = field(&fields, 1, line, "vertex count")?;
                let h: f64 = field(&fields, 3, line, "tolerance")?;
                net = Some(SignedNetwork::new(h).map_err(|e| DumpError::at(line, e.to_string()))?);
            }
            "V" | "E" if net.is_none() => {
                return Err(DumpError::at(
                    line,
                    "header `N <count> H <tolerance>` must come first",
                ));
            }
            "V" => {
                arity(6)?;
                let net = net.as_mut().unwrap();
                let id = vertex_id(&fields, 1, line)?;
                let fitness = field(&fields, 2, line, "fitness")?;
                let g = field(&fields, 3, line, "g")?;
                let h = field(&fields, 4, line, "h")?;
                let ordinal = field(&fields, 5, line, "ordinal")?;
                let attrs = VertexAttrs::new(fitness, g, h, ordinal)
                    .map_err(|e| DumpError::at(line, e.to_string()))?;
                net.insert_vertex(id, attrs)
                    .map_err(|e| DumpError::at(line, e.to_string()))?;
            }
            "E" => {
                arity(4)?;
                let net = net.as_mut().unwrap();
                let u = vertex_id(&fields, 1, line)?;
                let v = vertex_id(&fields, 2, line)?;
                let value: i64 = field(&fields, 3, line, "sign")?;
                let sign = EdgeSign::from_value(value).ok_or_else(|| {
                    DumpError::at(line, format!("sign must be -1, 0 or 1, got {value}"))
                })?;
                net.add_edge(u, v, sign)
                    .map_err(|e| DumpError::at(line, e.to_string()))?;
            }
            other => return Err(DumpError::at(line, format!("unknown record `{other}`"))),
        }
    }
    let net = net.ok_or_else(|| DumpError::Structure("missing header line".into()))?;
    if net.vertex_count() != declared {
        return Err(DumpError::Structure(format!(
            "header declares {declared} vertices, found {}",
            net.vertex_count()
        )));
    }
    if net.vertex_count() > 1 {
        if let Some(v) = net.vertex_ids().find(|&v| net.degree(v) == 0) {
            return Err(DumpError::Structure(format!(
                "vertex {v} has no links (only a single-vertex network may)"
            )));
        }
    }
    Ok(net)
}
