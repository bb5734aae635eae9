use alloc::string::String;
use core::fmt;

use crate::model::VertexId;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A parameter is outside its domain.
    InvalidConfig(String),
    SelfLoop(VertexId),
    DuplicateEdge(VertexId, VertexId),
    UnknownVertex(VertexId),
    VertexExists(VertexId),
    MissingEdge(VertexId, VertexId),
    EmptyNetwork,
    /// Too few non-empty histogram bins inside the requested fit window.
    InsufficientData {
        usable: usize,
        required: usize,
    },
    /// Mean distance needs at least two connected vertices.
    UndefinedDistance,
    UnknownFigure(String),
    /// An experiment run failed; carries the run index.
    Run {
        run: usize,
        source: alloc::boxed::Box<Error>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::SelfLoop(v) => write!(f, "self-loop on vertex {v}"),
            Error::DuplicateEdge(u, v) => write!(f, "edge {u}-{v} already exists"),
            Error::UnknownVertex(v) => write!(f, "vertex {v} does not exist"),
            Error::VertexExists(v) => write!(f, "vertex {v} already exists"),
            Error::MissingEdge(u, v) => write!(f, "edge {u}-{v} does not exist"),
            Error::EmptyNetwork => f.write_str("network is empty"),
            Error::InsufficientData { usable, required } => write!(
                f,
                "insufficient data: {usable} usable bins, at least {required} required"
            ),
            Error::UndefinedDistance => {
                f.write_str("mean distance is undefined for fewer than two connected vertices")
            }
            Error::UnknownFigure(id) => write!(f, "unknown figure id `{id}`"),
            Error::Run { run, source } => write!(f, "run {run}: {source}"),
        }
    }
}

impl core::error::Error for Error {}
