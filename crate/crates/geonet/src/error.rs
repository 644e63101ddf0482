use thiserror::Error;

/// Errors surfaced by net construction, validation and the star engine.
#[derive(Error, Debug)]
pub enum GeonetError {
    #[error("cannot parse number {0:?}")]
    NumberParse(String),
    #[error("unknown vertex id {0:?}")]
    UnknownVertex(String),
    #[error("duplicate vertex id {0:?}")]
    DuplicateVertex(String),
    #[error("vertex {0:?} has a non-finite coordinate")]
    NonFinitePosition(String),
    #[error("edge {a:?}-{b:?} is degenerate (zero length or identical endpoints)")]
    DegenerateEdge { a: String, b: String },
    #[error("edge multiplicity must be >= 1 on {a:?}-{b:?}")]
    ZeroMultiplicity { a: String, b: String },
    #[error("{0}")]
    Precondition(String),
    #[error("radius is special (tangent to an edge or through a vertex): {0}")]
    SpecialRadius(String),
    #[error("interior vertex {0:?} is unbalanced (residual {1}); identity does not apply")]
    UnbalancedInterior(String, String),
    #[error("construction failed at layer {layer}: {reason}")]
    LayerFailed { layer: usize, reason: String },
    #[error("dispatch ambiguous at layer {layer}: |alpha - pi| = {gap} below guard tolerance")]
    DispatchAmbiguous { layer: usize, gap: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GeonetError>;
