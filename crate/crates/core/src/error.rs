use thiserror::Error;

/// Errors raised by the geometric kernels and the certification layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SoccpError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("projection is not differentiable at this point ({0})")]
    NotDifferentiable(String),
    #[error("pair is not in the complementarity set (natural residual {residual:.3e})")]
    NotInOmega { residual: f64 },
    #[error("direction is not tangent to the set; the directional normal cone is empty")]
    DirectionNotTangent,
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("no feasible point found within budget")]
    NoFeasibleFound,
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// Problems found while reading an instance document.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("reference point is infeasible (natural residual {residual:.3e} > {limit:.1e})")]
    Infeasible { residual: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, SoccpError>;
