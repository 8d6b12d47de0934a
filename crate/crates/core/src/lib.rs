//! Jet-based verification of curvature identities, conformal transformation
//! laws and soliton-type identities on coordinate charts.

pub mod jets;
pub mod expr;
pub mod geometry;
pub mod curvature;
pub mod tolerance;
pub mod conformal;
pub mod identities;
pub mod catalog;

use thiserror::Error;

pub use expr::{parse_expr, Expr, ExprError};
pub use geometry::{Frame, GeometryInstance, GeometrySpec, JetTensor, PointGeometry, TensorValue, Vielbein};
pub use jets::{Jet, JetError};

#[derive(Debug, Error)]
pub enum CtlError {
    #[error("invalid geometry spec: {0}")]
    Spec(String),
    #[error("in field `{field}`: {source}")]
    Expr { field: String, source: ExprError },
    #[error(transparent)]
    ExprEval(#[from] ExprError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("point {0:?} lies outside the domain")]
    OutsideDomain(Vec<f64>),
    #[error("metric is not positive definite at {0:?}")]
    NotPositiveDefinite(Vec<f64>),
    #[error("{what} requires dimension >= {min}, got {dim}")]
    DimensionTooSmall { what: String, min: usize, dim: usize },
    #[error("requires jet order >= {needed}, have {have}")]
    OrderTooLow { needed: usize, have: usize },
    #[error("missing field: {0}")]
    MissingField(String),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("certification of {geometry} failed: {claim} residual {residual:.3e}")]
    Certification { geometry: String, claim: String, residual: f64 },
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CtlError>;
