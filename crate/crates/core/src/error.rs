use thiserror::Error;

use crate::continuation::ContinuationError;
use crate::diagnostics::DiagnosticsError;
use crate::model::ModelError;
use crate::quadrature::QuadratureError;
use crate::transform::TransformError;

/// Crate-level error; the display form is prefixed with the module that failed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("quadrature: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("transform: {0}")]
    Transform(#[from] TransformError),
    #[error("continuation: {0}")]
    Continuation(#[from] ContinuationError),
    #[error("diagnostics: {0}")]
    Diagnostics(#[from] DiagnosticsError),
}
