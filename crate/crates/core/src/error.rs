//! Umbrella error for pipeline stages.

use crate::eval::EvalError;
use crate::ingest::IngestError;
use crate::nbc::NbcError;
use crate::preprocess::SelectError;
use crate::significance::SignificanceError;

/// Any error a pipeline stage can raise; the blackboard wraps these with the
/// failing agent's id.
#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Significance(#[from] SignificanceError),
    #[error(transparent)]
    Nbc(#[from] NbcError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
