//! Twist-set computation and exactly checkable certificates.

mod certificate;
mod twistset;

use thiserror::Error;

use crate::arith::ArithError;
use crate::curve::CurveError;
use crate::parasearch::ParaError;

pub use certificate::{
    build_certificate, subset_value, verify_certificate, BaseModel, CertMetadata, Certificate,
    Entry, Verdict, Violation, Witness, MAX_DIMENSION, SCHEMA,
};
pub use twistset::{
    compute_twist_set, points_first_twist_set, AnnotatedTwistSet, StoredStatus, TwistSetOptions,
};

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("twist bound must be at least 1")]
    ZeroBound,
    #[error("no stored witness for d = {0}")]
    MissingWitness(u64),
    #[error("parallelepiped is not contained in the twist set")]
    NotInSet,
    #[error("parallelepiped generators are dependent modulo squares")]
    NotStrict,
    #[error("thread pool: {0}")]
    Threads(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Para(#[from] ParaError),
}
