use thiserror::Error;

use crate::enrichment::QuantaleViolation;
use crate::fincat::CategoryViolation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quantale law violated: {0}")]
    Quantale(QuantaleViolation),
    #[error("category axiom violated: {0}")]
    Category(CategoryViolation),
    #[error("functor invalid: {0}")]
    Functor(String),
    #[error("presheaf invalid: {0}")]
    Presheaf(String),
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("search exceeded the cap of {cap} candidate assignments ({context})")]
    SearchCap { cap: u64, context: String },
    #[error("reflection did not converge within {max_iter} sweeps")]
    Divergence { max_iter: usize },
    #[error("missing identity weight J for object {0}")]
    MissingIdentity(String),
    #[error("missing coherence data: {0}")]
    MissingCoherence(String),
    #[error("structure functor invalid: {0}")]
    Structure(String),
    #[error("object is not in the reflective subcategory: {0}")]
    NotInSubcategory(String),
    #[error("reflection unavailable: {0}")]
    Reflection(String),
    #[error("family is not dense: {0}")]
    NotDense(String),
    #[error("model error: {0}")]
    Model(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
