use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("label {label} is not in {{-1, +1}} as required by {loss}")]
    InvalidLabel { loss: &'static str, label: f64 },

    #[error("{what}: value {value} outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("dual variable z[{index}] = {value} violates the {constraint} constraint")]
    Infeasible {
        index: usize,
        value: f64,
        constraint: &'static str,
    },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("relaxation did not converge after {iters} iterations (residual {residual:e})")]
    NotConverged { iters: usize, residual: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("lateral matrix lost positive definiteness (min eigenvalue {min_eigenvalue:e})")]
    Unstable { min_eigenvalue: f64 },

    #[error("step size rejected: {0}")]
    StepSize(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("basis is not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("linear system is singular at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("{0}")]
    Dataset(String),

    #[error("step {index} of epoch {epoch} failed: {source}")]
    Training {
        epoch: usize,
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, value: impl Into<f64>, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value: value.into(),
            reason,
        }
    }
}
