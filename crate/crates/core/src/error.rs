use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lattice constant must be positive, got {0}")]
    NonPositiveLatticeConstant(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("lambda = {lambda} lies within {distance:e} of the free eigenvalue {pole}")]
    NearPole {
        lambda: f64,
        pole: f64,
        distance: f64,
    },
    #[error("{0} is not a free eigenvalue at this momentum")]
    NotAFreeEigenvalue(f64),
    #[error("point ({0}, {1}) lies on the lattice")]
    OnLattice(f64, f64),
    #[error(
        "real-space and momentum-space anchor sums disagree: {real_space} vs {momentum_space} (allowed {allowed:e})"
    )]
    RepresentationMismatch {
        real_space: f64,
        momentum_space: f64,
        allowed: f64,
    },
    #[error("unresolved root count for {branch} on ({lo}, {hi}): {detail}")]
    UnresolvedRootCount {
        branch: &'static str,
        lo: f64,
        hi: f64,
        detail: String,
    },
    #[error("only {found} eigenvalues below the working cutoff, {needed} requested")]
    InsufficientLevels { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
