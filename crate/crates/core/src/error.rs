use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("sector M={0} is out of range (expected -6..=6)")]
    SectorOutOfRange(i32),
    #[error("geometry/permutation mismatch: {0}")]
    GeometryMismatch(String),
    #[error("character projection for {irrep} at M={m} is not an integer ({value})")]
    NonIntegerProjection { irrep: String, m: i32, value: f64 },
    #[error("negative multiplet count for {irrep} at S={s}")]
    NegativeMultiplets { irrep: String, s: i32 },
    #[error("eigensolver failed for sector M={m} (alpha={alpha}, Jz/J={jz_over_j})")]
    Eigensolver { m: i32, alpha: f64, jz_over_j: f64 },
    #[error("ambiguous degeneracy clustering: clusters {gap:e} apart with tolerance {tol:e}")]
    AmbiguousClustering { gap: f64, tol: f64 },
    #[error("ambiguous symmetry label: {0}")]
    AmbiguousLabel(String),
    #[error("state is not an eigenstate of the operation {0}")]
    NotAnEigenstate(String),
    #[error("initial state has no component in sector M={0}")]
    EmptySector(i32),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
