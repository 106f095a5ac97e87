//! Numerical thresholds shared across the crate.

/// Degeneracy clustering: relative to the spectral width `λ_max - λ_min`.
pub const DEGENERACY_REL: f64 = 1e-8;

/// Two neighbouring clusters closer than this multiple of the degeneracy
/// tolerance make the clustering ambiguous.
pub const AMBIGUITY_FACTOR: f64 = 10.0;

/// Minimum `‖P_cluster ψ₀‖` for a cluster to belong to the spectral support.
pub const SUPPORT: f64 = 1e-10;

/// Equality of projected outcome vectors `P₀|c_f⟩` up to sign.
pub const OUTCOME_VECTOR: f64 = 1e-8;

/// Relative singular-value cutoff for Schmidt ranks.
pub const SCHMIDT_REL: f64 = 1e-10;

/// Projected-norm threshold for assigning an irrep to an eigenvector.
pub const LABEL_WEIGHT: f64 = 0.999;

/// Allowed deviation of `⟨S²⟩` from `S(S+1)`.
pub const CASIMIR: f64 = 1e-6;

/// Irrep multiplicities must be this close to an integer.
pub const INTEGRALITY: f64 = 1e-9;

/// Probability below which the initially dominant outcome counts as collapsed.
pub const COLLAPSE_PROBABILITY: f64 = 0.1;
