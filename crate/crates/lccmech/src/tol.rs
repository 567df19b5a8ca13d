//! Named numerical tolerances, grouped by how the compared quantities are
//! produced. Exact algebraic identities evaluated in floating point should
//! agree to roundoff; anything involving finite differences cannot.

/// Identities that hold exactly in the algebra (e.g. eta(R) = 1, dOmega =
/// 2 Theta ^ Omega evaluated symbolically then numerically). Failures above
/// this are logic bugs, not conditioning.
pub const TOL_EXACT: f64 = 1e-10;

/// Closed-form displayed fields compared against the defining-identity
/// linear solve at sampled points. Both routes are exact arithmetic on the
/// same inputs; the allowance covers pivoting differences.
pub const TOL_CLOSED_FORM: f64 = 1e-8;

/// Anything compared through finite differences (Lie brackets of numerically
/// differentiated fields, trajectory consistency checks). Dominated by the
/// O(h^2) truncation of central differences with h ~ 1e-5.
pub const TOL_FD: f64 = 1e-6;

/// Relative residual contract for the dense linear solves behind the sharp
/// map: ||M x - mu|| < TOL_SOLVE * ||mu||.
pub const TOL_SOLVE: f64 = 1e-12;

/// Pivot magnitude below which the structure matrix is declared singular.
pub const TOL_NONDEGENERATE: f64 = 1e-9;

/// Sampling rejects points whose conformal denominator 1 - t*zeta (or the
/// position-space analogue) falls below this, keeping solves well away from
/// the singular locus.
pub const TOL_DENOMINATOR: f64 = 0.1;

/// Central-difference step is TOL-independent: h = FD_STEP_SCALE * max(1, |x|).
pub const FD_STEP_SCALE: f64 = 1e-5;

/// Default number of sample points for structure and identity checks.
pub const DEFAULT_SAMPLES: usize = 100;

/// Default RNG seed; overridable via model file, CLI, or LCCMECH_SEED.
pub const DEFAULT_SEED: u64 = 42;

/// Sampling box is [-BOX, BOX]^dim.
pub const SAMPLE_BOX: f64 = 1.0;
