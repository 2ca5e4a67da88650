//! Numerical tolerances pinned for the whole workspace.
//!
//! Every inequality the laboratory asserts is checked against these
//! constants, so a change here is a change to what the test suite means.
//! The values are chosen for dense `f64` simulation at state dimensions up
//! to 2^18, where accumulated rounding stays several orders of magnitude
//! below the slacks used.

/// Absolute slack granted when asserting a derived inequality
/// (`lhs >= rhs - INEQUALITY_SLACK`). Covers rounding in chains of a few
/// thousand complex multiply-adds.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Maximum deviation of a squared norm from 1 for a state to count as
/// normalized without renormalization.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Maximum max-entry deviation of `U† U` from the identity for a matrix to
/// be accepted as unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-9;

/// Maximum max-entry deviation from idempotence/self-adjointness for a dense
/// matrix to be accepted as a projector.
pub const PROJECTOR_TOLERANCE: f64 = 1e-9;

/// Residual squared mass allowed outside the |0> branch of the response
/// register after a full adversary run (the query-uncompute convention).
pub const Y_CONVENTION_TOLERANCE: f64 = 1e-9;

/// Number of standard errors granted to Monte Carlo estimates when they are
/// compared against exact values or closed-form bounds.
pub const SIGMA_FACTOR: f64 = 3.0;

/// Default cap on the total state dimension `dim_x * dim_y * dim_z * dim_e`.
pub const DEFAULT_STATE_DIM_CAP: usize = 1 << 18;

/// Default cap on the number of table entries when tabulating an oracle.
pub const DEFAULT_TABLE_CAP: u64 = 1 << 24;

/// Default cap on the `|Y| * (q + 1) * 2` cell enumeration of the exact
/// simulator-success computation.
pub const DEFAULT_CELL_CAP: usize = 1 << 14;

/// Cap on exhaustive enumeration of full function spaces (`|Y|^|X|`) and of
/// hash-family members (`2^(m k)`).
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 16;
