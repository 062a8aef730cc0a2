//! Numerical tolerances shared by production code and tests.

/// Entrywise Hermiticity slack for `A = A†`.
pub const HERMITIAN: f64 = 1e-12;

/// Normalization slack for unit vectors and unit-trace states built here.
pub const NORM: f64 = 1e-12;

/// Trace slack accepted when validating externally supplied density matrices.
pub const DENSITY_TRACE: f64 = 1e-9;

/// Most negative eigenvalue a density matrix may have.
pub const PSD_SLACK: f64 = 1e-10;

/// Imaginary part allowed in `Tr(AB)` before it is considered non-Hermitian input.
pub const TRACE_IMAG: f64 = 1e-12;

/// Jacobi stops once the off-diagonal Frobenius norm falls below this
/// (relative to `max(1, ‖A‖_F)`).
pub const JACOBI_OFF_DIAG: f64 = 1e-13;

/// Maximum cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Completeness residual `‖Σ M_k − I‖_max` accepted for a POVM.
pub const POVM_COMPLETENESS: f64 = 1e-12;

/// Deviation of squared fiducial overlaps from their design values.
pub const POVM_OVERLAP: f64 = 1e-12;

/// Minimum eigenvalue accepted for a POVM element.
pub const POVM_PSD: f64 = 1e-12;

/// Relative pivot threshold used for the informational-completeness rank.
pub const RANK: f64 = 1e-10;

/// Slack on the metric ranges `[0,1]`, `[1/3,1]`, `[0, ln 3]`.
pub const METRIC_RANGE: f64 = 1e-9;
