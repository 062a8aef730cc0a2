//! Qutrit quantum state tomography from noisy photon counts.
//!
//! The pipeline mirrors a photon-counting experiment:
//!
//! 1. [`states`] prepares a pure qutrit and mixes in dark counts.
//! 2. [`povm`] builds the 9-element SIC-POVM or the 12-element MUB POVM.
//! 3. [`counts`] turns Born-rule probabilities into Poisson-fluctuated counts.
//! 4. [`estimator`] fits a Cholesky-parametrized density matrix by least squares.
//! 5. [`metrics`] scores the estimate (fidelity, purity, von Neumann entropy).
//! 6. [`harness`] sweeps all of the above over a state sample and dark-count grid.

// Index loops read more clearly than iterator chains in the 3×3 kernels.
#![allow(clippy::needless_range_loop)]

pub mod counts;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod metrics;
pub mod optim;
pub mod povm;
pub mod qmath;
pub mod states;
pub mod tol;

pub use counts::{
    expected_counts, measured_counts, measured_counts_with, poisson_sample, BudgetSource,
    CountKind, CountVector, FixedBudget, RngStream,
};
pub use error::{Result, TomoError};
pub use estimator::{
    cholesky_to_density, ls_objective, reconstruct, CholeskyParams, EstimationResult,
    OptimizerOptions,
};
pub use harness::{
    read_records, run_cell, run_sweep, write_details, write_records, DetailRecord, SweepConfig,
    SweepOutput, SweepRecord,
};
pub use metrics::{entropy, fidelity_pure, merits, purity, MeritRecord};
pub use povm::{mub_povm, sic_povm, validate_povm, PovmElement, PovmSet, Scheme, ValidationReport};
pub use qmath::{hermitian_eig, outer, trace_product, CVector3, Complex, Eigen3, HermitianMatrix3};
pub use states::{apply_dark_counts, pure_state, sample_grid, subsample, InputState, PureQutrit};
