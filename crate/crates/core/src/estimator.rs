//! Least-squares state reconstruction over the Cholesky parametrization
//! `ρ = T†T / Tr(T†T)`, with
//!
//! ```text
//!     | t1          0           0  |
//! T = | t4 + i t5   t2          0  |
//!     | t8 + i t9   t6 + i t7   t3 |
//! ```
//!
//! Any real 9-vector except zero maps to a physical state, so the fit is an
//! unconstrained minimization. It is solved by multi-start Nelder–Mead.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::counts::{CountVector, RngStream};
use crate::error::{Result, TomoError};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::povm::PovmSet;
use crate::qmath::{trace_product, Complex, HermitianMatrix3, Raw3};

/// Smallest `Σ t_i²` accepted as a non-degenerate parameter vector.
const MIN_NORM_SQR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CholeskyParams(pub [f64; 9]);

impl CholeskyParams {
    /// Start point mapping to the maximally mixed state.
    pub fn maximally_mixed() -> Self {
        let d = 1.0 / 3f64.sqrt();
        CholeskyParams([d, d, d, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|t| t * t).sum()
    }

    /// Rescaled to unit Euclidean norm; the density matrix is unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 && n.is_finite() {
            CholeskyParams(self.0.map(|t| t / n))
        } else {
            *self
        }
    }
}

/// Unnormalized `T†T`.
fn gram(t: &[f64]) -> Raw3 {
    let c = Complex::new;
    let tm = [
        [c(t[0], 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        [c(t[3], t[4]), c(t[1], 0.0), c(0.0, 0.0)],
        [c(t[7], t[8]), c(t[5], t[6]), c(t[2], 0.0)],
    ];
    let mut g = [[c(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            // T is lower triangular, so row k contributes only when k >= max(i, j)
            let mut acc = c(0.0, 0.0);
            for row in tm.iter().skip(i.max(j)) {
                acc += row[i].conj() * row[j];
            }
            g[i][j] = acc;
        }
    }
    g
}

pub fn cholesky_to_density(params: &CholeskyParams) -> Result<HermitianMatrix3> {
    let norm = params.norm_sqr();
    if !norm.is_finite() || params.0.iter().any(|t| !t.is_finite()) {
        return Err(TomoError::invalid("Cholesky parameters must be finite"));
    }
    if norm < MIN_NORM_SQR {
        return Err(TomoError::DegenerateParameters);
    }
    let g = HermitianMatrix3::symmetrized(gram(&params.0));
    // Tr(T†T) = Σ t_i², but dividing by the computed trace makes it exactly 1
    Ok(g * (1.0 / g.trace()))
}

fn check_inputs(measured: &CountVector, povm: &PovmSet, photon_mean: f64) -> Result<()> {
    if measured.len() != povm.len() {
        return Err(TomoError::invalid(format!(
            "count vector has {} entries but the POVM has {} elements",
            measured.len(),
            povm.len()
        )));
    }
    if measured.scheme != povm.scheme() {
        return Err(TomoError::invalid(format!(
            "counts were taken with {} but the POVM is {}",
            measured.scheme,
            povm.scheme()
        )));
    }
    if !(photon_mean.is_finite() && photon_mean > 0.0) {
        return Err(TomoError::invalid(format!(
            "photon mean must be positive, got {photon_mean}"
        )));
    }
    if measured.values.iter().any(|v| !v.is_finite()) {
        return Err(TomoError::invalid("counts must be finite"));
    }
    Ok(())
}

/// Objective evaluated on raw parameter slices; `+∞` at the degenerate point.
struct Objective<'a> {
    operators: Vec<HermitianMatrix3>,
    counts: &'a [f64],
    photon_mean: f64,
}

impl<'a> Objective<'a> {
    fn new(measured: &'a CountVector, povm: &PovmSet, photon_mean: f64) -> Self {
        Objective {
            operators: povm.elements().iter().map(|e| e.operator).collect(),
            counts: &measured.values,
            photon_mean,
        }
    }

    fn eval(&self, t: &[f64]) -> f64 {
        let norm: f64 = t.iter().map(|x| x * x).sum();
        if !norm.is_finite() || norm < MIN_NORM_SQR {
            return f64::INFINITY;
        }
        let g = HermitianMatrix3::symmetrized(gram(t));
        let scale = self.photon_mean / g.trace();
        self.operators
            .iter()
            .zip(self.counts)
            .map(|(m, n)| {
                let r = scale * trace_product(m, &g) - n;
                r * r
            })
            .sum()
    }
}

/// `f_LS(t) = Σ_k (N · Tr(M_k ρ(t)) − n^M_k)²`; `+∞` for all-zero `t`.
pub fn ls_objective(
    params: &CholeskyParams,
    measured: &CountVector,
    povm: &PovmSet,
    photon_mean: f64,
) -> Result<f64> {
    check_inputs(measured, povm, photon_mean)?;
    Ok(Objective::new(measured, povm, photon_mean).eval(&params.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub max_evaluations: usize,
    pub tolerance: f64,
    pub initial_simplex_scale: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            restarts: 5,
            max_evaluations: 20_000,
            tolerance: 1e-10,
            initial_simplex_scale: 0.1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EstimationResult {
    pub rho_hat: HermitianMatrix3,
    pub params: CholeskyParams,
    pub objective: f64,
    pub evaluations: usize,
    pub restarts_used: usize,
    /// True when at least one restart met the tolerance.
    pub converged: bool,
}

/// Fits `ρ` to measured counts.
///
/// Restart 0 starts from the maximally mixed state; later restarts draw each
/// parameter uniformly from `[−1, 1]` using `rng`. The lowest final objective
/// wins, earlier restarts winning ties. The reported parameters are scaled to
/// unit norm.
pub fn reconstruct(
    measured: &CountVector,
    povm: &PovmSet,
    photon_mean: f64,
    options: &OptimizerOptions,
    rng: &mut RngStream,
) -> Result<EstimationResult> {
    check_inputs(measured, povm, photon_mean)?;
    if options.restarts == 0 {
        return Err(TomoError::invalid("at least one restart is required"));
    }
    let objective = Objective::new(measured, povm, photon_mean);
    let nm = NelderMeadOptions {
        initial_step: options.initial_simplex_scale,
        max_evaluations: options.max_evaluations,
        tolerance: options.tolerance,
    };

    let mut best: Option<(CholeskyParams, f64)> = None;
    let mut evaluations = 0;
    let mut converged = false;
    for restart in 0..options.restarts {
        let start = if restart == 0 {
            CholeskyParams::maximally_mixed()
        } else {
            let mut t = [0.0; 9];
            for x in t.iter_mut() {
                *x = rng.random_range(-1.0..=1.0);
            }
            CholeskyParams(t)
        };
        let out = nelder_mead(|t| objective.eval(t), &start.0, &nm);
        evaluations += out.evaluations;
        converged |= out.converged;

        let mut t = [0.0; 9];
        t.copy_from_slice(&out.x);
        let params = CholeskyParams(t).normalized();
        let value = objective.eval(&params.0);
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((params, value));
        }
    }

    let (params, value) = best.expect("at least one restart ran");
    let rho_hat = cholesky_to_density(&params).map_err(|_| {
        TomoError::NumericalFailure("optimizer ended on degenerate parameters".into())
    })?;
    Ok(EstimationResult {
        rho_hat,
        params,
        objective: value,
        evaluations,
        restarts_used: options.restarts,
        converged,
    })
}
