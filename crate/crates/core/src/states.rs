//! Pure qutrit sources, the deterministic sample grid, and dark-count mixing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::qmath::{outer, CVector3, Complex, HermitianMatrix3};

/// Pure qutrit in the four-angle parametrization
/// `(cos θ/2 · sin δ/2, sin θ/2 · sin δ/2 · e^{iφ12}, cos δ/2 · e^{iφ13})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureQutrit {
    pub theta: f64,
    pub delta: f64,
    pub phi12: f64,
    pub phi13: f64,
    amplitudes: CVector3,
}

impl PureQutrit {
    pub fn amplitudes(&self) -> &CVector3 {
        &self.amplitudes
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> HermitianMatrix3 {
        outer(&self.amplitudes).expect("amplitudes are finite by construction")
    }

    /// Same physical state with amplitudes multiplied by `e^{iα}`.
    pub fn amplitudes_with_global_phase(&self, alpha: f64) -> CVector3 {
        self.amplitudes.scale(Complex::from_polar(1.0, alpha))
    }
}

pub fn pure_state(theta: f64, delta: f64, phi12: f64, phi13: f64) -> Result<PureQutrit> {
    let closed = |name: &str, x: f64| {
        if x.is_finite() && (0.0..=PI).contains(&x) {
            Ok(())
        } else {
            Err(TomoError::invalid(format!("{name} = {x} outside [0, π]")))
        }
    };
    let half_open = |name: &str, x: f64| {
        if x.is_finite() && (0.0..2.0 * PI).contains(&x) {
            Ok(())
        } else {
            Err(TomoError::invalid(format!("{name} = {x} outside [0, 2π)")))
        }
    };
    closed("theta", theta)?;
    closed("delta", delta)?;
    half_open("phi12", phi12)?;
    half_open("phi13", phi13)?;

    let (st, ct) = (theta / 2.0).sin_cos();
    let (sd, cd) = (delta / 2.0).sin_cos();
    let amplitudes = CVector3::new([
        Complex::new(ct * sd, 0.0),
        Complex::from_polar(st * sd, phi12),
        Complex::from_polar(cd, phi13),
    ])?;
    Ok(PureQutrit {
        theta,
        delta,
        phi12,
        phi13,
        amplitudes,
    })
}

/// Deterministic sample grid, θ outermost and φ13 innermost.
///
/// θ and δ sit at interval midpoints `(i + ½)π/n`; the phases sit on the
/// closed-open grid `2πk/n`.
pub fn sample_grid(
    n_theta: usize,
    n_delta: usize,
    n_phi12: usize,
    n_phi13: usize,
) -> Result<Vec<PureQutrit>> {
    if n_theta == 0 || n_delta == 0 || n_phi12 == 0 || n_phi13 == 0 {
        return Err(TomoError::invalid("grid dimensions must all be at least 1"));
    }
    let mut out = Vec::with_capacity(n_theta * n_delta * n_phi12 * n_phi13);
    for i in 0..n_theta {
        let theta = (i as f64 + 0.5) * PI / n_theta as f64;
        for j in 0..n_delta {
            let delta = (j as f64 + 0.5) * PI / n_delta as f64;
            for k in 0..n_phi12 {
                let phi12 = 2.0 * PI * k as f64 / n_phi12 as f64;
                for l in 0..n_phi13 {
                    let phi13 = 2.0 * PI * l as f64 / n_phi13 as f64;
                    out.push(pure_state(theta, delta, phi12, phi13)?);
                }
            }
        }
    }
    Ok(out)
}

/// Indices of an evenly strided subsample of `total` items with at most
/// `max` entries: `⌊i·total/max⌋` for `i < max`. Returns every index when
/// `max >= total`.
pub fn subsample(total: usize, max: usize) -> Vec<usize> {
    if max >= total {
        return (0..total).collect();
    }
    (0..max).map(|i| i * total / max).collect()
}

/// State reaching the detector: the pure source mixed with white noise.
#[derive(Clone, Debug)]
pub struct InputState {
    pub rho: HermitianMatrix3,
    pub dark_rate: f64,
    pub source: PureQutrit,
}

/// `ρ_in = (1 − p)|ψ⟩⟨ψ| + (p/3)·I`.
pub fn apply_dark_counts(psi: &PureQutrit, p: f64) -> Result<InputState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(TomoError::invalid(format!(
            "dark-count rate {p} outside [0, 1]"
        )));
    }
    let rho = psi.projector() * (1.0 - p) + HermitianMatrix3::identity() * (p / 3.0);
    Ok(InputState {
        rho,
        dark_rate: p,
        source: *psi,
    })
}

/// Serializable angle tuple, used in per-state detail output.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Angles {
    pub theta: f64,
    pub delta: f64,
    pub phi12: f64,
    pub phi13: f64,
}

impl From<&PureQutrit> for Angles {
    fn from(p: &PureQutrit) -> Self {
        Angles {
            theta: p.theta,
            delta: p.delta,
            phi12: p.phi12,
            phi13: p.phi13,
        }
    }
}
