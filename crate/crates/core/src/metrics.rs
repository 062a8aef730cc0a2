//! Figures of merit for a reconstructed state.

use serde::Serialize;

use crate::error::{Result, TomoError};
use crate::qmath::{hermitian_eig, trace_product, HermitianMatrix3};
use crate::states::PureQutrit;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeritRecord {
    pub fidelity: f64,
    pub purity: f64,
    /// Natural-log von Neumann entropy.
    pub entropy: f64,
}

/// Fidelity against a pure target. With one argument pure the Uhlmann
/// fidelity collapses to `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(psi: &PureQutrit, rho: &HermitianMatrix3) -> Result<f64> {
    rho.check_density()?;
    Ok(rho.expectation(psi.amplitudes()))
}

/// `Tr ρ²`.
pub fn purity(rho: &HermitianMatrix3) -> Result<f64> {
    rho.check_density()?;
    Ok(trace_product(rho, rho))
}

/// `−Σ λ ln λ` with `0 ln 0 = 0`.
pub fn entropy(rho: &HermitianMatrix3) -> Result<f64> {
    let eig = hermitian_eig(rho)?;
    let mut s = 0.0;
    for &l in &eig.values {
        if l < -tol::PSD_SLACK {
            return Err(TomoError::invalid(format!(
                "negative eigenvalue {l:e} in entropy"
            )));
        }
        if l > 0.0 {
            s -= l * l.ln();
        }
    }
    Ok(s)
}

pub fn merits(psi: &PureQutrit, rho: &HermitianMatrix3) -> Result<MeritRecord> {
    Ok(MeritRecord {
        fidelity: fidelity_pure(psi, rho)?,
        purity: purity(rho)?,
        entropy: entropy(rho)?,
    })
}
