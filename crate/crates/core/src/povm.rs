//! The two measurement schemes: a 9-outcome SIC-POVM and a 12-outcome POVM
//! assembled from the four mutually unbiased bases of `C^3`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::qmath::{hermitian_eig, outer, trace_product, CVector3, Complex, HermitianMatrix3};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sic,
    Mub,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Sic, Scheme::Mub];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Sic => "sic",
            Scheme::Mub => "mub",
        }
    }

    /// Legend label used in charts.
    pub fn display_name(&self) -> &'static str {
        match self {
            Scheme::Sic => "SIC-POVM",
            Scheme::Mub => "MUBs",
        }
    }

    pub fn index(&self) -> u64 {
        match self {
            Scheme::Sic => 0,
            Scheme::Mub => 1,
        }
    }

    pub fn element_count(&self) -> usize {
        match self {
            Scheme::Sic => 9,
            Scheme::Mub => 12,
        }
    }

    pub fn povm(&self) -> PovmSet {
        match self {
            Scheme::Sic => sic_povm(),
            Scheme::Mub => mub_povm(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = TomoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sic" => Ok(Scheme::Sic),
            "mub" => Ok(Scheme::Mub),
            other => Err(TomoError::invalid(format!(
                "unknown scheme {other:?} (expected sic or mub)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PovmElement {
    pub operator: HermitianMatrix3,
    pub label: String,
}

/// Ordered POVM. Element order fixes the index of every count vector.
#[derive(Clone, Debug)]
pub struct PovmSet {
    scheme: Scheme,
    elements: Vec<PovmElement>,
}

impl PovmSet {
    /// Builds a set, requiring the scheme's element count and completeness.
    pub fn new(scheme: Scheme, elements: Vec<PovmElement>) -> Result<Self> {
        if elements.len() != scheme.element_count() {
            return Err(TomoError::invalid(format!(
                "{scheme} POVM needs {} elements, got {}",
                scheme.element_count(),
                elements.len()
            )));
        }
        let set = PovmSet { scheme, elements };
        let residual = set.completeness_residual();
        if residual > tol::POVM_COMPLETENESS {
            return Err(TomoError::invalid(format!(
                "POVM elements do not sum to identity (residual {residual:e})"
            )));
        }
        Ok(set)
    }

    /// Builds a set without any checks. Meant for diagnostics such as feeding
    /// a deliberately broken set to [`validate_povm`].
    pub fn new_unchecked(scheme: Scheme, elements: Vec<PovmElement>) -> Self {
        PovmSet { scheme, elements }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.label == label)
    }

    /// `‖Σ_k M_k − I‖_max`.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self
            .elements
            .iter()
            .fold(HermitianMatrix3::zero(), |acc, e| acc + e.operator);
        sum.max_abs_diff(&HermitianMatrix3::identity())
    }
}

fn eta() -> Complex {
    Complex::from_polar(1.0, 2.0 * PI / 3.0)
}

fn weighted_projector(v: [Complex; 3], weight: f64) -> HermitianMatrix3 {
    let v = CVector3::new(v).expect("constant vectors are finite");
    outer(&v).expect("constant vectors are finite") * weight
}

/// Nine operators `(1/3)|ν_i^j⟩⟨ν_i^j|`, ordered `(j, i)` and labelled `sic:j:i`.
pub fn sic_povm() -> PovmSet {
    let e = eta();
    let eb = e.conj();
    let one = Complex::new(1.0, 0.0);
    let s = Complex::new(FRAC_1_SQRT_2, 0.0);
    // (first basis index, second basis index, [coefficient pairs for i = 0, 1, 2])
    type Family = (usize, usize, [(Complex, Complex); 3]);
    let families: [Family; 3] = [
        (0, 1, [(one, one), (eb, e), (e, eb)]),
        (1, 2, [(one, one), (eb, e), (e, eb)]),
        (0, 2, [(one, one), (e, eb), (eb, e)]),
    ];
    let mut elements = Vec::with_capacity(9);
    for (j, (a, b, coeffs)) in families.iter().enumerate() {
        for (i, (ca, cb)) in coeffs.iter().enumerate() {
            let mut v = [Complex::new(0.0, 0.0); 3];
            v[*a] = ca * s;
            v[*b] = cb * s;
            elements.push(PovmElement {
                operator: weighted_projector(v, 1.0 / 3.0),
                label: format!("sic:{j}:{i}"),
            });
        }
    }
    PovmSet::new(Scheme::Sic, elements).expect("SIC-POVM is complete")
}

/// Twelve operators `(1/4)|ξ_i^{(j)}⟩⟨ξ_i^{(j)}|`, basis-major, labelled `mub:bJ:vI`.
///
/// Basis 1 is the standard basis; bases 2–4 are the Fourier basis and its two
/// phase-twisted companions.
pub fn mub_povm() -> PovmSet {
    let e = eta();
    let eb = e.conj();
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let r = 1.0 / 3f64.sqrt();
    let bases: [[[Complex; 3]; 3]; 4] = [
        [[one, zero, zero], [zero, one, zero], [zero, zero, one]],
        [
            [one * r, one * r, one * r],
            [one * r, e * r, eb * r],
            [one * r, eb * r, e * r],
        ],
        [
            [e * r, one * r, one * r],
            [one * r, e * r, one * r],
            [one * r, one * r, e * r],
        ],
        [
            [eb * r, one * r, one * r],
            [one * r, eb * r, one * r],
            [one * r, one * r, eb * r],
        ],
    ];
    let mut elements = Vec::with_capacity(12);
    for (j, basis) in bases.iter().enumerate() {
        for (i, v) in basis.iter().enumerate() {
            elements.push(PovmElement {
                operator: weighted_projector(*v, 0.25),
                label: format!("mub:b{}:v{}", j + 1, i + 1),
            });
        }
    }
    PovmSet::new(Scheme::Mub, elements).expect("MUB POVM is complete")
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub scheme: Scheme,
    pub element_count: usize,
    pub completeness_residual: f64,
    pub min_eigenvalue: f64,
    pub rank: usize,
    /// Squared overlaps `|⟨v_a|v_b⟩|²` of the normalized kets behind each
    /// rank-one element, recovered as `Tr(M_a M_b) / (Tr M_a · Tr M_b)`.
    pub overlaps: Vec<Vec<f64>>,
    /// Largest deviation of `overlaps` from the scheme's design values.
    pub max_overlap_deviation: f64,
    /// MUB only: largest deviation from orthonormality inside a basis.
    pub intra_basis_residual: Option<f64>,
    pub completeness_passed: bool,
    pub positivity_passed: bool,
    pub overlap_checks_passed: bool,
    pub rank_passed: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.completeness_passed
            && self.positivity_passed
            && self.overlap_checks_passed
            && self.rank_passed
    }
}

fn design_overlap(scheme: Scheme, a: usize, b: usize) -> f64 {
    if a == b {
        return 1.0;
    }
    match scheme {
        Scheme::Sic => 0.25,
        Scheme::Mub if a / 3 == b / 3 => 0.0,
        Scheme::Mub => 1.0 / 3.0,
    }
}

pub fn validate_povm(set: &PovmSet) -> ValidationReport {
    let ops: Vec<HermitianMatrix3> = set.elements().iter().map(|e| e.operator).collect();
    let n = ops.len();

    let completeness_residual = set.completeness_residual();
    let min_eigenvalue = ops
        .iter()
        .map(|m| hermitian_eig(m).map(|e| e.values[0]).unwrap_or(f64::NAN))
        .fold(
            f64::INFINITY,
            |acc, x| if x.is_nan() { x } else { acc.min(x) },
        );

    let traces: Vec<f64> = ops.iter().map(|m| m.trace()).collect();
    let mut overlaps = vec![vec![0.0; n]; n];
    let mut max_dev: f64 = 0.0;
    let mut intra: f64 = 0.0;
    let mut undefined = false;
    for a in 0..n {
        for b in 0..n {
            let ov = trace_product(&ops[a], &ops[b]) / (traces[a] * traces[b]);
            overlaps[a][b] = ov;
            let dev = (ov - design_overlap(set.scheme(), a, b)).abs();
            // a zero element gives 0/0
            undefined |= !dev.is_finite();
            max_dev = max_dev.max(dev);
            if set.scheme() == Scheme::Mub && a / 3 == b / 3 {
                intra = intra.max(dev);
            }
        }
    }
    let size_ok = n == set.scheme().element_count();
    if undefined {
        max_dev = f64::NAN;
    }

    let rank = real_rank(&ops.iter().map(|m| m.real_coordinates()).collect::<Vec<_>>());

    ValidationReport {
        scheme: set.scheme(),
        element_count: n,
        completeness_residual,
        min_eigenvalue,
        rank,
        overlaps,
        max_overlap_deviation: max_dev,
        intra_basis_residual: (set.scheme() == Scheme::Mub).then_some(intra),
        completeness_passed: size_ok && completeness_residual < tol::POVM_COMPLETENESS,
        positivity_passed: min_eigenvalue >= -tol::POVM_PSD,
        overlap_checks_passed: size_ok && max_dev <= tol::POVM_OVERLAP,
        rank_passed: rank == 9,
    }
}

/// Rank of a set of real 9-vectors by Gaussian elimination with full pivoting.
fn real_rank(rows: &[[f64; 9]]) -> usize {
    let mut m: Vec<[f64; 9]> = rows.to_vec();
    let scale = m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return 0;
    }
    let threshold = tol::RANK * scale;
    let mut rank = 0;
    let mut used_cols = [false; 9];
    while rank < m.len() {
        let mut best = (0.0, 0, 0);
        for (r, row) in m.iter().enumerate().skip(rank) {
            for (c, v) in row.iter().enumerate() {
                if !used_cols[c] && v.abs() > best.0 {
                    best = (v.abs(), r, c);
                }
            }
        }
        if best.0 <= threshold {
            break;
        }
        let (_, pr, pc) = best;
        m.swap(rank, pr);
        used_cols[pc] = true;
        let pivot = m[rank];
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[pc] / pivot[pc];
            for (x, p) in row.iter_mut().zip(pivot.iter()) {
                *x -= f * p;
            }
        }
        rank += 1;
    }
    rank
}
