//! Fixed-size complex linear algebra for a three-level system.

use std::fmt;
use std::ops::{Add, Mul, Sub};

pub use num_complex::Complex64 as Complex;

use crate::error::{Result, TomoError};
use crate::tol;

pub(crate) type Raw3 = [[Complex; 3]; 3];

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

fn is_finite(c: Complex) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

/// Column vector in `C^3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CVector3([Complex; 3]);

impl CVector3 {
    pub fn new(components: [Complex; 3]) -> Result<Self> {
        if components.iter().all(|c| is_finite(*c)) {
            Ok(CVector3(components))
        } else {
            Err(TomoError::invalid("vector has non-finite components"))
        }
    }

    pub fn from_real(components: [f64; 3]) -> Result<Self> {
        Self::new(components.map(|x| Complex::new(x, 0.0)))
    }

    /// Standard basis ket `|index⟩`.
    pub fn basis(index: usize) -> Self {
        let mut c = [ZERO; 3];
        c[index] = ONE;
        CVector3(c)
    }

    pub fn components(&self) -> &[Complex; 3] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &CVector3) -> Complex {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, factor: Complex) -> CVector3 {
        CVector3(self.0.map(|c| c * factor))
    }

    pub fn normalized(&self) -> Result<CVector3> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(TomoError::invalid("cannot normalize a zero vector"));
        }
        Ok(self.scale(Complex::new(1.0 / n, 0.0)))
    }
}

/// 3×3 complex Hermitian matrix.
///
/// Constructors reject inputs that are non-Hermitian beyond [`tol::HERMITIAN`]
/// and store the symmetrized part `(A + A†)/2`, so the stored value is exactly
/// Hermitian.
#[derive(Clone, Copy, PartialEq)]
pub struct HermitianMatrix3(Raw3);

impl fmt::Debug for HermitianMatrix3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "HermitianMatrix3[")?;
        for row in &self.0 {
            writeln!(
                f,
                "  {:+.6}{:+.6}i  {:+.6}{:+.6}i  {:+.6}{:+.6}i",
                row[0].re, row[0].im, row[1].re, row[1].im, row[2].re, row[2].im
            )?;
        }
        write!(f, "]")
    }
}

impl HermitianMatrix3 {
    pub fn new(entries: [[Complex; 3]; 3]) -> Result<Self> {
        if !entries.iter().flatten().all(|c| is_finite(*c)) {
            return Err(TomoError::invalid("matrix has non-finite entries"));
        }
        for i in 0..3 {
            for j in i..3 {
                let dev = (entries[i][j] - entries[j][i].conj()).norm();
                if dev > tol::HERMITIAN {
                    return Err(TomoError::invalid(format!(
                        "matrix is not Hermitian: |A[{i}][{j}] - conj(A[{j}][{i}])| = {dev:e}"
                    )));
                }
            }
        }
        Ok(Self::symmetrized(entries))
    }

    /// Returns `(A + A†)/2` without any tolerance check.
    pub(crate) fn symmetrized(m: Raw3) -> Self {
        let mut out = [[ZERO; 3]; 3];
        for i in 0..3 {
            out[i][i] = Complex::new(m[i][i].re, 0.0);
            for j in (i + 1)..3 {
                let v = (m[i][j] + m[j][i].conj()) * 0.5;
                out[i][j] = v;
                out[j][i] = v.conj();
            }
        }
        HermitianMatrix3(out)
    }

    pub fn from_real_diagonal(diag: [f64; 3]) -> Result<Self> {
        let mut m = [[ZERO; 3]; 3];
        for i in 0..3 {
            m[i][i] = Complex::new(diag[i], 0.0);
        }
        Self::new(m)
    }

    pub fn identity() -> Self {
        let mut m = [[ZERO; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = ONE;
        }
        HermitianMatrix3(m)
    }

    pub fn zero() -> Self {
        HermitianMatrix3([[ZERO; 3]; 3])
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex {
        self.0[row][col]
    }

    pub fn entries(&self) -> &[[Complex; 3]; 3] {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.0[i][i].re).sum()
    }

    /// `⟨v|A|v⟩`, real for Hermitian `A`.
    pub fn expectation(&self, v: &CVector3) -> f64 {
        let c = v.components();
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += (c[i].conj() * self.0[i][j] * c[j]).re;
            }
        }
        acc
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &HermitianMatrix3) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `U A U†` for a unitary (or any) `U`; the result is re-symmetrized.
    pub fn conjugate_by(&self, u: &[[Complex; 3]; 3]) -> HermitianMatrix3 {
        let ua = matmul(u, &self.0);
        let ud = adjoint(u);
        Self::symmetrized(matmul(&ua, &ud))
    }

    /// Real coordinates in the 9-dimensional space of Hermitian operators:
    /// the three diagonal entries followed by `(Re, Im)` of the upper triangle.
    pub fn real_coordinates(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[0][0].re, m[1][1].re, m[2][2].re, m[0][1].re, m[0][1].im, m[0][2].re, m[0][2].im,
            m[1][2].re, m[1][2].im,
        ]
    }

    /// Checks trace one and positive semidefiniteness at the validation slacks.
    pub fn check_density(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > tol::DENSITY_TRACE {
            return Err(TomoError::invalid(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let min = self.min_eigenvalue()?;
        if min < -tol::PSD_SLACK {
            return Err(TomoError::invalid(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eig(self)?.values[0])
    }
}

impl Add for HermitianMatrix3 {
    type Output = HermitianMatrix3;
    fn add(self, rhs: Self) -> Self {
        let mut m = self.0;
        for (row, rrow) in m.iter_mut().zip(rhs.0.iter()) {
            for (a, b) in row.iter_mut().zip(rrow.iter()) {
                *a += b;
            }
        }
        HermitianMatrix3(m)
    }
}

impl Sub for HermitianMatrix3 {
    type Output = HermitianMatrix3;
    fn sub(self, rhs: Self) -> Self {
        self + rhs * -1.0
    }
}

impl Mul<f64> for HermitianMatrix3 {
    type Output = HermitianMatrix3;
    fn mul(self, rhs: f64) -> Self {
        HermitianMatrix3(self.0.map(|row| row.map(|c| c * rhs)))
    }
}

pub(crate) fn matmul(a: &Raw3, b: &Raw3) -> Raw3 {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub(crate) fn adjoint(a: &Raw3) -> Raw3 {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// `|v⟩⟨v|`.
pub fn outer(v: &CVector3) -> Result<HermitianMatrix3> {
    let c = v.components();
    if !c.iter().all(|x| is_finite(*x)) {
        return Err(TomoError::invalid("outer product of non-finite vector"));
    }
    let mut m = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = c[i] * c[j].conj();
        }
    }
    Ok(HermitianMatrix3::symmetrized(m))
}

/// `Re Tr(A B)`. For Hermitian `A`, `B` the trace is real; the imaginary part
/// is checked in debug builds and then dropped.
#[inline]
pub fn trace_product(a: &HermitianMatrix3, b: &HermitianMatrix3) -> f64 {
    // Tr(AB) = Σ_ij a_ij b_ji = Σ_ij a_ij conj(b_ij)
    let mut re = 0.0;
    for (ra, rb) in a.0.iter().zip(b.0.iter()) {
        for (x, y) in ra.iter().zip(rb.iter()) {
            re += x.re * y.re + x.im * y.im;
        }
    }
    debug_assert!({
        let im: f64 =
            a.0.iter()
                .flatten()
                .zip(b.0.iter().flatten())
                .map(|(x, y)| x.im * y.re - x.re * y.im)
                .sum();
        im.abs() <= tol::TRACE_IMAG * (1.0 + a.frobenius_norm() * b.frobenius_norm())
    });
    re
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen3 {
    pub values: [f64; 3],
    pub vectors: [CVector3; 3],
}

/// Cyclic complex Jacobi eigensolver.
pub fn hermitian_eig(a: &HermitianMatrix3) -> Result<Eigen3> {
    let mut m = a.0;
    if !m.iter().flatten().all(|c| is_finite(*c)) {
        return Err(TomoError::invalid(
            "eigendecomposition of non-finite matrix",
        ));
    }
    let mut v = HermitianMatrix3::identity().0;
    let threshold = tol::JACOBI_OFF_DIAG * a.frobenius_norm().max(1.0);

    let off_norm = |m: &Raw3| -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    s += m[i][j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..tol::JACOBI_MAX_SWEEPS {
        if off_norm(&m) < threshold {
            converged = true;
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = m[p][q];
            let g = apq.norm();
            if g < f64::MIN_POSITIVE {
                continue;
            }
            let phase = apq / g;
            let tau = (m[q][q].re - m[p][p].re) / (2.0 * g);
            let t = if tau >= 0.0 {
                1.0 / (tau + (1.0 + tau * tau).sqrt())
            } else {
                -1.0 / (-tau + (1.0 + tau * tau).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;

            let mut j = HermitianMatrix3::identity().0;
            j[p][p] = Complex::new(c, 0.0);
            j[p][q] = Complex::new(s, 0.0);
            j[q][p] = phase.conj() * -s;
            j[q][q] = phase.conj() * c;

            m = matmul(&adjoint(&j), &matmul(&m, &j));
            m[p][q] = ZERO;
            m[q][p] = ZERO;
            for (i, row) in m.iter_mut().enumerate() {
                row[i].im = 0.0;
            }
            v = matmul(&v, &j);
        }
    }
    if !converged && off_norm(&m) >= threshold {
        return Err(TomoError::NumericalFailure(format!(
            "Jacobi eigensolver did not converge in {} sweeps",
            tol::JACOBI_MAX_SWEEPS
        )));
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| m[x][x].re.total_cmp(&m[y][y].re));
    let values = order.map(|k| m[k][k].re);
    let vectors = order.map(|k| CVector3([v[0][k], v[1][k], v[2][k]]));
    Ok(Eigen3 { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eta() -> Complex {
        Complex::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn outer_of_basis_vector_is_projector() {
        let p = outer(&CVector3::basis(0)).unwrap();
        let expected = HermitianMatrix3::from_real_diagonal([1.0, 0.0, 0.0]).unwrap();
        assert!(p.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn outer_of_symmetric_superposition() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = outer(&CVector3::from_real([s, s, 0.0]).unwrap()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i < 2 && j < 2 { 0.5 } else { 0.0 };
                assert!((p.entry(i, j) - c(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn outer_of_fourier_vector() {
        let r = 1.0 / 3f64.sqrt();
        let v = CVector3::new([c(r, 0.0), eta() * r, eta().conj() * r]).unwrap();
        let p = outer(&v).unwrap();
        for i in 0..3 {
            assert!((p.entry(i, i).re - 1.0 / 3.0).abs() < 1e-15);
            for j in 0..3 {
                assert!((p.entry(i, j).norm() - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        assert!((p.trace() - v.norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn outer_rejects_non_finite() {
        assert!(CVector3::from_real([f64::NAN, 0.0, 0.0]).is_err());
        let bad = CVector3([c(f64::INFINITY, 0.0), ZERO, ZERO]);
        assert!(matches!(outer(&bad), Err(TomoError::InvalidInput(_))));
    }

    #[test]
    fn trace_product_examples() {
        let id = HermitianMatrix3::identity();
        assert!((trace_product(&id, &(id * (1.0 / 3.0))) - 1.0).abs() < 1e-15);

        let p0 = HermitianMatrix3::from_real_diagonal([1.0, 0.0, 0.0]).unwrap();
        let p1 = HermitianMatrix3::from_real_diagonal([0.0, 1.0, 0.0]).unwrap();
        assert_eq!(trace_product(&p0, &p1), 0.0);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = outer(&CVector3::from_real([s, s, 0.0]).unwrap()).unwrap() * (1.0 / 3.0);
        assert!((trace_product(&m, &p0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn hermitian_constructor_rejects_asymmetric() {
        let mut m = [[ZERO; 3]; 3];
        m[0][1] = c(1.0, 0.0);
        assert!(HermitianMatrix3::new(m).is_err());
        m[1][0] = c(1.0, 0.0);
        assert!(HermitianMatrix3::new(m).is_ok());
    }

    #[test]
    fn eig_examples() {
        let e = hermitian_eig(&HermitianMatrix3::identity()).unwrap();
        assert_eq!(e.values, [1.0, 1.0, 1.0]);

        let e =
            hermitian_eig(&HermitianMatrix3::from_real_diagonal([3.0, 1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(e.values, [1.0, 2.0, 3.0]);

        let r = 1.0 / 3f64.sqrt();
        let p = outer(&CVector3::from_real([r, r, r]).unwrap()).unwrap();
        let e = hermitian_eig(&p).unwrap();
        assert!(e.values[0].abs() < 1e-14);
        assert!(e.values[1].abs() < 1e-14);
        assert!((e.values[2] - 1.0).abs() < 1e-14);
    }

    fn arb_hermitian() -> impl Strategy<Value = HermitianMatrix3> {
        proptest::collection::vec(-2.0f64..2.0, 9).prop_map(|x| {
            let m = [
                [c(x[0], 0.0), c(x[3], x[4]), c(x[5], x[6])],
                [c(x[3], -x[4]), c(x[1], 0.0), c(x[7], x[8])],
                [c(x[5], -x[6]), c(x[7], -x[8]), c(x[2], 0.0)],
            ];
            HermitianMatrix3::new(m).unwrap()
        })
    }

    proptest! {
        #[test]
        fn eig_reconstructs_and_preserves_spectral_sums(a in arb_hermitian()) {
            let e = hermitian_eig(&a).unwrap();
            prop_assert!(e.values[0] <= e.values[1] && e.values[1] <= e.values[2]);

            let sum: f64 = e.values.iter().sum();
            prop_assert!((sum - a.trace()).abs() < 1e-10);
            let sum_sq: f64 = e.values.iter().map(|l| l * l).sum();
            prop_assert!((sum_sq - trace_product(&a, &a)).abs() < 1e-10);

            for (l, v) in e.values.iter().zip(e.vectors.iter()) {
                let av: Vec<Complex> = (0..3)
                    .map(|i| (0..3).map(|j| a.entry(i, j) * v.components()[j]).sum())
                    .collect();
                for i in 0..3 {
                    prop_assert!((av[i] - v.components()[i] * *l).norm() < 1e-10);
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    let ip = e.vectors[i].inner(&e.vectors[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((ip - c(want, 0.0)).norm() < 1e-10);
                }
            }

            let mut recon = HermitianMatrix3::zero();
            for (l, v) in e.values.iter().zip(e.vectors.iter()) {
                recon = recon + outer(v).unwrap() * *l;
            }
            prop_assert!(recon.max_abs_diff(&a) < 1e-10);
        }

        #[test]
        fn trace_product_is_symmetric(a in arb_hermitian(), b in arb_hermitian()) {
            prop_assert!((trace_product(&a, &b) - trace_product(&b, &a)).abs() < 1e-12);
        }
    }
}
