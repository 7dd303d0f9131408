//! Small dense complex linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type CMatrix2 = Matrix2<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs<R, C, S>(m: &nalgebra::Matrix<Complex64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<Complex64, R, C>,
{
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |A - B|` entry-wise. Panics on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// `max |M^dagger M - I|`.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let n = m.ncols();
    max_abs_diff(&(m.adjoint() * m), &CMatrix::identity(n, n))
}

/// `max |M - M^dagger|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Eigendecomposition of a Hermitian matrix (the anti-Hermitian part is dropped).
pub fn hermitian_eigen(h: &CMatrix) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    let sym = (h + h.adjoint()) * real(0.5);
    SymmetricEigen::new(sym)
}

/// `exp(-i s H)` for Hermitian `H` via its eigendecomposition.
pub fn expm_hermitian(h: &CMatrix, s: f64) -> CMatrix {
    let eig = hermitian_eigen(h);
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -s * l)),
    );
    v * CMatrix::from_diagonal(&phases) * v.adjoint()
}

/// Principal logarithm of a unitary: returns Hermitian `A` with `exp(-i A) = U`
/// and the eigenphases of `U` in `(-pi, pi]`.
pub fn unitary_generator(u: &CMatrix) -> (CMatrix, Vec<f64>) {
    let n = u.nrows();
    let (q, t) = nalgebra::Schur::new(u.clone()).unpack();
    let phases: Vec<f64> = (0..n)
        .map(|k| {
            let phi = t[(k, k)].arg();
            if phi <= -std::f64::consts::PI {
                std::f64::consts::PI
            } else {
                phi
            }
        })
        .collect();
    let diag = DVector::from_iterator(n, phases.iter().map(|&p| real(-p)));
    let a = &q * CMatrix::from_diagonal(&diag) * q.adjoint();
    ((&a + a.adjoint()) * real(0.5), phases)
}

pub fn to_matrix2(m: &CMatrix) -> CMatrix2 {
    assert_eq!(m.shape(), (2, 2));
    CMatrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// `{"re": [[..]], "im": [[..]]}` row-major form of a complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ComplexMatrixJson {
    pub fn from_rows<R, C, S>(m: &nalgebra::Matrix<Complex64, R, C, S>) -> Self
    where
        R: nalgebra::Dim,
        C: nalgebra::Dim,
        S: nalgebra::RawStorage<Complex64, R, C>,
    {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.re.len();
        if self.im.len() != rows {
            return Err(Error::Parse(format!(
                "re has {rows} rows but im has {}",
                self.im.len()
            )));
        }
        let cols = self.re.first().map_or(0, Vec::len);
        for (r, (re, im)) in self.re.iter().zip(&self.im).enumerate() {
            if re.len() != cols || im.len() != cols {
                return Err(Error::Parse(format!("row {r} is ragged")));
            }
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            c(self.re[i][j], self.im[i][j])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal() {
        let h = CMatrix::from_diagonal(&DVector::from_vec(vec![real(1.0), real(-2.0)]));
        let u = expm_hermitian(&h, 0.3);
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -0.3)).norm() < 1e-14);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, 0.6)).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn unitary_log_round_trip() {
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[
                real(0.3),
                c(0.1, 0.4),
                c(-0.2, 0.0),
                c(0.1, -0.4),
                real(-1.1),
                c(0.0, 0.7),
                c(-0.2, 0.0),
                c(0.0, -0.7),
                real(0.5),
            ],
        );
        let u = expm_hermitian(&h, 1.0);
        let (a, phases) = unitary_generator(&u);
        assert!(phases.iter().all(|p| *p > -std::f64::consts::PI && *p <= std::f64::consts::PI));
        assert!(max_abs_diff(&expm_hermitian(&a, 1.0), &u) < 1e-12);
    }

    #[test]
    fn spectral_norm_of_rank_one() {
        let v = CVector::from_vec(vec![real(3.0), c(0.0, 4.0)]);
        let m = &v * v.adjoint();
        assert!((spectral_norm(&m) - 25.0).abs() < 1e-12);
    }
}
