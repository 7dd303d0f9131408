//! Passive linear-optics networks and their lifts to fixed-photon-number sectors.
//!
//! A network is an `N x N` unitary `Gamma` on mode operators. Its lift `R(Gamma)`
//! acts on a Fock sector with matrix elements
//!
//! ```text
//! <m| R(Gamma) |n> = perm(Gamma[m, n]) / sqrt(prod_i m_i! prod_j n_j!)
//! ```
//!
//! where `Gamma[m, n]` repeats row `i` of `Gamma` `m_i` times and column `j` `n_j`
//! times. This is a genuine representation of `U(N)`: it satisfies
//! `R(G1 G2) = R(G1) R(G2)` and `R(exp(-i s Lambda)) = exp(-i s R(Lambda))` with
//! `R(Lambda) = sum_ij Lambda_ij a_i^dagger a_j`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::{FockBasis, StateVector};
use crate::linalg::{
    self, c, ensure_square, expm_hermitian, hermiticity_deviation, real, unitarity_deviation,
    CMatrix, ComplexMatrixJson,
};
use crate::{Error, Result, DEFAULT_TOL};

/// Largest matrix handed to [`permanent`].
pub const MAX_PERMANENT_SIZE: usize = 20;

/// Names accepted by [`ModeUnitary::builtin`].
pub const BUILTIN_UNITARIES: &[&str] = &["bs50", "phase2:pi/2", "tritter3", "phase3:2pi/3"];

/// An `N x N` unitary acting on mode annihilation operators.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    mat: CMatrix,
}

impl ModeUnitary {
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::with_tolerance(mat, DEFAULT_TOL)
    }

    pub fn with_tolerance(mat: CMatrix, tol: f64) -> Result<Self> {
        ensure_square(&mat)?;
        let deviation = unitarity_deviation(&mat);
        if !(deviation < tol) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix already known to be unitary (e.g. a product of unitaries).
    pub(crate) fn new_unchecked(mat: CMatrix) -> Self {
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMatrix::identity(dim, dim),
        }
    }

    /// Named networks: the balanced beam splitter `bs50`, the quarter-wave phase
    /// `phase2:pi/2`, the balanced three-mode `tritter3` and the `phase3:2pi/3`
    /// shift on the last of three modes. `identity:N` gives the `N`-mode identity.
    pub fn builtin(name: &str) -> Result<Self> {
        let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let mat = match name {
            "bs50" => {
                let r = FRAC_1_SQRT_2;
                CMatrix::from_row_slice(2, 2, &[real(r), real(r), real(-r), real(r)])
            }
            "phase2:pi/2" => CMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), c(0.0, 1.0)]),
            "tritter3" => {
                let s = 1.0 / 3f64.sqrt();
                CMatrix::from_fn(3, 3, |i, j| omega.powu((i * j) as u32) * s)
            }
            "phase3:2pi/3" => {
                let mut m = CMatrix::identity(3, 3);
                m[(2, 2)] = omega;
                m
            }
            other => {
                if let Some(dim) = other.strip_prefix("identity:") {
                    let dim: usize = dim.parse().map_err(|_| Error::UnknownBuiltin {
                        kind: "unitary",
                        name: name.to_string(),
                    })?;
                    if dim == 0 {
                        return Err(Error::InvalidArgument("identity needs at least one mode".into()));
                    }
                    return Ok(Self::identity(dim));
                }
                return Err(Error::UnknownBuiltin {
                    kind: "unitary",
                    name: name.to_string(),
                });
            }
        };
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// `self * other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &ModeUnitary) -> Result<ModeUnitary> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self::new_unchecked(&self.mat * &other.mat))
    }

    pub fn adjoint(&self) -> ModeUnitary {
        Self::new_unchecked(self.mat.adjoint())
    }

    pub fn to_json(&self) -> UnitaryJson {
        UnitaryJson {
            dim: self.dim(),
            matrix: ComplexMatrixJson::from_rows(&self.mat),
        }
    }

    pub fn from_json(json: &UnitaryJson, tol: f64) -> Result<Self> {
        let mat = json.matrix.to_matrix()?;
        if mat.nrows() != json.dim || mat.ncols() != json.dim {
            return Err(Error::Parse(format!(
                "declared dim {} but matrix is {}x{}",
                json.dim,
                mat.nrows(),
                mat.ncols()
            )));
        }
        Self::with_tolerance(mat, tol)
    }
}

/// `{"dim":N,"re":[[..]],"im":[[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryJson {
    pub dim: usize,
    #[serde(flatten)]
    pub matrix: ComplexMatrixJson,
}

/// Hermitian `N x N` generator `Lambda` of the one-parameter family `exp(-i s Lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianGenerator {
    mat: CMatrix,
}

impl HermitianGenerator {
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::with_tolerance(mat, DEFAULT_TOL)
    }

    pub fn with_tolerance(mat: CMatrix, tol: f64) -> Result<Self> {
        ensure_square(&mat)?;
        let deviation = hermiticity_deviation(&mat);
        if !(deviation < tol) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { mat })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            mat: CMatrix::from_fn(n, n, |i, j| if i == j { real(values[i]) } else { real(0.0) }),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// `exp(-i s Lambda)`.
    pub fn exponentiate(&self, s: f64) -> ModeUnitary {
        ModeUnitary::new_unchecked(expm_hermitian(&self.mat, s))
    }
}

/// A square operator on one Fock sector.
#[derive(Debug, Clone)]
pub struct FockOperator {
    basis: Arc<FockBasis>,
    mat: CMatrix,
}

impl FockOperator {
    pub fn new(basis: Arc<FockBasis>, mat: CMatrix) -> Result<Self> {
        let n = basis.size();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(Self { basis, mat })
    }

    pub fn identity(basis: Arc<FockBasis>) -> Self {
        let n = basis.size();
        Self {
            basis,
            mat: CMatrix::identity(n, n),
        }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.basis.ensure_same(state.basis())?;
        StateVector::from_amplitudes(self.basis.clone(), &self.mat * state.amplitudes())
    }

    /// `self * other`.
    pub fn compose(&self, other: &FockOperator) -> Result<FockOperator> {
        self.basis.ensure_same(&other.basis)?;
        Ok(Self {
            basis: self.basis.clone(),
            mat: &self.mat * &other.mat,
        })
    }

    pub fn adjoint(&self) -> FockOperator {
        Self {
            basis: self.basis.clone(),
            mat: self.mat.adjoint(),
        }
    }

    /// `exp(-i s A)` for a Hermitian operator `A`.
    pub fn exp_hermitian(&self, s: f64) -> FockOperator {
        Self {
            basis: self.basis.clone(),
            mat: expm_hermitian(&self.mat, s),
        }
    }

    pub fn max_diff(&self, other: &FockOperator) -> Result<f64> {
        self.basis.ensure_same(&other.basis)?;
        Ok(linalg::max_abs_diff(&self.mat, &other.mat))
    }
}

fn check_dims(dim: usize, basis: &FockBasis) -> Result<()> {
    if dim != basis.modes() {
        return Err(Error::DimensionMismatch {
            expected: basis.modes(),
            found: dim,
        });
    }
    Ok(())
}

/// Permanent by Ryser's formula, visiting column subsets in Gray-code order.
pub fn permanent(mat: &CMatrix) -> Result<Complex64> {
    let n = ensure_square(mat)?;
    if n > MAX_PERMANENT_SIZE {
        return Err(Error::Capacity {
            what: "permanent",
            size: n as u128,
            limit: MAX_PERMANENT_SIZE as u128,
        });
    }
    Ok(ryser(mat))
}

fn ryser(mat: &CMatrix) -> Complex64 {
    let n = mat.nrows();
    if n == 0 {
        return real(1.0);
    }
    let mut row_sums = vec![real(0.0); n];
    let mut total = real(0.0);
    let mut odd = false;
    for step in 1u64..(1u64 << n) {
        let col = step.trailing_zeros() as usize;
        let gray = step ^ (step >> 1);
        if gray & (1 << col) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += mat[(i, col)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= mat[(i, col)];
            }
        }
        odd = !odd;
        let prod: Complex64 = row_sums.iter().product();
        if odd {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

fn repeated_indices(occ: &[usize]) -> Vec<usize> {
    occ.iter()
        .enumerate()
        .flat_map(|(mode, &k)| std::iter::repeat_n(mode, k))
        .collect()
}

/// `R(Gamma)` on `basis` from permanents of row/column-repeated submatrices.
pub fn lift_unitary(gamma: &ModeUnitary, basis: &Arc<FockBasis>) -> Result<FockOperator> {
    check_dims(gamma.dim(), basis)?;
    let n = basis.photons();
    if n > MAX_PERMANENT_SIZE {
        return Err(Error::Capacity {
            what: "permanent",
            size: n as u128,
            limit: MAX_PERMANENT_SIZE as u128,
        });
    }
    let size = basis.size();
    let reps: Vec<Vec<usize>> = basis
        .elements()
        .iter()
        .map(|o| repeated_indices(o.as_slice()))
        .collect();
    let norms: Vec<f64> = basis
        .elements()
        .iter()
        .map(|o| o.factorial_product().sqrt())
        .collect();
    let g = gamma.matrix();
    let mut out = CMatrix::zeros(size, size);
    let mut sub = CMatrix::zeros(n, n);
    for row in 0..size {
        for col in 0..size {
            for (a, &i) in reps[row].iter().enumerate() {
                for (b, &j) in reps[col].iter().enumerate() {
                    sub[(a, b)] = g[(i, j)];
                }
            }
            out[(row, col)] = ryser(&sub) / (norms[row] * norms[col]);
        }
    }
    FockOperator::new(basis.clone(), out)
}

/// `R(Lambda) = sum_ij Lambda_ij a_i^dagger a_j` on `basis`.
pub fn lift_generator(lambda: &HermitianGenerator, basis: &Arc<FockBasis>) -> Result<FockOperator> {
    check_dims(lambda.dim(), basis)?;
    let size = basis.size();
    let mut out = CMatrix::zeros(size, size);
    let l = lambda.matrix();
    for i in 0..lambda.dim() {
        for j in 0..lambda.dim() {
            if l[(i, j)] == real(0.0) {
                continue;
            }
            out += basis.hop_matrix(i, j)? * l[(i, j)];
        }
    }
    FockOperator::new(basis.clone(), out)
}

/// Independent route to `R(Gamma)`: take the principal generator `Lambda` with
/// `Gamma = exp(-i Lambda)` and exponentiate its lift.
pub fn lift_unitary_via_exp(gamma: &ModeUnitary, basis: &Arc<FockBasis>) -> Result<FockOperator> {
    check_dims(gamma.dim(), basis)?;
    let (lambda, _) = linalg::unitary_generator(gamma.matrix());
    let generator = lift_generator(&HermitianGenerator { mat: lambda }, basis)?;
    Ok(generator.exp_hermitian(1.0))
}
