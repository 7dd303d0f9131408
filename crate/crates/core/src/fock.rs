//! Fixed-photon-number Fock bases, dense state vectors and ladder operators.
//!
//! A [`FockBasis`] enumerates every occupation vector of `modes` modes holding
//! exactly `photons` photons, in reverse-lexicographic order (`|40>` before `|31>`).
//! [`StateVector`]s carry a shared reference to their basis; ladder operators move
//! a state to the neighbouring sector.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, CVector};
use crate::{Error, Result};

/// Largest basis the crate will enumerate.
pub const MAX_BASIS_SIZE: u128 = 1_000_000;

/// Photon counts per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationVector(Vec<usize>);

impl OccupationVector {
    pub fn new(occ: Vec<usize>) -> Self {
        Self(occ)
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `prod_i occ_i!` as a float.
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&k| factorial(k)).product()
    }
}

impl From<Vec<usize>> for OccupationVector {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl From<&[usize]> for OccupationVector {
    fn from(v: &[usize]) -> Self {
        Self(v.to_vec())
    }
}

impl std::ops::Index<usize> for OccupationVector {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 && self.0.iter().any(|&x| x > 9) {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

pub(crate) fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of occupation vectors of `modes` modes with `photons` photons in total.
pub fn sector_size(modes: usize, photons: usize) -> Option<u128> {
    if modes == 0 {
        return Some(u128::from(photons == 0));
    }
    binomial((photons + modes - 1) as u128, (modes - 1) as u128)
}

/// All occupation vectors with a fixed total photon number, canonically ordered.
#[derive(Debug)]
pub struct FockBasis {
    modes: usize,
    photons: usize,
    elements: Vec<OccupationVector>,
    index: HashMap<OccupationVector, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes && self.photons == other.photons
    }
}

impl Eq for FockBasis {}

impl FockBasis {
    pub fn new(modes: usize, photons: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument("a basis needs at least one mode".into()));
        }
        let size = sector_size(modes, photons).unwrap_or(u128::MAX);
        if size > MAX_BASIS_SIZE {
            return Err(Error::Capacity {
                what: "Fock basis",
                size,
                limit: MAX_BASIS_SIZE,
            });
        }
        let mut elements = Vec::with_capacity(size as usize);
        let mut scratch = vec![0; modes];
        fill_reverse_lex(&mut scratch, 0, photons, &mut elements);
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Ok(Self {
            modes,
            photons,
            elements,
            index,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[OccupationVector] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &OccupationVector {
        &self.elements[i]
    }

    pub fn index_of(&self, occ: &OccupationVector) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Like [`index_of`](Self::index_of) but explains why an occupation vector is
    /// not part of the basis.
    pub fn require_index(&self, occ: &OccupationVector) -> Result<usize> {
        if occ.modes() != self.modes {
            return Err(Error::InvalidOccupation {
                occ: occ.0.clone(),
                reason: format!("expected {} modes", self.modes),
            });
        }
        self.index_of(occ).ok_or_else(|| Error::InvalidOccupation {
            occ: occ.0.clone(),
            reason: format!("total photon number must be {}", self.photons),
        })
    }

    fn label(&self) -> String {
        format!("modes={}, photons={}", self.modes, self.photons)
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::ModeOutOfRange {
                mode,
                modes: self.modes,
            });
        }
        Ok(())
    }

    pub(crate) fn ensure_same(&self, other: &FockBasis) -> Result<()> {
        if self != other {
            return Err(Error::BasisMismatch(self.label(), other.label()));
        }
        Ok(())
    }

    /// Matrix of `a_mode` from this sector into `lower` (which must hold one photon less).
    pub fn annihilation_matrix(&self, mode: usize, lower: &FockBasis) -> Result<CMatrix> {
        self.check_mode(mode)?;
        if self.photons == 0 {
            return Err(Error::NoPhotons);
        }
        if lower.modes != self.modes || lower.photons + 1 != self.photons {
            return Err(Error::BasisMismatch(
                format!("modes={}, photons={}", self.modes, self.photons - 1),
                lower.label(),
            ));
        }
        let mut m = CMatrix::zeros(lower.size(), self.size());
        for (col, occ) in self.elements.iter().enumerate() {
            let k = occ[mode];
            if k == 0 {
                continue;
            }
            let mut target = occ.clone();
            target.0[mode] -= 1;
            let row = lower.index[&target];
            m[(row, col)] = Complex64::new((k as f64).sqrt(), 0.0);
        }
        Ok(m)
    }

    /// Matrix of `a_to^dagger a_from` on this sector.
    pub fn hop_matrix(&self, to: usize, from: usize) -> Result<CMatrix> {
        self.check_mode(to)?;
        self.check_mode(from)?;
        let mut m = CMatrix::zeros(self.size(), self.size());
        for (col, occ) in self.elements.iter().enumerate() {
            let k = occ[from];
            if k == 0 {
                continue;
            }
            let mut target = occ.clone();
            target.0[from] -= 1;
            let raised = target.0[to] + 1;
            target.0[to] = raised;
            let row = self.index[&target];
            m[(row, col)] = Complex64::new((k as f64 * raised as f64).sqrt(), 0.0);
        }
        Ok(m)
    }
}

fn fill_reverse_lex(
    scratch: &mut Vec<usize>,
    mode: usize,
    remaining: usize,
    out: &mut Vec<OccupationVector>,
) {
    if mode + 1 == scratch.len() {
        scratch[mode] = remaining;
        out.push(OccupationVector(scratch.clone()));
        return;
    }
    for k in (0..=remaining).rev() {
        scratch[mode] = k;
        fill_reverse_lex(scratch, mode + 1, remaining - k, out);
    }
}

/// Enumerate the `photons`-photon sector of `modes` modes.
pub fn enumerate_basis(modes: usize, photons: usize) -> Result<FockBasis> {
    FockBasis::new(modes, photons)
}

/// Dense amplitude vector over a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amp: CVector,
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis && self.amp == other.amp
    }
}

impl StateVector {
    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let amp = CVector::zeros(basis.size());
        Self { basis, amp }
    }

    pub fn from_amplitudes(basis: Arc<FockBasis>, amp: CVector) -> Result<Self> {
        if amp.len() != basis.size() {
            return Err(Error::DimensionMismatch {
                expected: basis.size(),
                found: amp.len(),
            });
        }
        Ok(Self { basis, amp })
    }

    /// `|occ>` as a normalized basis state.
    pub fn basis_state(basis: Arc<FockBasis>, occ: &[usize]) -> Result<Self> {
        Self::from_terms(basis, &[(occ.to_vec(), Complex64::new(1.0, 0.0))])
    }

    /// Superposition `sum_k c_k |occ_k>`; repeated occupation vectors accumulate.
    pub fn from_terms(basis: Arc<FockBasis>, terms: &[(Vec<usize>, Complex64)]) -> Result<Self> {
        let mut state = Self::zeros(basis);
        for (occ, amp) in terms {
            let i = state.basis.require_index(&OccupationVector::from(occ.as_slice()))?;
            state.amp[i] += amp;
        }
        Ok(state)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amp
    }

    pub fn amplitude(&self, occ: &[usize]) -> Option<Complex64> {
        self.basis
            .index_of(&OccupationVector::from(occ))
            .map(|i| self.amp[i])
    }

    /// Non-zero `(occupation, amplitude)` pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&OccupationVector, Complex64)> + '_ {
        self.basis
            .elements
            .iter()
            .zip(self.amp.iter())
            .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
            .map(|(o, a)| (o, *a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.amp.norm()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            basis: self.basis.clone(),
            amp: &self.amp * factor,
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: Complex64, other: &StateVector) -> Result<Self> {
        self.basis.ensure_same(&other.basis)?;
        Ok(Self {
            basis: self.basis.clone(),
            amp: &self.amp + &other.amp * factor,
        })
    }

    /// `<self, other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.basis.ensure_same(&other.basis)?;
        Ok(self.amp.dotc(&other.amp))
    }

    /// `max_k |self_k - other_k|`.
    pub fn max_diff(&self, other: &StateVector) -> Result<f64> {
        self.basis.ensure_same(&other.basis)?;
        Ok(self
            .amp
            .iter()
            .zip(other.amp.iter())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).norm())))
    }

    /// `a_mode |self>`, living on the sector with one photon less.
    pub fn annihilate(&self, mode: usize) -> Result<Self> {
        self.basis.check_mode(mode)?;
        if self.basis.photons == 0 {
            return Err(Error::NoPhotons);
        }
        let lower = Arc::new(FockBasis::new(self.basis.modes, self.basis.photons - 1)?);
        self.annihilate_into(mode, lower)
    }

    pub(crate) fn annihilate_into(&self, mode: usize, lower: Arc<FockBasis>) -> Result<Self> {
        let m = self.basis.annihilation_matrix(mode, &lower)?;
        Ok(Self {
            amp: m * &self.amp,
            basis: lower,
        })
    }

    /// `a_mode^dagger |self>`, living on the sector with one photon more.
    pub fn create(&self, mode: usize) -> Result<Self> {
        self.basis.check_mode(mode)?;
        let upper = Arc::new(FockBasis::new(self.basis.modes, self.basis.photons + 1)?);
        let m = upper.annihilation_matrix(mode, &self.basis)?;
        Ok(Self {
            amp: m.adjoint() * &self.amp,
            basis: upper,
        })
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            modes: self.basis.modes,
            photons: self.basis.photons,
            terms: terms_to_json(self),
        }
    }

    pub fn from_json(json: &StateJson) -> Result<Self> {
        let basis = Arc::new(FockBasis::new(json.modes, json.photons)?);
        terms_from_json(basis, &json.terms)
    }
}

/// One `{"occ": [..], "re": x, "im": y}` entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub occ: Vec<usize>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// `{"modes":N,"photons":n,"terms":[...]}`; omitted terms are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub modes: usize,
    pub photons: usize,
    pub terms: Vec<TermJson>,
}

pub(crate) fn terms_to_json(state: &StateVector) -> Vec<TermJson> {
    state
        .terms()
        .map(|(occ, a)| TermJson {
            occ: occ.as_slice().to_vec(),
            re: a.re,
            im: a.im,
        })
        .collect()
}

pub(crate) fn terms_from_json(basis: Arc<FockBasis>, terms: &[TermJson]) -> Result<StateVector> {
    let terms: Vec<_> = terms
        .iter()
        .map(|t| (t.occ.clone(), Complex64::new(t.re, t.im)))
        .collect();
    StateVector::from_terms(basis, &terms)
}
