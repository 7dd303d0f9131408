//! Photon-loss code pairs and the one-photon-loss correctability conditions.
//!
//! A two-dimensional code spanned by `|L>, |H>` in a fixed-photon-number sector
//! corrects a single photon loss iff for all modes `i, j`
//!
//! ```text
//! <H| a_i^dagger a_j |L> = 0,   <H| a_i^dagger a_j |H> = <L| a_i^dagger a_j |L> =: G_ij
//! ```
//!
//! i.e. `P a_i^dagger a_j P = G_ij P`. Equivalently the Gram matrix of the error
//! states `a_j |X>` equals `G (x) I_2`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::{terms_from_json, terms_to_json, FockBasis, StateVector, TermJson};
use crate::linalg::{self, hermitian_eigen, real, CMatrix, ComplexMatrixJson};
use crate::linopt::{lift_unitary, ModeUnitary};
use crate::{Error, Result, DEFAULT_TOL};

pub const BUILTIN_CODES: &[&str] = &["fourphoton", "threephoton"];

/// Logical basis states `|L>` and `|H>` of a two-dimensional code.
#[derive(Debug, Clone)]
pub struct CodePair {
    l: StateVector,
    h: StateVector,
    tol: f64,
}

impl CodePair {
    pub fn new(l: StateVector, h: StateVector) -> Result<Self> {
        Self::with_tolerance(l, h, DEFAULT_TOL)
    }

    /// Validates normalization, orthogonality and the shared sector. Inputs are
    /// never repaired.
    pub fn with_tolerance(l: StateVector, h: StateVector, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let mut failed = Vec::new();
        if l.basis() != h.basis() {
            failed.push(format!(
                "L and H live on different sectors (photons {} vs {}, modes {} vs {})",
                l.basis().photons(),
                h.basis().photons(),
                l.basis().modes(),
                h.basis().modes()
            ));
        } else {
            let overlap = l.inner(&h)?.norm();
            if !(overlap < tol) {
                failed.push(format!("|<L,H>| = {overlap:.3e} is not zero"));
            }
        }
        for (name, s) in [("L", &l), ("H", &h)] {
            let dev = (s.norm() - 1.0).abs();
            if !(dev < tol) {
                failed.push(format!("||{name}|| = {} is not 1", s.norm()));
            }
        }
        if !failed.is_empty() {
            return Err(Error::InvalidCode(failed));
        }
        Ok(Self { l, h, tol })
    }

    pub fn logical_l(&self) -> &StateVector {
        &self.l
    }

    pub fn logical_h(&self) -> &StateVector {
        &self.h
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        self.l.basis()
    }

    pub fn modes(&self) -> usize {
        self.basis().modes()
    }

    pub fn photons(&self) -> usize {
        self.basis().photons()
    }

    /// `alpha |L> + beta |H>`.
    pub fn encode(&self, alpha: Complex64, beta: Complex64) -> StateVector {
        self.l
            .scale(alpha)
            .add_scaled(beta, &self.h)
            .expect("L and H share a basis")
    }

    /// Encoding isometry `W` with columns `|L>, |H>`.
    pub fn encoder(&self) -> CMatrix {
        let mut w = CMatrix::zeros(self.basis().size(), 2);
        w.set_column(0, self.l.amplitudes());
        w.set_column(1, self.h.amplitudes());
        w
    }

    /// `P = |L><L| + |H><H|` on the code's sector.
    pub fn projector(&self) -> CMatrix {
        let w = self.encoder();
        &w * w.adjoint()
    }

    pub fn to_json(&self) -> CodeJson {
        CodeJson {
            modes: self.modes(),
            photons: self.photons(),
            l: terms_to_json(&self.l),
            h: terms_to_json(&self.h),
        }
    }

    pub fn from_json(json: &CodeJson, tol: f64) -> Result<Self> {
        let basis = Arc::new(FockBasis::new(json.modes, json.photons)?);
        let l = terms_from_json(basis.clone(), &json.l)?;
        let h = terms_from_json(basis, &json.h)?;
        Self::with_tolerance(l, h, tol)
    }
}

/// `{"modes":N,"photons":n,"L":[terms...],"H":[terms...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeJson {
    pub modes: usize,
    pub photons: usize,
    #[serde(rename = "L")]
    pub l: Vec<TermJson>,
    #[serde(rename = "H")]
    pub h: Vec<TermJson>,
}

/// The four-photon two-mode code and the three-photon three-mode code.
pub fn builtin_code(name: &str) -> Result<CodePair> {
    match name {
        "fourphoton" => {
            let basis = Arc::new(FockBasis::new(2, 4)?);
            let r = real(std::f64::consts::FRAC_1_SQRT_2);
            let l = StateVector::from_terms(basis.clone(), &[(vec![0, 4], r), (vec![4, 0], r)])?;
            let h = StateVector::basis_state(basis, &[2, 2])?;
            CodePair::new(l, h)
        }
        "threephoton" => {
            let basis = Arc::new(FockBasis::new(3, 3)?);
            let r = real(1.0 / 3f64.sqrt());
            let l = StateVector::from_terms(
                basis.clone(),
                &[(vec![0, 0, 3], r), (vec![0, 3, 0], r), (vec![3, 0, 0], r)],
            )?;
            let h = StateVector::basis_state(basis, &[1, 1, 1])?;
            CodePair::new(l, h)
        }
        _ => Err(Error::UnknownBuiltin {
            kind: "code",
            name: name.to_string(),
        }),
    }
}

/// Hermitian table `G_ij = <L| a_i^dagger a_j |L>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix(CMatrix);

impl GMatrix {
    pub fn new(g: CMatrix) -> Self {
        Self(g)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermiticity_deviation(&self.0)
    }

    /// Eigenvalues (ascending) and eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        let eig = hermitian_eigen(&self.0);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_columns(
            &order
                .iter()
                .map(|&k| eig.eigenvectors.column(k).into_owned())
                .collect::<Vec<_>>(),
        );
        (values, vectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().0.first().copied().unwrap_or(0.0)
    }

    /// `G` of the code `(R(Gamma)|L>, R(Gamma)|H>)`: `conj(Gamma) G Gamma^T`.
    pub fn after_network(&self, gamma: &ModeUnitary) -> GMatrix {
        let u = gamma.matrix();
        GMatrix(u.conjugate() * &self.0 * u.transpose())
    }

    /// The same code's `G` written in output modes `b` related by `a = Gamma b`:
    /// `Gamma^T G conj(Gamma)`. Equals [`after_network`](Self::after_network) for
    /// `Gamma^dagger`.
    pub fn in_output_modes(&self, gamma: &ModeUnitary) -> GMatrix {
        let u = gamma.matrix();
        GMatrix(u.transpose() * &self.0 * u.conjugate())
    }
}

impl Serialize for GMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexMatrixJson::from_rows(&self.0).serialize(s)
    }
}

/// Outcome of [`verify_code`]; raw violation magnitudes are always reported.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub correctable: bool,
    pub g: Option<GMatrix>,
    /// `max_ij |<H| a_i^dagger a_j |L>|` (both orderings).
    pub max_offdiag_violation: f64,
    /// `max_ij |<H| a_i^dagger a_j |H> - <L| a_i^dagger a_j |L>|`.
    pub max_diag_violation: f64,
    /// `max |Gram - G (x) I_2|` with `G` taken from `|L>`.
    pub gram_structure_violation: f64,
    /// `max(0, -lambda_min(G))`; a Gram matrix is positive semi-definite.
    pub psd_violation: f64,
    pub tolerance: f64,
}

/// Gram matrix `<a_i X, a_j Y>` of the one-photon-loss error states, ordered
/// `(mode, logical)` with `L` before `H`.
pub fn error_gram(code: &CodePair) -> Result<CMatrix> {
    let errors = error_states(code)?;
    let k = errors.len();
    let mut gram = CMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            gram[(a, b)] = errors[a].inner(&errors[b])?;
        }
    }
    Ok(gram)
}

/// `a_j |X>` for every mode `j` and `X in {L, H}`, ordered `(mode, logical)`.
pub fn error_states(code: &CodePair) -> Result<Vec<StateVector>> {
    if code.photons() == 0 {
        return Err(Error::NoPhotons);
    }
    let lower = Arc::new(FockBasis::new(code.modes(), code.photons() - 1)?);
    let mut out = Vec::with_capacity(2 * code.modes());
    for j in 0..code.modes() {
        out.push(code.l.annihilate_into(j, lower.clone())?);
        out.push(code.h.annihilate_into(j, lower.clone())?);
    }
    Ok(out)
}

pub fn verify_code(code: &CodePair) -> Result<VerificationReport> {
    verify_code_with_tolerance(code, code.tol)
}

pub fn verify_code_with_tolerance(code: &CodePair, tol: f64) -> Result<VerificationReport> {
    let n = code.modes();
    let gram = error_gram(code)?;
    // <X| a_i^dagger a_j |Y> = gram[(2i + x, 2j + y)]
    let entry = |i: usize, x: usize, j: usize, y: usize| gram[(2 * i + x, 2 * j + y)];
    let mut offdiag = 0.0_f64;
    let mut diag = 0.0_f64;
    let g = CMatrix::from_fn(n, n, |i, j| entry(i, 0, j, 0));
    for i in 0..n {
        for j in 0..n {
            offdiag = offdiag.max(entry(i, 1, j, 0).norm()).max(entry(i, 0, j, 1).norm());
            diag = diag.max((entry(i, 1, j, 1) - entry(i, 0, j, 0)).norm());
        }
    }
    let expected = g.kronecker(&CMatrix::identity(2, 2));
    let gram_violation = linalg::max_abs_diff(&gram, &expected);
    let g = GMatrix(g);
    let psd_violation = (-g.min_eigenvalue()).max(0.0);
    let correctable = offdiag < tol && diag < tol;
    Ok(VerificationReport {
        correctable,
        g: correctable.then_some(g),
        max_offdiag_violation: offdiag,
        max_diag_violation: diag,
        gram_structure_violation: gram_violation,
        psd_violation,
        tolerance: tol,
    })
}

/// `(R(Gamma)|L>, R(Gamma)|H>)`.
pub fn transform_code(code: &CodePair, gamma: &ModeUnitary) -> Result<CodePair> {
    let r = lift_unitary(gamma, code.basis())?;
    CodePair::with_tolerance(r.apply(&code.l)?, r.apply(&code.h)?, code.tol)
}

/// `G` of a correctable code, or [`Error::NotCorrectable`].
pub fn g_matrix(code: &CodePair) -> Result<GMatrix> {
    verify_code(code)?.g.ok_or(Error::NotCorrectable)
}

#[cfg(test)]
pub(crate) fn diag_matrix(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| real(v)),
    ))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::random::{haar_unitary, seeded_rng};

    /// `<X| a_i^dagger a_j |Y>` through the sector hop matrix, independent of the
    /// ladder route used by `verify_code`.
    fn hop_expectation(code: &CodePair, x: &StateVector, i: usize, j: usize, y: &StateVector) -> Complex64 {
        let hop = code.basis().hop_matrix(i, j).unwrap();
        x.amplitudes().dotc(&(hop * y.amplitudes()))
    }

    /// Five photons in two modes with `G = diag(3, 2)`.
    pub(crate) fn asymmetric_code() -> CodePair {
        let basis = Arc::new(FockBasis::new(2, 5).unwrap());
        let l = StateVector::from_terms(
            basis.clone(),
            &[(vec![5, 0], real(0.6f64.sqrt())), (vec![0, 5], real(0.4f64.sqrt()))],
        )
        .unwrap();
        let h = StateVector::basis_state(basis, &[3, 2]).unwrap();
        CodePair::new(l, h).unwrap()
    }

    fn dual_rail() -> CodePair {
        let basis = Arc::new(FockBasis::new(2, 1).unwrap());
        CodePair::new(
            StateVector::basis_state(basis.clone(), &[1, 0]).unwrap(),
            StateVector::basis_state(basis, &[0, 1]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn builtin_g_matrices_match_hop_oracle() {
        for (name, expect) in [("fourphoton", diag_matrix(&[2.0, 2.0])), ("threephoton", diag_matrix(&[1.0; 3]))] {
            let code = builtin_code(name).unwrap();
            let n = code.modes();
            let oracle = CMatrix::from_fn(n, n, |i, j| {
                hop_expectation(&code, code.logical_l(), i, j, code.logical_l())
            });
            assert!(linalg::max_abs_diff(&oracle, &expect) < 1e-14, "{name}");
            let report = verify_code(&code).unwrap();
            assert!(report.correctable, "{name}");
            assert!(linalg::max_abs_diff(report.g.as_ref().unwrap().matrix(), &expect) < 1e-12);
            assert!(report.max_offdiag_violation < 1e-12);
            assert!(report.max_diag_violation < 1e-12);
            assert!(report.gram_structure_violation < 1e-12);
            assert_eq!(report.psd_violation, 0.0);
        }
    }

    #[test]
    fn builtin_states() {
        let four = builtin_code("fourphoton").unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((four.logical_l().amplitude(&[0, 4]).unwrap() - real(r)).norm() < 1e-16);
        assert!((four.logical_l().amplitude(&[4, 0]).unwrap() - real(r)).norm() < 1e-16);
        assert_eq!(four.logical_h().amplitude(&[2, 2]), Some(real(1.0)));
        let three = builtin_code("threephoton").unwrap();
        for occ in [[0, 0, 3], [0, 3, 0], [3, 0, 0]] {
            assert!((three.logical_l().amplitude(&occ).unwrap() - real(1.0 / 3f64.sqrt())).norm() < 1e-16);
        }
        assert_eq!(three.logical_h().amplitude(&[1, 1, 1]), Some(real(1.0)));
        assert!(matches!(builtin_code("fivephoton"), Err(Error::UnknownBuiltin { .. })));
    }

    #[test]
    fn inner_product_examples() {
        let four = builtin_code("fourphoton").unwrap();
        assert_eq!(four.logical_l().inner(four.logical_h()).unwrap(), real(0.0));
        let three = builtin_code("threephoton").unwrap();
        assert!((three.logical_l().inner(three.logical_l()).unwrap() - real(1.0)).norm() < 1e-15);
        let al = three.logical_l().annihilate(0).unwrap();
        let ah = three.logical_h().annihilate(0).unwrap();
        assert!(al.inner(&ah).unwrap().norm() < 1e-15);
    }

    #[test]
    fn dual_rail_is_not_correctable() {
        let report = verify_code(&dual_rail()).unwrap();
        assert!(!report.correctable);
        assert!(report.g.is_none());
        // <H| a_2^dagger a_1 |L> = <01|01> = 1
        assert!((report.max_offdiag_violation - 1.0).abs() < 1e-15);
        assert!(matches!(g_matrix(&dual_rail()), Err(Error::NotCorrectable)));
    }

    #[test]
    fn invalid_pairs_are_rejected_with_reasons() {
        let basis = Arc::new(FockBasis::new(2, 2).unwrap());
        let l = StateVector::from_terms(basis.clone(), &[(vec![2, 0], real(2.0))]).unwrap();
        let h = StateVector::basis_state(basis.clone(), &[2, 0]).unwrap();
        match CodePair::new(l, h) {
            Err(Error::InvalidCode(reasons)) => {
                assert_eq!(reasons.len(), 2, "{reasons:?}");
                assert!(reasons.iter().any(|r| r.contains("<L,H>")));
                assert!(reasons.iter().any(|r| r.contains("||L||")));
            }
            other => panic!("expected InvalidCode, got {other:?}"),
        }
        let other = Arc::new(FockBasis::new(2, 3).unwrap());
        let res = CodePair::new(
            StateVector::basis_state(basis, &[2, 0]).unwrap(),
            StateVector::basis_state(other, &[3, 0]).unwrap(),
        );
        assert!(matches!(res, Err(Error::InvalidCode(_))));
    }

    #[test]
    fn identity_transform_keeps_code() {
        let code = builtin_code("threephoton").unwrap();
        let same = transform_code(&code, &ModeUnitary::identity(3)).unwrap();
        assert!(same.logical_l().max_diff(code.logical_l()).unwrap() < 1e-15);
        let g = g_matrix(&same).unwrap();
        assert!(linalg::max_abs_diff(g.matrix(), &CMatrix::identity(3, 3)) < 1e-14);
    }

    #[test]
    fn third_phase_keeps_threephoton_g() {
        let code = builtin_code("threephoton").unwrap();
        let moved = transform_code(&code, &ModeUnitary::builtin("phase3:2pi/3").unwrap()).unwrap();
        let g = g_matrix(&moved).unwrap();
        assert!(linalg::max_abs_diff(g.matrix(), &CMatrix::identity(3, 3)) < 1e-12);
    }

    #[test]
    fn asymmetric_code_has_non_scalar_g() {
        let g = g_matrix(&asymmetric_code()).unwrap();
        assert!(linalg::max_abs_diff(g.matrix(), &diag_matrix(&[3.0, 2.0])) < 1e-14);
    }

    #[test]
    fn g_transforms_by_conjugation_under_networks() {
        // A non-scalar G separates the active law conj(U) G U^T from U^T G conj(U).
        let code = asymmetric_code();
        let g = g_matrix(&code).unwrap();
        let mut rng = seeded_rng(21);
        for _ in 0..10 {
            let gamma = haar_unitary(2, &mut rng);
            let moved = transform_code(&code, &gamma).unwrap();
            let report = verify_code(&moved).unwrap();
            assert!(report.correctable);
            let got = report.g.unwrap();
            assert!(linalg::max_abs_diff(got.matrix(), g.after_network(&gamma).matrix()) < 1e-9);
            // The same law read in output modes a = Gamma b for the inverse network.
            assert!(
                linalg::max_abs_diff(got.matrix(), g.in_output_modes(&gamma.adjoint()).matrix()) < 1e-9
            );
            assert!(linalg::max_abs_diff(got.matrix(), g.in_output_modes(&gamma).matrix()) > 1e-3);
        }
    }

    #[test]
    fn output_mode_expectations_follow_transposed_law() {
        // Fixed states, new modes b_k = sum_i conj(Gamma_ik) a_i.
        let code = asymmetric_code();
        let g = g_matrix(&code).unwrap();
        let gamma = haar_unitary(2, &mut seeded_rng(2));
        let u = gamma.matrix();
        let l = code.logical_l();
        let mut direct = CMatrix::zeros(2, 2);
        for k in 0..2 {
            for m in 0..2 {
                let mut acc = real(0.0);
                for i in 0..2 {
                    for j in 0..2 {
                        acc += u[(i, k)] * u[(j, m)].conj() * hop_expectation(&code, l, i, j, l);
                    }
                }
                direct[(k, m)] = acc;
            }
        }
        assert!(linalg::max_abs_diff(&direct, g.in_output_modes(&gamma).matrix()) < 1e-12);
    }

    #[test]
    fn builtins_stay_codes_under_random_networks() {
        let mut rng = seeded_rng(8);
        for name in BUILTIN_CODES {
            let code = builtin_code(name).unwrap();
            let g = g_matrix(&code).unwrap();
            for _ in 0..10 {
                let gamma = haar_unitary(code.modes(), &mut rng);
                let moved = g_matrix(&transform_code(&code, &gamma).unwrap()).unwrap();
                assert!(linalg::max_abs_diff(moved.matrix(), g.after_network(&gamma).matrix()) < 1e-9);
                assert!(moved.hermiticity_deviation() < 1e-12);
                assert!((moved.trace() - real(code.photons() as f64)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let code = transform_code(
            &builtin_code("fourphoton").unwrap(),
            &haar_unitary(2, &mut seeded_rng(4)),
        )
        .unwrap();
        let text = serde_json::to_string(&code.to_json()).unwrap();
        let back = CodePair::from_json(&serde_json::from_str(&text).unwrap(), 1e-10).unwrap();
        assert!(back.logical_l().max_diff(code.logical_l()).unwrap() <= 1e-15);
        assert!(back.logical_h().max_diff(code.logical_h()).unwrap() <= 1e-15);
    }

    #[test]
    fn report_serializes_all_magnitudes() {
        let report = verify_code(&builtin_code("fourphoton").unwrap()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&report).unwrap();
        for key in ["correctable", "g", "max_offdiag_violation", "max_diag_violation", "gram_structure_violation"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!((v["g"]["re"][0][0].as_f64().unwrap() - 2.0).abs() < 1e-14);
    }
}
