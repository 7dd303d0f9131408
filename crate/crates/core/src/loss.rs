//! Uniform amplitude damping, syndrome recovery and logical fidelity.
//!
//! Every mode passes through a beam splitter of transmissivity `1 - gamma`. The
//! Kraus operator for losing `k_j` photons from mode `j` acts as
//!
//! ```text
//! A_k |m> = prod_j sqrt(C(m_j, k_j) (1 - gamma)^(m_j - k_j) gamma^k_j) |m - k>
//! ```
//!
//! For a correctable code the one-loss error states are whitened through the
//! eigenbasis of `G` and mapped back onto `|L>, |H>`; losses of two or more
//! photons are left uncorrected and counted as leakage.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::codes::{error_states, g_matrix, CodePair};
use crate::fock::{binomial, FockBasis, StateVector};
use crate::linalg::{self, real, to_matrix2, CMatrix, CMatrix2, ComplexMatrixJson};
use crate::{Error, Result};

/// Number of Bloch-sphere mesh points used for worst-case fidelity.
pub const WORST_CASE_MESH: usize = 200;

/// Kraus operator for one loss pattern, mapping the `n`-photon sector to `n - |k|`.
#[derive(Debug, Clone)]
pub struct DampingKraus {
    pub loss: Vec<usize>,
    pub to: Arc<FockBasis>,
    pub mat: CMatrix,
}

impl DampingKraus {
    pub fn lost_photons(&self) -> usize {
        self.loss.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct LossChannel {
    pub gamma: f64,
    pub basis: Arc<FockBasis>,
    /// Loss patterns with a non-zero Kraus operator, by increasing `|k|`.
    pub kraus: Vec<DampingKraus>,
}

impl LossChannel {
    /// `max |sum_k A_k^dagger A_k - I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let n = self.basis.size();
        let mut acc = CMatrix::zeros(n, n);
        for k in &self.kraus {
            acc += k.mat.adjoint() * &k.mat;
        }
        linalg::max_abs_diff(&acc, &CMatrix::identity(n, n))
    }

    /// Probability of losing exactly `count` photons from `state`.
    pub fn loss_probability(&self, state: &StateVector, count: usize) -> Result<f64> {
        self.basis.ensure_same(state.basis())?;
        Ok(self
            .kraus
            .iter()
            .filter(|k| k.lost_photons() == count)
            .map(|k| (&k.mat * state.amplitudes()).norm_squared())
            .sum())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    Ok(())
}

pub fn build_channel(basis: &Arc<FockBasis>, gamma: f64) -> Result<LossChannel> {
    check_gamma(gamma)?;
    let modes = basis.modes();
    let n = basis.photons();
    let keep = 1.0 - gamma;
    let mut kraus = Vec::new();
    for lost in 0..=n {
        let patterns = FockBasis::new(modes, lost)?;
        let to = Arc::new(FockBasis::new(modes, n - lost)?);
        for k in patterns.elements() {
            let mut mat = CMatrix::zeros(to.size(), basis.size());
            let mut nonzero = false;
            for (col, m) in basis.elements().iter().enumerate() {
                if (0..modes).any(|j| m[j] < k[j]) {
                    continue;
                }
                let amp: f64 = (0..modes)
                    .map(|j| {
                        let (mj, kj) = (m[j], k[j]);
                        binomial(mj as u128, kj as u128).unwrap() as f64
                            * keep.powi((mj - kj) as i32)
                            * gamma.powi(kj as i32)
                    })
                    .product::<f64>()
                    .sqrt();
                if amp == 0.0 {
                    continue;
                }
                let target: Vec<usize> = (0..modes).map(|j| m[j] - k[j]).collect();
                let row = to.index_of(&target.into()).expect("target has n - |k| photons");
                mat[(row, col)] = real(amp);
                nonzero = true;
            }
            if nonzero {
                kraus.push(DampingKraus {
                    loss: k.as_slice().to_vec(),
                    to: to.clone(),
                    mat,
                });
            }
        }
    }
    Ok(LossChannel {
        gamma,
        basis: basis.clone(),
        kraus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Syndrome {
    NoLoss,
    /// One photon lost into the whitened loss channel `mu` (eigenvector of `G`).
    OneLoss(usize),
}

/// Recovery Kraus operator from a damaged sector back into the code sector.
#[derive(Debug, Clone)]
pub struct RecoveryKraus {
    pub syndrome: Syndrome,
    pub from: Arc<FockBasis>,
    pub mat: CMatrix,
}

#[derive(Debug, Clone)]
pub struct RecoveryMap {
    pub kraus: Vec<RecoveryKraus>,
    /// Eigenvalues `g_mu` of `G`, ascending.
    pub weights: Vec<f64>,
    /// Whitened error states `|e_mu,X>`, ordered `(mu, logical)`.
    pub error_states: Vec<StateVector>,
}

impl RecoveryMap {
    /// `max_mu max |R_mu R_mu^dagger - P|`: each element is a partial isometry onto the code.
    pub fn partial_isometry_deviation(&self, code: &CodePair) -> f64 {
        let p = code.projector();
        self.kraus
            .iter()
            .map(|r| linalg::max_abs_diff(&(&r.mat * r.mat.adjoint()), &p))
            .fold(0.0, f64::max)
    }

    /// `max |<e_a, e_b> - delta_ab|` over the whitened error states.
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (a, x) in self.error_states.iter().enumerate() {
            for (b, y) in self.error_states.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                let ip = x.inner(y).expect("error states share a sector");
                worst = worst.max((ip - real(target)).norm());
            }
        }
        worst
    }
}

pub fn build_recovery(code: &CodePair) -> Result<RecoveryMap> {
    let g = g_matrix(code)?;
    let (weights, vectors) = g.eigen();
    if let Some(&small) = weights.first() {
        if !(small > code.tolerance()) {
            return Err(Error::SingularG { eigenvalue: small });
        }
    }
    let modes = code.modes();
    let raw = error_states(code)?;
    let lower = raw[0].basis().clone();
    let w = code.encoder();
    let mut kraus = vec![RecoveryKraus {
        syndrome: Syndrome::NoLoss,
        from: code.basis().clone(),
        mat: code.projector(),
    }];
    let mut whitened = Vec::with_capacity(2 * modes);
    for (mu, &weight) in weights.iter().enumerate() {
        let scale = 1.0 / weight.sqrt();
        let mut columns = Vec::with_capacity(2);
        for x in 0..2 {
            let mut e = StateVector::zeros(lower.clone());
            for j in 0..modes {
                e = e.add_scaled(vectors[(j, mu)] * scale, &raw[2 * j + x])?;
            }
            columns.push(e.amplitudes().clone());
            whitened.push(e);
        }
        let e = CMatrix::from_columns(&columns);
        kraus.push(RecoveryKraus {
            syndrome: Syndrome::OneLoss(mu),
            from: lower.clone(),
            mat: &w * e.adjoint(),
        });
    }
    Ok(RecoveryMap {
        kraus,
        weights,
        error_states: whitened,
    })
}

/// Logical Kraus operators `W^dagger K W` of the encoded channel.
#[derive(Debug, Clone)]
pub struct LogicalChannel {
    pub gamma: f64,
    pub corrected: bool,
    pub kraus: Vec<CMatrix2>,
    /// Average weight of events that leave the code space: `1 - tr(sum M^dagger M) / 2`.
    pub leakage_weight: f64,
}

impl LogicalChannel {
    /// `sum_k |tr(M_k) / 2|^2`.
    pub fn entanglement_fidelity(&self) -> f64 {
        self.kraus
            .iter()
            .map(|m| (m.trace() / 2.0).norm_sqr())
            .sum()
    }

    /// `sum_k |<psi| M_k |psi>|^2` for `psi = alpha |L> + beta |H>`.
    pub fn state_fidelity(&self, alpha: Complex64, beta: Complex64) -> f64 {
        self.kraus
            .iter()
            .map(|m| {
                let (a, b) = (m[(0, 0)] * alpha + m[(0, 1)] * beta, m[(1, 0)] * alpha + m[(1, 1)] * beta);
                (alpha.conj() * a + beta.conj() * b).norm_sqr()
            })
            .sum()
    }

    /// Minimum pure-state fidelity over a Fibonacci mesh of the Bloch sphere.
    pub fn worst_case_fidelity(&self, mesh: usize) -> f64 {
        fibonacci_sphere(mesh)
            .into_iter()
            .map(|(theta, phi)| {
                let alpha = real((theta / 2.0).cos());
                let beta = Complex64::from_polar((theta / 2.0).sin(), phi);
                self.state_fidelity(alpha, beta)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `sum_k M_k^dagger M_k`.
    pub fn completeness(&self) -> CMatrix2 {
        self.kraus.iter().map(|m| m.adjoint() * m).sum()
    }
}

fn fibonacci_sphere(points: usize) -> Vec<(f64, f64)> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..points)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / points as f64;
            (z.acos(), golden * i as f64)
        })
        .collect()
}

pub fn logical_channel(code: &CodePair, gamma: f64, with_recovery: bool) -> Result<LogicalChannel> {
    let channel = build_channel(code.basis(), gamma)?;
    let recovery = if with_recovery {
        Some(build_recovery(code)?)
    } else {
        None
    };
    logical_channel_from(code, &channel, recovery.as_ref())
}

fn logical_channel_from(
    code: &CodePair,
    channel: &LossChannel,
    recovery: Option<&RecoveryMap>,
) -> Result<LogicalChannel> {
    let w = code.encoder();
    let wd = w.adjoint();
    let n = code.photons();
    let mut kraus = Vec::new();
    for a in &channel.kraus {
        match (a.lost_photons(), recovery) {
            (0, _) => {
                // Fixed photon number: the no-loss operator is (1 - gamma)^(n/2) on the code.
                let scalar = (1.0 - channel.gamma).powf(n as f64 / 2.0);
                let image = &a.mat * &w;
                debug_assert!(linalg::max_abs_diff(&image, &(&w * real(scalar))) < 1e-12);
                kraus.push(to_matrix2(&(&wd * image)));
            }
            (1, Some(rec)) => {
                let damaged = &a.mat * &w;
                for r in rec.kraus.iter().filter(|r| matches!(r.syndrome, Syndrome::OneLoss(_))) {
                    kraus.push(to_matrix2(&(&wd * &r.mat * &damaged)));
                }
            }
            _ => {}
        }
    }
    let kept: f64 = kraus
        .iter()
        .map(|m: &CMatrix2| (m.adjoint() * m).trace().re)
        .sum::<f64>()
        / 2.0;
    Ok(LogicalChannel {
        gamma: channel.gamma,
        corrected: recovery.is_some(),
        kraus,
        leakage_weight: (1.0 - kept).max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityPoint {
    pub gamma: f64,
    pub one_minus_f: f64,
    pub leakage_weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_one_minus_f: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityCurve {
    pub corrected: bool,
    pub points: Vec<FidelityPoint>,
}

impl FidelityCurve {
    /// `d log(1 - F) / d log gamma` between points `a` and `b`.
    pub fn log_log_slope(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (&self.points[a], &self.points[b]);
        (q.one_minus_f.ln() - p.one_minus_f.ln()) / (q.gamma.ln() - p.gamma.ln())
    }
}

/// `1 - F_e` of the (optionally corrected) logical channel for each gamma, in input order.
pub fn fidelity_curve(code: &CodePair, gammas: &[f64], with_recovery: bool) -> Result<FidelityCurve> {
    fidelity_curve_with(code, gammas, with_recovery, false)
}

/// As [`fidelity_curve`], optionally adding the worst pure-state infidelity.
pub fn fidelity_curve_with(
    code: &CodePair,
    gammas: &[f64],
    with_recovery: bool,
    worst_case: bool,
) -> Result<FidelityCurve> {
    for &g in gammas {
        check_gamma(g)?;
    }
    let recovery = if with_recovery {
        Some(build_recovery(code)?)
    } else {
        None
    };
    let mut points = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let channel = build_channel(code.basis(), gamma)?;
        let logical = logical_channel_from(code, &channel, recovery.as_ref())?;
        let clamp = |x: f64| x.clamp(0.0, 1.0);
        points.push(FidelityPoint {
            gamma,
            one_minus_f: clamp(1.0 - logical.entanglement_fidelity()),
            leakage_weight: logical.leakage_weight,
            worst_one_minus_f: worst_case
                .then(|| clamp(1.0 - logical.worst_case_fidelity(WORST_CASE_MESH))),
        });
    }
    Ok(FidelityCurve {
        corrected: with_recovery,
        points,
    })
}

/// Logical Kraus operators as `{"re":..,"im":..}` matrices.
pub fn kraus_json(channel: &LogicalChannel) -> Vec<ComplexMatrixJson> {
    channel.kraus.iter().map(ComplexMatrixJson::from_rows).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{builtin_code, transform_code, BUILTIN_CODES};
    use crate::random::{haar_unitary, seeded_rng};

    fn basis(m: usize, n: usize) -> Arc<FockBasis> {
        Arc::new(FockBasis::new(m, n).unwrap())
    }

    #[test]
    fn no_damping_is_identity() {
        let ch = build_channel(&basis(2, 4), 0.0).unwrap();
        assert_eq!(ch.kraus.len(), 1);
        assert_eq!(ch.kraus[0].loss, vec![0, 0]);
        assert!(linalg::max_abs_diff(&ch.kraus[0].mat, &CMatrix::identity(5, 5)) < 1e-15);
    }

    #[test]
    fn full_damping_empties_the_modes() {
        let ch = build_channel(&basis(2, 4), 1.0).unwrap();
        assert!(ch.kraus.iter().all(|k| k.lost_photons() == 4));
        assert_eq!(ch.kraus.len(), 5);
        assert!(ch.completeness_deviation() < 1e-15);
    }

    #[test]
    fn completeness() {
        for (m, n) in [(2, 4), (3, 3), (3, 4)] {
            for gamma in [0.001, 0.01, 0.1, 0.5] {
                let ch = build_channel(&basis(m, n), gamma).unwrap();
                assert!(ch.completeness_deviation() < 1e-12, "({m},{n}) gamma={gamma}");
            }
        }
    }

    #[test]
    fn single_mode_elements() {
        // <n-k| A_k |n> = sqrt(C(n,k) (1-g)^(n-k) g^k)
        let ch = build_channel(&basis(1, 3), 0.2).unwrap();
        for k in &ch.kraus {
            let lost = k.loss[0];
            let expect = (binomial(3, lost as u128).unwrap() as f64 * 0.8f64.powi(3 - lost as i32) * 0.2f64.powi(lost as i32)).sqrt();
            assert!((k.mat[(0, 0)].re - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_out_of_range() {
        assert!(matches!(build_channel(&basis(2, 1), -0.1), Err(Error::GammaOutOfRange(_))));
        assert!(matches!(build_channel(&basis(2, 1), 1.5), Err(Error::GammaOutOfRange(_))));
        let code = builtin_code("fourphoton").unwrap();
        assert!(fidelity_curve(&code, &[0.1, 2.0], true).is_err());
    }

    #[test]
    fn recovery_structure() {
        for name in BUILTIN_CODES {
            let code = builtin_code(name).unwrap();
            let rec = build_recovery(&code).unwrap();
            assert_eq!(rec.kraus.len(), 1 + code.modes());
            assert_eq!(rec.error_states.len(), 2 * code.modes());
            assert!(rec.orthonormality_deviation() < 1e-12);
            assert!(rec.partial_isometry_deviation(&code) < 1e-12);
        }
    }

    #[test]
    fn recovery_completes_on_reachable_subspace() {
        let code = builtin_code("fourphoton").unwrap();
        let rec = build_recovery(&code).unwrap();
        let lower = rec.error_states[0].basis().size();
        let mut sum = CMatrix::zeros(lower, lower);
        for r in rec.kraus.iter().filter(|r| r.syndrome != Syndrome::NoLoss) {
            sum += r.mat.adjoint() * &r.mat;
        }
        // projector onto span{a_j |X>}
        let raw = error_states(&code).unwrap();
        let mut proj = CMatrix::zeros(lower, lower);
        for e in &raw {
            let v = e.amplitudes() / real(e.norm());
            proj += &v * v.adjoint();
        }
        assert!(linalg::max_abs_diff(&sum, &proj) < 1e-12);
    }

    #[test]
    fn whitening_handles_non_diagonal_g() {
        let code = transform_code(
            &crate::codes::tests::asymmetric_code(),
            &haar_unitary(2, &mut seeded_rng(6)),
        )
        .unwrap();
        let rec = build_recovery(&code).unwrap();
        assert!(rec.orthonormality_deviation() < 1e-10);
        assert!((rec.weights[0] - 2.0).abs() < 1e-10 && (rec.weights[1] - 3.0).abs() < 1e-10);
        let curve = fidelity_curve(&code, &[1e-3, 1e-2], true).unwrap();
        assert!((curve.log_log_slope(0, 1) - 2.0).abs() < 0.1);
    }

    #[test]
    fn singular_g_has_no_recovery() {
        // four-photon code padded with an empty third mode: G = diag(2, 2, 0)
        let b = basis(3, 4);
        let r = real(std::f64::consts::FRAC_1_SQRT_2);
        let l = StateVector::from_terms(b.clone(), &[(vec![0, 4, 0], r), (vec![4, 0, 0], r)]).unwrap();
        let h = StateVector::basis_state(b, &[2, 2, 0]).unwrap();
        let code = CodePair::new(l, h).unwrap();
        assert!(matches!(build_recovery(&code), Err(Error::SingularG { .. })));
    }

    #[test]
    fn zero_damping_logical_channel() {
        let code = builtin_code("threephoton").unwrap();
        for corrected in [false, true] {
            let ch = logical_channel(&code, 0.0, corrected).unwrap();
            assert_eq!(ch.kraus.len(), 1);
            assert!(linalg::max_abs(&(ch.kraus[0] - CMatrix2::identity())) < 1e-15);
            assert!((ch.entanglement_fidelity() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn recovery_undoes_channel_at_zero_loss() {
        let code = builtin_code("fourphoton").unwrap();
        let rec = build_recovery(&code).unwrap();
        let ch = build_channel(code.basis(), 0.0).unwrap();
        let out = &rec.kraus[0].mat * (&ch.kraus[0].mat * code.logical_l().amplitudes());
        assert!((out - code.logical_l().amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn logical_channel_audit() {
        let code = builtin_code("fourphoton").unwrap();
        let gamma = 0.05;
        let ch = logical_channel(&code, gamma, true).unwrap();
        let comp = ch.completeness();
        let c0 = comp[(0, 0)].re;
        assert!(c0 <= 1.0);
        assert!(linalg::max_abs(&(comp - CMatrix2::identity() * real(c0))) < 1e-12);
        // (1-g)^4 + 4 g (1-g)^3
        let expect = 0.95f64.powi(4) + 4.0 * 0.05 * 0.95f64.powi(3);
        assert!((c0 - expect).abs() < 1e-12);

        let plain = logical_channel(&code, 1e-3, false).unwrap();
        assert_eq!(plain.kraus.len(), 1);
        let scalar = (1.0 - 1e-3f64).powi(2);
        assert!(linalg::max_abs(&(plain.kraus[0] - CMatrix2::identity() * real(scalar))) < 1e-14);
    }

    #[test]
    fn suppression_slopes() {
        for name in BUILTIN_CODES {
            let code = builtin_code(name).unwrap();
            let fixed = fidelity_curve(&code, &[1e-3, 1e-2], true).unwrap();
            let raw = fidelity_curve(&code, &[1e-3, 1e-2], false).unwrap();
            assert!((fixed.log_log_slope(0, 1) - 2.0).abs() < 0.1, "{name}");
            assert!((raw.log_log_slope(0, 1) - 1.0).abs() < 0.1, "{name}");
        }
    }

    #[test]
    fn corrected_infidelity_is_second_order() {
        for name in BUILTIN_CODES {
            let code = builtin_code(name).unwrap();
            let curve = fidelity_curve(&code, &[1e-4, 1e-3, 1e-2], true).unwrap();
            let ratios: Vec<f64> = curve
                .points
                .iter()
                .map(|p| p.one_minus_f / (p.gamma * p.gamma))
                .collect();
            for w in ratios.windows(2) {
                assert!(((w[1] - w[0]) / w[0]).abs() < 0.2, "{name}: {ratios:?}");
            }
        }
    }

    #[test]
    fn uncorrectable_weight_is_bounded() {
        for name in BUILTIN_CODES {
            let code = builtin_code(name).unwrap();
            let n = code.photons();
            for gamma in [1e-3, 1e-2, 0.1] {
                let ch = build_channel(code.basis(), gamma).unwrap();
                for state in [code.logical_l(), code.logical_h()] {
                    let multi: f64 = (2..=n).map(|c| ch.loss_probability(state, c).unwrap()).sum();
                    let bound = binomial(n as u128, 2).unwrap() as f64 * gamma * gamma;
                    assert!(multi <= bound + 1e-15, "{name} gamma={gamma}");
                }
            }
        }
    }

    #[test]
    fn worst_case_not_better_than_average() {
        let code = builtin_code("threephoton").unwrap();
        let curve = fidelity_curve_with(&code, &[0.01, 0.05], true, true).unwrap();
        for p in &curve.points {
            let worst = p.worst_one_minus_f.unwrap();
            assert!((0.0..=1.0).contains(&worst));
            assert!(worst + 1e-15 >= p.one_minus_f * 2.0 / 3.0);
        }
    }

    #[test]
    fn curve_keeps_input_order() {
        let code = builtin_code("fourphoton").unwrap();
        let curve = fidelity_curve(&code, &[0.1, 0.001, 0.01], false).unwrap();
        let gammas: Vec<f64> = curve.points.iter().map(|p| p.gamma).collect();
        assert_eq!(gammas, vec![0.1, 0.001, 0.01]);
        assert!(fidelity_curve(&code, &[], true).unwrap().points.is_empty());
    }
}
