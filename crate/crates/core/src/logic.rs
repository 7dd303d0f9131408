//! Code-preserving networks, induced logical gates and the discrete gate group.
//!
//! A network `Gamma` preserves a code when `R(Gamma) P = P R(Gamma) P`; its logical
//! action is then the unitary 2x2 block `W^dagger R(Gamma) W` in the ordered basis
//! `(|L>, |H>)`. Continuous families `exp(-i s Lambda)` can only act as a global
//! phase `exp(-i s lambda)` with `lambda = Tr(Lambda G^T)`, so code-preserving
//! networks generate a discrete group, enumerated here by breadth-first closure.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::Serialize;

use crate::codes::{g_matrix, CodePair};
use crate::linalg::{self, real, to_matrix2, CMatrix, CMatrix2, ComplexMatrixJson};
use crate::linopt::{lift_generator, lift_unitary, FockOperator, HermitianGenerator, ModeUnitary};
use crate::{Error, Result, DEFAULT_TOL};

/// Gate dedup threshold on `1 - |tr(U^dagger V)| / 2`.
pub const DEFAULT_DEDUP_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ELEMS: usize = 10_000;
/// Orbit points closer than this are merged.
pub const ORBIT_MERGE_DISTANCE: f64 = 1e-6;
/// Entry-wise tolerance of the phase check on `R(exp(-i s Lambda)) P`.
pub const PHASE_CHECK_TOL: f64 = 1e-9;

/// Restriction of a lifted network to the code block.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalGate {
    pub u: CMatrix2,
    /// Spectral norm of `(I - P) R P`.
    pub leakage: f64,
}

impl LogicalGate {
    pub fn identity() -> Self {
        Self {
            u: CMatrix2::identity(),
            leakage: 0.0,
        }
    }

    /// `1 - |tr(U^dagger V)| / 2`; zero iff the gates agree up to a global phase.
    pub fn phase_distance(&self, other: &LogicalGate) -> f64 {
        phase_distance(&self.u, &other.u)
    }

    /// Image of `alpha |L> + beta |H>` as logical amplitudes.
    pub fn apply(&self, alpha: Complex64, beta: Complex64) -> (Complex64, Complex64) {
        (
            self.u[(0, 0)] * alpha + self.u[(0, 1)] * beta,
            self.u[(1, 0)] * alpha + self.u[(1, 1)] * beta,
        )
    }

    pub fn unitarity_deviation(&self) -> f64 {
        linalg::max_abs(&(self.u.adjoint() * self.u - CMatrix2::identity()))
    }
}

pub fn phase_distance(u: &CMatrix2, v: &CMatrix2) -> f64 {
    1.0 - (u.adjoint() * v).trace().norm() / 2.0
}

/// Point on the logical Bloch sphere; `|L>` is the north pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochPoint {
    pub fn distance(&self, other: &BlochPoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }

    pub fn radius(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Bloch vector of `alpha |L> + beta |H>`.
pub fn bloch(alpha: Complex64, beta: Complex64) -> Result<BlochPoint> {
    bloch_with_tolerance(alpha, beta, DEFAULT_TOL)
}

pub fn bloch_with_tolerance(alpha: Complex64, beta: Complex64, tol: f64) -> Result<BlochPoint> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if !((norm - 1.0).abs() < tol) {
        return Err(Error::NotNormalized(norm));
    }
    let cross = alpha.conj() * beta;
    Ok(BlochPoint {
        x: 2.0 * cross.re,
        y: 2.0 * cross.im,
        z: alpha.norm_sqr() - beta.norm_sqr(),
    })
}

fn leakage_of(code: &CodePair, op: &CMatrix) -> f64 {
    let w = code.encoder();
    let image = op * &w;
    let off = &image - &w * (w.adjoint() * &image);
    linalg::spectral_norm(&off)
}

/// `||(I - P) R(Gamma) P||`, zero iff the network keeps the code subspace.
pub fn leakage_norm(code: &CodePair, gamma: &ModeUnitary) -> Result<f64> {
    let r = lift_unitary(gamma, code.basis())?;
    Ok(leakage_of(code, r.matrix()))
}

fn gate_from_lift(code: &CodePair, r: &FockOperator) -> LogicalGate {
    let w = code.encoder();
    LogicalGate {
        u: to_matrix2(&(w.adjoint() * r.matrix() * &w)),
        leakage: leakage_of(code, r.matrix()),
    }
}

/// `u = [[<L|R|L>, <L|R|H>], [<H|R|L>, <H|R|H>]]` together with the leakage.
pub fn extract_gate(code: &CodePair, gamma: &ModeUnitary) -> Result<LogicalGate> {
    let r = lift_unitary(gamma, code.basis())?;
    Ok(gate_from_lift(code, &r))
}

/// A network with a display name, as handed to [`group_closure`].
#[derive(Debug, Clone)]
pub struct NamedUnitary {
    pub name: String,
    pub unitary: ModeUnitary,
}

impl NamedUnitary {
    pub fn new(name: impl Into<String>, unitary: ModeUnitary) -> Self {
        Self {
            name: name.into(),
            unitary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitPoint {
    #[serde(flatten)]
    pub point: BlochPoint,
    /// Index of the first gate (in closure order) reaching this point.
    pub gate: usize,
}

/// Logical gate group generated by code-preserving networks.
#[derive(Debug, Clone)]
pub struct GroupClosure {
    pub generator_names: Vec<String>,
    /// Distinct gates modulo global phase in breadth-first order; `gates[0]` is the identity.
    pub gates: Vec<LogicalGate>,
    /// Shortest generator word for each gate; `[a, b]` means apply `a`, then `b`.
    pub words: Vec<Vec<usize>>,
    /// Orbit of the seed `|H>`.
    pub orbit: Vec<OrbitPoint>,
    pub saturated: bool,
    pub tolerance: f64,
}

impl GroupClosure {
    pub fn order(&self) -> usize {
        self.gates.len()
    }

    /// Generator names joined by `.`; `id` for the empty word.
    pub fn word_label(&self, word: &[usize]) -> String {
        if word.is_empty() {
            return "id".to_string();
        }
        word.iter()
            .map(|&g| self.generator_names[g].as_str())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn find(&self, u: &CMatrix2) -> Option<usize> {
        self.gates
            .iter()
            .position(|g| phase_distance(&g.u, u) < self.tolerance)
    }

    /// Network of a word: the product of its generators, first letter rightmost.
    pub fn word_network(generators: &[NamedUnitary], word: &[usize]) -> Result<ModeUnitary> {
        let dim = generators.first().map_or(0, |g| g.unitary.dim());
        let mut acc = ModeUnitary::identity(dim);
        for &g in word {
            acc = generators[g].unitary.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Every member times every generator gate is again a member (modulo phase).
    pub fn is_closed_under(&self, generator_gates: &[LogicalGate]) -> bool {
        self.gates.iter().all(|g| {
            generator_gates
                .iter()
                .all(|h| self.find(&(h.u * g.u)).is_some())
        })
    }

    pub fn to_json(&self) -> GroupClosureJson {
        GroupClosureJson {
            generators: self.generator_names.clone(),
            order: self.order(),
            saturated: self.saturated,
            tolerance: self.tolerance,
            gates: self
                .gates
                .iter()
                .zip(&self.words)
                .map(|(g, w)| GateJson {
                    u: ComplexMatrixJson::from_rows(&g.u),
                    leakage: g.leakage,
                    word: self.word_label(w),
                })
                .collect(),
            orbit: self
                .orbit
                .iter()
                .map(|p| OrbitJson {
                    x: p.point.x,
                    y: p.point.y,
                    z: p.point.z,
                    word: self.word_label(&self.words[p.gate]),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GateJson {
    pub u: ComplexMatrixJson,
    pub leakage: f64,
    pub word: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitJson {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub word: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupClosureJson {
    pub generators: Vec<String>,
    pub order: usize,
    pub saturated: bool,
    pub tolerance: f64,
    pub gates: Vec<GateJson>,
    pub orbit: Vec<OrbitJson>,
}

/// Breadth-first closure of the logical gates induced by `generators`.
///
/// Generators are tried in the given order, so recorded words are shortest with
/// ties broken by generator index. Stops early with `saturated = false` once more
/// than `max_elems` distinct gates are found.
pub fn group_closure(
    code: &CodePair,
    generators: &[NamedUnitary],
    max_elems: usize,
    tol: f64,
) -> Result<GroupClosure> {
    let mut generator_gates = Vec::with_capacity(generators.len());
    for (index, g) in generators.iter().enumerate() {
        let gate = extract_gate(code, &g.unitary)?;
        if !(gate.leakage < tol) {
            return Err(Error::LeakyGenerator {
                index,
                name: g.name.clone(),
                leakage: gate.leakage,
            });
        }
        generator_gates.push(gate);
    }

    let mut closure = GroupClosure {
        generator_names: generators.iter().map(|g| g.name.clone()).collect(),
        gates: vec![LogicalGate::identity()],
        words: vec![Vec::new()],
        orbit: Vec::new(),
        saturated: true,
        tolerance: tol,
    };
    let mut networks = vec![ModeUnitary::identity(code.modes())];
    let mut queue = VecDeque::from([0usize]);
    'bfs: while let Some(current) = queue.pop_front() {
        for (gi, gen) in generators.iter().enumerate() {
            let u = generator_gates[gi].u * closure.gates[current].u;
            if closure.find(&u).is_some() {
                continue;
            }
            if closure.gates.len() >= max_elems {
                closure.saturated = false;
                break 'bfs;
            }
            let network = gen.unitary.compose(&networks[current])?;
            let leakage = leakage_norm(code, &network)?;
            let mut word = closure.words[current].clone();
            word.push(gi);
            closure.gates.push(LogicalGate { u, leakage });
            closure.words.push(word);
            networks.push(network);
            queue.push_back(closure.gates.len() - 1);
        }
    }

    for (k, gate) in closure.gates.iter().enumerate() {
        let (alpha, beta) = gate.apply(real(0.0), real(1.0));
        let point = bloch_with_tolerance(alpha, beta, 1e-8)?;
        if closure
            .orbit
            .iter()
            .all(|p| p.point.distance(&point) >= ORBIT_MERGE_DISTANCE)
        {
            closure.orbit.push(OrbitPoint { point, gate: k });
        }
    }
    Ok(closure)
}

/// Quantities behind the no-continuous-gates argument for one generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObstructionRecord {
    /// `Tr(Lambda G^T)`.
    pub lambda_scalar: f64,
    /// Imaginary part of `Tr(Lambda G^T)`; vanishes for Hermitian `Lambda` and `G`.
    pub lambda_imag: f64,
    /// `max |P R(Lambda) P - lambda P|`.
    pub projection_residual: f64,
    /// `||(I - P) R(Lambda) P||`.
    pub first_order_leakage: f64,
}

pub fn obstruction_check(code: &CodePair, lambda: &HermitianGenerator) -> Result<ObstructionRecord> {
    let g = g_matrix(code)?;
    if lambda.dim() != code.modes() {
        return Err(Error::DimensionMismatch {
            expected: code.modes(),
            found: lambda.dim(),
        });
    }
    let scalar: Complex64 = lambda
        .matrix()
        .iter()
        .zip(g.matrix().iter())
        .map(|(l, g)| l * g)
        .sum();
    let r = lift_generator(lambda, code.basis())?;
    let p = code.projector();
    let block = &p * r.matrix() * &p;
    let residual = linalg::max_abs_diff(&block, &(&p * real(scalar.re)));
    Ok(ObstructionRecord {
        lambda_scalar: scalar.re,
        lambda_imag: scalar.im,
        projection_residual: residual,
        first_order_leakage: leakage_of(code, r.matrix()),
    })
}

/// `max_s max |R(exp(-i s Lambda)) P - exp(-i s lambda) P|` over `s_grid`.
///
/// Fails with [`Error::FirstOrderLeakage`] when `Lambda` does not keep the code at
/// first order.
pub fn phase_theorem_deviation(code: &CodePair, lambda: &HermitianGenerator, s_grid: &[f64]) -> Result<f64> {
    let record = obstruction_check(code, lambda)?;
    if !(record.first_order_leakage < code.tolerance()) {
        return Err(Error::FirstOrderLeakage {
            leakage: record.first_order_leakage,
        });
    }
    let p = code.projector();
    let mut worst = 0.0_f64;
    for &s in s_grid {
        let r = lift_unitary(&lambda.exponentiate(s), code.basis())?;
        let phase = Complex64::from_polar(1.0, -s * record.lambda_scalar);
        let dev = linalg::max_abs_diff(&(r.matrix() * &p), &(&p * phase));
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Whether the family `exp(-i s Lambda)` acts as `exp(-i s lambda)` on the code at
/// every `s` in the grid.
pub fn phase_theorem_check(code: &CodePair, lambda: &HermitianGenerator, s_grid: &[f64]) -> Result<bool> {
    Ok(phase_theorem_deviation(code, lambda, s_grid)? < PHASE_CHECK_TOL)
}

/// Which side of the leak-or-phase dichotomy a generator falls on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorClass {
    /// Leaves the code subspace at first order.
    Leaky { first_order_leakage: f64 },
    /// Acts on the code as the global phase `exp(-i s lambda)`.
    PhaseOnly { lambda: f64, max_deviation: f64 },
    /// Neither: would contradict the theorem.
    Violation { first_order_leakage: f64, max_deviation: f64 },
}

pub fn classify_generator(
    code: &CodePair,
    lambda: &HermitianGenerator,
    s_grid: &[f64],
) -> Result<(ObstructionRecord, GeneratorClass)> {
    let record = obstruction_check(code, lambda)?;
    if !(record.first_order_leakage < code.tolerance()) {
        return Ok((
            record,
            GeneratorClass::Leaky {
                first_order_leakage: record.first_order_leakage,
            },
        ));
    }
    let dev = phase_theorem_deviation(code, lambda, s_grid)?;
    let class = if dev < PHASE_CHECK_TOL {
        GeneratorClass::PhaseOnly {
            lambda: record.lambda_scalar,
            max_deviation: dev,
        }
    } else {
        GeneratorClass::Violation {
            first_order_leakage: record.first_order_leakage,
            max_deviation: dev,
        }
    };
    Ok((record, class))
}
