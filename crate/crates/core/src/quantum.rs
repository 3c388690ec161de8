//! A deliberately small two-qubit simulator.
//!
//! Only what the E91 run needs lives here: preparing the singlet from a gate
//! circuit, projective measurement of `cos(θ)·Z + sin(θ)·X` on each side, and
//! the isotropic depolarizing channel. Basis order for amplitudes is
//! `|00⟩, |01⟩, |10⟩, |11⟩` with qubit 0 (Alice) as the most significant bit.
#![allow(clippy::needless_range_loop)]

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Tolerance used for exact identities (normalization, unitarity).
pub const EXACT_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("invalid target qubit {0}; a two-qubit register has qubits 0 and 1")]
    InvalidTarget(usize),
    #[error("gate {gate} expects {expected} target(s), got {got}")]
    TargetCount {
        gate: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("control and target must differ (both {0})")]
    RepeatedTarget(usize),
    #[error("depolarizing parameter {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
}

/// Pure state of the entangled pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    amplitudes: [Complex64; 4],
}

impl TwoQubitState {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self, QuantumError> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > EXACT_TOLERANCE {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|q0 q1⟩`.
    pub fn basis(q0: bool, q1: bool) -> Self {
        let mut amplitudes = [ZERO; 4];
        amplitudes[(usize::from(q0) << 1) | usize::from(q1)] = ONE;
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> DensityMatrix {
        let mut entries = [[ZERO; 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix { entries }
    }
}

/// Mixed state of the pair as a 4×4 density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    entries: [[Complex64; 4]; 4],
}

impl DensityMatrix {
    /// The maximally mixed state `I/4`.
    pub fn maximally_mixed() -> Self {
        let mut entries = [[ZERO; 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = Complex64::new(0.25, 0.0);
        }
        Self { entries }
    }

    pub fn entries(&self) -> &[[Complex64; 4]; 4] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.entries[i][i]).sum()
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.entries[i][j] - self.entries[j][i].conj()).norm());
            }
        }
        worst
    }

    /// `⟨v|ρ|v⟩`, real for Hermitian ρ.
    fn expectation_of_vector(&self, v: &[Complex64; 4]) -> f64 {
        let mut acc = ZERO;
        for i in 0..4 {
            for j in 0..4 {
                acc += v[i].conj() * self.entries[i][j] * v[j];
            }
        }
        acc.re
    }

    /// `Tr(ρ O)` for a 4×4 observable.
    pub fn expectation(&self, observable: &[[Complex64; 4]; 4]) -> f64 {
        let mut acc = ZERO;
        for i in 0..4 {
            for k in 0..4 {
                acc += self.entries[i][k] * observable[k][i];
            }
        }
        acc.re
    }
}

/// Measurement direction in the X–Z plane; the observable is
/// `cos(angle)·Z + sin(angle)·X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisDirection(f64);

impl BasisDirection {
    /// Wraps `angle` into `[0, 2π)`.
    pub fn new(angle: f64) -> Self {
        let wrapped = angle.rem_euclid(TAU);
        Self(if wrapped >= TAU { 0.0 } else { wrapped })
    }

    pub fn angle(&self) -> f64 {
        self.0
    }

    /// Single-qubit observable matrix.
    pub fn observable(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.0.sin_cos();
        [
            [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(-c, 0.0)],
        ]
    }

    /// Eigenvector for the given outcome: `(cos θ/2, sin θ/2)` for +1 and
    /// `(−sin θ/2, cos θ/2)` for −1.
    pub fn eigenvector(&self, outcome: Outcome) -> [Complex64; 2] {
        let (s, c) = (self.0 / 2.0).sin_cos();
        match outcome {
            Outcome::Plus => [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
            Outcome::Minus => [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
        }
    }
}

/// A ±1 measurement result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];
}

/// Exact Born-rule table for one pair of measurement directions, ordered
/// `(+,+), (+,−), (−,+), (−,−)` as `(alice, bob)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    probabilities: [f64; 4],
}

impl JointDistribution {
    pub fn probabilities(&self) -> [f64; 4] {
        self.probabilities
    }

    pub fn probability(&self, a: Outcome, b: Outcome) -> f64 {
        self.probabilities[Self::slot(a, b)]
    }

    /// `⟨ab⟩ = Σ a·b·P(a, b)`.
    pub fn correlation(&self) -> f64 {
        let p = self.probabilities;
        p[0] - p[1] - p[2] + p[3]
    }

    fn slot(a: Outcome, b: Outcome) -> usize {
        (usize::from(a == Outcome::Minus) << 1) | usize::from(b == Outcome::Minus)
    }

    fn outcome_of(slot: usize) -> (Outcome, Outcome) {
        let pick = |minus: bool| if minus { Outcome::Minus } else { Outcome::Plus };
        (pick(slot & 2 != 0), pick(slot & 1 != 0))
    }

    /// Draw one outcome pair using a single uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Outcome, Outcome) {
        let u: f64 = rng.gen();
        let mut cumulative = 0.0;
        for (slot, p) in self.probabilities.iter().enumerate() {
            cumulative += p;
            if u < cumulative {
                return Self::outcome_of(slot);
            }
        }
        // u landed in the rounding gap above the final cumulative sum
        let last = self
            .probabilities
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(3);
        Self::outcome_of(last)
    }

    fn from_raw(raw: [f64; 4]) -> Self {
        let clamped = raw.map(|p| if p < 0.0 { 0.0 } else { p });
        let total: f64 = clamped.iter().sum();
        Self {
            probabilities: clamped.map(|p| p / total),
        }
    }
}

fn product_vector(a: &[Complex64; 2], b: &[Complex64; 2]) -> [Complex64; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

/// Anything that can be measured as an entangled pair.
pub trait PairState {
    fn joint_distribution(
        &self,
        basis_a: BasisDirection,
        basis_b: BasisDirection,
    ) -> JointDistribution;
}

impl PairState for TwoQubitState {
    fn joint_distribution(
        &self,
        basis_a: BasisDirection,
        basis_b: BasisDirection,
    ) -> JointDistribution {
        let mut raw = [0.0; 4];
        for a in Outcome::BOTH {
            for b in Outcome::BOTH {
                let v = product_vector(&basis_a.eigenvector(a), &basis_b.eigenvector(b));
                let overlap: Complex64 = v
                    .iter()
                    .zip(self.amplitudes.iter())
                    .map(|(vi, psi)| vi.conj() * psi)
                    .sum();
                raw[JointDistribution::slot(a, b)] = overlap.norm_sqr();
            }
        }
        JointDistribution::from_raw(raw)
    }
}

impl PairState for DensityMatrix {
    fn joint_distribution(
        &self,
        basis_a: BasisDirection,
        basis_b: BasisDirection,
    ) -> JointDistribution {
        let mut raw = [0.0; 4];
        for a in Outcome::BOTH {
            for b in Outcome::BOTH {
                let v = product_vector(&basis_a.eigenvector(a), &basis_b.eigenvector(b));
                raw[JointDistribution::slot(a, b)] = self.expectation_of_vector(&v);
            }
        }
        JointDistribution::from_raw(raw)
    }
}

/// Free-function form of [`PairState::joint_distribution`].
pub fn joint_distribution<S: PairState + ?Sized>(
    state: &S,
    basis_a: BasisDirection,
    basis_b: BasisDirection,
) -> JointDistribution {
    state.joint_distribution(basis_a, basis_b)
}

/// Projectively measure both halves of the pair.
pub fn measure_pair<S, R>(
    state: &S,
    basis_a: BasisDirection,
    basis_b: BasisDirection,
    rng: &mut R,
) -> (Outcome, Outcome)
where
    S: PairState + ?Sized,
    R: Rng + ?Sized,
{
    state.joint_distribution(basis_a, basis_b).sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X,
    H,
    Cnot,
    S,
    Sdg,
    T,
    Tdg,
    Ry(f64),
}

/// A gate's unitary, sized by arity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateMatrix {
    Single([[Complex64; 2]; 2]),
    Double([[Complex64; 4]; 4]),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::X => "X",
            Gate::H => "H",
            Gate::Cnot => "CNOT",
            Gate::S => "S",
            Gate::Sdg => "S†",
            Gate::T => "T",
            Gate::Tdg => "T†",
            Gate::Ry(_) => "RY",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Gate::Cnot => 2,
            _ => 1,
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::T => Gate::Tdg,
            Gate::Tdg => Gate::T,
            Gate::Ry(theta) => Gate::Ry(-theta),
            g => g,
        }
    }

    pub fn matrix(&self) -> GateMatrix {
        let r = |x: f64| Complex64::new(x, 0.0);
        let phase = |angle: f64| Complex64::from_polar(1.0, angle);
        match *self {
            Gate::X => GateMatrix::Single([[ZERO, ONE], [ONE, ZERO]]),
            Gate::H => GateMatrix::Single([
                [r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)],
                [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)],
            ]),
            Gate::S => GateMatrix::Single([[ONE, ZERO], [ZERO, Complex64::i()]]),
            Gate::Sdg => GateMatrix::Single([[ONE, ZERO], [ZERO, -Complex64::i()]]),
            Gate::T => GateMatrix::Single([[ONE, ZERO], [ZERO, phase(PI / 4.0)]]),
            Gate::Tdg => GateMatrix::Single([[ONE, ZERO], [ZERO, phase(-PI / 4.0)]]),
            Gate::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                GateMatrix::Single([[r(c), r(-s)], [r(s), r(c)]])
            }
            Gate::Cnot => GateMatrix::Double([
                [ONE, ZERO, ZERO, ZERO],
                [ZERO, ONE, ZERO, ZERO],
                [ZERO, ZERO, ZERO, ONE],
                [ZERO, ZERO, ONE, ZERO],
            ]),
        }
    }
}

fn check_target(q: usize) -> Result<(), QuantumError> {
    if q > 1 {
        Err(QuantumError::InvalidTarget(q))
    } else {
        Ok(())
    }
}

/// Apply `gate` to the given targets. CNOT takes `[control, target]`.
pub fn apply_gate(
    state: &TwoQubitState,
    gate: Gate,
    targets: &[usize],
) -> Result<TwoQubitState, QuantumError> {
    if targets.len() != gate.arity() {
        return Err(QuantumError::TargetCount {
            gate: gate.name(),
            expected: gate.arity(),
            got: targets.len(),
        });
    }
    for &q in targets {
        check_target(q)?;
    }
    let full = match gate.matrix() {
        GateMatrix::Single(u) => lift_single(&u, targets[0]),
        GateMatrix::Double(u) => {
            if targets[0] == targets[1] {
                return Err(QuantumError::RepeatedTarget(targets[0]));
            }
            if targets[0] == 0 {
                u
            } else {
                // control on qubit 1: conjugate by the swap of the two qubits
                permute_swap(&u)
            }
        }
    };
    let mut amplitudes = [ZERO; 4];
    for (i, out) in amplitudes.iter_mut().enumerate() {
        *out = (0..4).map(|j| full[i][j] * state.amplitudes[j]).sum();
    }
    Ok(TwoQubitState { amplitudes })
}

fn lift_single(u: &[[Complex64; 2]; 2], target: usize) -> [[Complex64; 4]; 4] {
    let mut full = [[ZERO; 4]; 4];
    for (i, row) in full.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let (ti, oi, tj, oj) = if target == 0 {
                (i >> 1, i & 1, j >> 1, j & 1)
            } else {
                (i & 1, i >> 1, j & 1, j >> 1)
            };
            if oi == oj {
                *e = u[ti][tj];
            }
        }
    }
    full
}

fn permute_swap(u: &[[Complex64; 4]; 4]) -> [[Complex64; 4]; 4] {
    let swap = |i: usize| ((i & 1) << 1) | (i >> 1);
    let mut out = [[ZERO; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = u[swap(i)][swap(j)];
        }
    }
    out
}

/// `(|01⟩ − |10⟩)/√2`, built as `CNOT(0→1) · H₀ · (X⊗X)|00⟩`.
pub fn prepare_singlet() -> TwoQubitState {
    let circuit: [(Gate, &[usize]); 4] = [
        (Gate::X, &[0]),
        (Gate::X, &[1]),
        (Gate::H, &[0]),
        (Gate::Cnot, &[0, 1]),
    ];
    circuit
        .iter()
        .try_fold(TwoQubitState::basis(false, false), |s, (g, t)| {
            apply_gate(&s, *g, t)
        })
        .expect("fixed circuit uses valid targets")
}

/// Isotropic mixture `p|ψ⟩⟨ψ| + (1−p)/4 · I`.
pub fn depolarize(pure: &TwoQubitState, p: f64) -> Result<DensityMatrix, QuantumError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QuantumError::ProbabilityOutOfRange(p));
    }
    let projector = pure.projector();
    let mixed = DensityMatrix::maximally_mixed();
    let mut entries = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            entries[i][j] = projector.entries[i][j] * p + mixed.entries[i][j] * (1.0 - p);
        }
    }
    Ok(DensityMatrix { entries })
}

/// Measure only qubit `qubit` along `basis`, returning the outcome and the
/// renormalized post-measurement state.
pub fn measure_single<R: Rng + ?Sized>(
    state: &TwoQubitState,
    qubit: usize,
    basis: BasisDirection,
    rng: &mut R,
) -> Result<(Outcome, TwoQubitState), QuantumError> {
    check_target(qubit)?;
    let projected = |outcome: Outcome| {
        let e = basis.eigenvector(outcome);
        let mut amplitudes = [ZERO; 4];
        for (i, amp) in amplitudes.iter_mut().enumerate() {
            let (mine, other) = if qubit == 0 {
                (i >> 1, i & 1)
            } else {
                (i & 1, i >> 1)
            };
            // ⟨e|ψ⟩ restricted to this qubit, then re-expanded along |e⟩
            let overlap: Complex64 = (0..2)
                .map(|k| {
                    let idx = if qubit == 0 {
                        (k << 1) | other
                    } else {
                        (other << 1) | k
                    };
                    e[k].conj() * state.amplitudes[idx]
                })
                .sum();
            *amp = e[mine] * overlap;
        }
        amplitudes
    };
    let plus = projected(Outcome::Plus);
    let p_plus: f64 = plus.iter().map(|a| a.norm_sqr()).sum();
    let u: f64 = rng.gen();
    let (outcome, amplitudes, prob) = if u < p_plus {
        (Outcome::Plus, plus, p_plus)
    } else {
        (Outcome::Minus, projected(Outcome::Minus), 1.0 - p_plus)
    };
    let scale = 1.0 / prob.sqrt();
    Ok((
        outcome,
        TwoQubitState {
            amplitudes: amplitudes.map(|a| a * scale),
        },
    ))
}
