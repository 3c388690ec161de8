//! The E91 protocol: random basis choice on both sides, sifting, the CHSH
//! test, and an intercept-resend attacker.
//!
//! Every round draws Alice's and Bob's basis uniformly from their three
//! directions. Rounds whose effective observables coincide, `(a₂, b₁)` and
//! `(a₃, b₂)`, become key bits. Rounds in `(a₁|a₃) × (b₁|b₃)` feed the CHSH
//! estimate. Everything else is discarded.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::bits::KeyBits;
use crate::quantum::{
    self, depolarize, measure_pair, measure_single, BasisDirection, DensityMatrix, Outcome,
    PairState, QuantumError, TwoQubitState,
};

/// Default `|E|` above which the channel is considered secure.
pub const DEFAULT_CHSH_THRESHOLD: f64 = 2.5;

/// Tsirelson bound, the ideal `|E|` for the singlet with these bases.
pub const TSIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// CSV header for [`KeyRateRow`].
pub const KEY_RATE_CSV_HEADER: &str = "singlets,key_bits,time_s,rate_bps,chsh,secure";

/// RNG stream reserved for the eavesdropper so her draws never perturb the
/// main transcript.
const EVE_STREAM: u64 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("at least one singlet is required")]
    NoSinglets,
    #[error("no rounds measured in basis pair (a{alice}, b{bob}); CHSH needs every cell")]
    InsufficientData { alice: u8, bob: u8 },
    #[error("CHSH threshold {0} must lie strictly between 2 and 2√2")]
    ThresholdOutOfRange(f64),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Measurement directions available to each party.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisTable {
    pub alice: [BasisDirection; 3],
    pub bob: [BasisDirection; 3],
}

impl BasisTable {
    /// Alice: Z, (X+Z)/√2, X. Bob: (X+Z)/√2, X, (X−Z)/√2.
    pub fn standard() -> Self {
        Self {
            alice: [0.0, FRAC_PI_4, FRAC_PI_2].map(BasisDirection::new),
            bob: [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4].map(BasisDirection::new),
        }
    }

    /// Direction for a 1-based basis index.
    pub fn alice_basis(&self, index: u8) -> BasisDirection {
        self.alice[usize::from(index - 1)]
    }

    pub fn bob_basis(&self, index: u8) -> BasisDirection {
        self.bob[usize::from(index - 1)]
    }
}

impl Default for BasisTable {
    fn default() -> Self {
        Self::standard()
    }
}

/// One singlet's public and private transcript. Basis indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementRound {
    pub index: usize,
    pub alice_basis: u8,
    pub bob_basis: u8,
    pub alice_outcome: Outcome,
    pub bob_outcome: Outcome,
}

impl MeasurementRound {
    /// True when both sides measured the same effective observable.
    pub fn is_key_round(&self) -> bool {
        matches!((self.alice_basis, self.bob_basis), (2, 1) | (3, 2))
    }

    fn product(&self) -> i32 {
        i32::from(self.alice_outcome.value()) * i32::from(self.bob_outcome.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Eavesdropper {
    #[default]
    None,
    InterceptResend,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    depolarizing_p: f64,
    pub eavesdropper: Eavesdropper,
}

impl ChannelConfig {
    pub fn new(depolarizing_p: f64, eavesdropper: Eavesdropper) -> Result<Self, ProtocolError> {
        if !(0.0..=1.0).contains(&depolarizing_p) {
            return Err(QuantumError::ProbabilityOutOfRange(depolarizing_p).into());
        }
        Ok(Self {
            depolarizing_p,
            eavesdropper,
        })
    }

    /// Noiseless channel, no attacker.
    pub fn ideal() -> Self {
        Self {
            depolarizing_p: 1.0,
            eavesdropper: Eavesdropper::None,
        }
    }

    pub fn with_eavesdropper(mut self, eavesdropper: Eavesdropper) -> Self {
        self.eavesdropper = eavesdropper;
        self
    }

    pub fn depolarizing_p(&self) -> f64 {
        self.depolarizing_p
    }
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self::ideal()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub rounds: Vec<MeasurementRound>,
    pub alice_key: KeyBits,
    pub bob_key: KeyBits,
    /// `None` when some CHSH cell received no rounds.
    pub chsh_value: Option<f64>,
    pub chsh_threshold: f64,
    pub secure: bool,
    pub elapsed: Duration,
}

impl ProtocolResult {
    pub fn singlets(&self) -> usize {
        self.rounds.len()
    }

    /// Alice's copy; equal to Bob's on a noiseless, unattacked channel.
    pub fn sifted_key(&self) -> &KeyBits {
        &self.alice_key
    }

    /// Fraction of sifted positions where Alice and Bob disagree.
    pub fn qber(&self) -> f64 {
        if self.alice_key.is_empty() {
            return 0.0;
        }
        self.alice_key.hamming_distance(&self.bob_key) as f64 / self.alice_key.len() as f64
    }

    pub fn key_rate(&self) -> f64 {
        rate(self.alice_key.len(), self.elapsed)
    }

    /// Equality on everything except wall-clock time.
    pub fn same_transcript(&self, other: &Self) -> bool {
        self.rounds == other.rounds
            && self.alice_key == other.alice_key
            && self.bob_key == other.bob_key
            && self.chsh_value.map(f64::to_bits) == other.chsh_value.map(f64::to_bits)
            && self.secure == other.secure
    }
}

fn rate(bits: usize, elapsed: Duration) -> f64 {
    let secs = elapsed.as_secs_f64();
    if bits == 0 || secs <= 0.0 {
        0.0
    } else {
        bits as f64 / secs
    }
}

/// Eve measures Bob's qubit in Z or X (chosen uniformly) and forwards the
/// collapsed product state.
pub fn intercept_resend_attack<R: Rng + ?Sized>(
    state: &TwoQubitState,
    eve_rng: &mut R,
) -> TwoQubitState {
    let basis = if eve_rng.gen::<bool>() {
        BasisDirection::new(0.0)
    } else {
        BasisDirection::new(FRAC_PI_2)
    };
    let (_, collapsed) =
        measure_single(state, 1, basis, eve_rng).expect("qubit 1 is a valid target");
    collapsed
}

/// Split the transcript into Alice's and Bob's sifted keys.
///
/// Alice maps +1 → 0 and −1 → 1; Bob uses the opposite convention, so the
/// perfect anti-correlation of the singlet yields identical strings.
pub fn sift(rounds: &[MeasurementRound]) -> (KeyBits, KeyBits) {
    let mut alice = KeyBits::default();
    let mut bob = KeyBits::default();
    for r in rounds.iter().filter(|r| r.is_key_round()) {
        alice.push(r.alice_outcome == Outcome::Minus);
        bob.push(r.bob_outcome == Outcome::Plus);
    }
    (alice, bob)
}

/// The four `(alice, bob)` cells and their signs in
/// `E = ⟨a₁b₁⟩ − ⟨a₁b₃⟩ + ⟨a₃b₁⟩ + ⟨a₃b₃⟩`.
const CHSH_TERMS: [(u8, u8, f64); 4] = [(1, 1, 1.0), (1, 3, -1.0), (3, 1, 1.0), (3, 3, 1.0)];

/// Sample CHSH statistic from the transcript.
pub fn chsh_statistic(rounds: &[MeasurementRound]) -> Result<f64, ProtocolError> {
    let mut total = 0.0;
    for (alice, bob, sign) in CHSH_TERMS {
        let (count, sum) = rounds
            .iter()
            .filter(|r| r.alice_basis == alice && r.bob_basis == bob)
            .fold((0usize, 0i64), |(n, s), r| {
                (n + 1, s + i64::from(r.product()))
            });
        if count == 0 {
            return Err(ProtocolError::InsufficientData { alice, bob });
        }
        total += sign * sum as f64 / count as f64;
    }
    Ok(total)
}

/// CHSH value computed from exact Born-rule correlations.
pub fn exact_chsh<S: PairState + ?Sized>(state: &S, table: &BasisTable) -> f64 {
    CHSH_TERMS
        .iter()
        .map(|&(a, b, sign)| {
            sign * quantum::joint_distribution(state, table.alice_basis(a), table.bob_basis(b))
                .correlation()
        })
        .sum()
}

/// `secure ⇔ |E| > threshold`.
pub fn detect_eavesdropper(chsh_value: f64, threshold: f64) -> bool {
    chsh_value.abs() > threshold
}

pub fn validate_threshold(threshold: f64) -> Result<f64, ProtocolError> {
    if threshold > 2.0 && threshold < TSIRELSON_BOUND {
        Ok(threshold)
    } else {
        Err(ProtocolError::ThresholdOutOfRange(threshold))
    }
}

/// Run the protocol with the default CHSH threshold.
pub fn run_protocol(
    n_singlets: usize,
    channel: &ChannelConfig,
    seed: u64,
) -> Result<ProtocolResult, ProtocolError> {
    run_protocol_with_threshold(n_singlets, channel, seed, DEFAULT_CHSH_THRESHOLD)
}

enum Source {
    Pure(TwoQubitState),
    Mixed(DensityMatrix),
}

pub fn run_protocol_with_threshold(
    n_singlets: usize,
    channel: &ChannelConfig,
    seed: u64,
    chsh_threshold: f64,
) -> Result<ProtocolResult, ProtocolError> {
    if n_singlets == 0 {
        return Err(ProtocolError::NoSinglets);
    }
    validate_threshold(chsh_threshold)?;
    let started = Instant::now();
    let table = BasisTable::standard();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut eve_rng = ChaCha20Rng::seed_from_u64(seed);
    eve_rng.set_stream(EVE_STREAM);

    let singlet = quantum::prepare_singlet();
    let p = channel.depolarizing_p;
    let channel_state = |pure: TwoQubitState| -> Result<Source, QuantumError> {
        Ok(if p == 1.0 {
            Source::Pure(pure)
        } else {
            Source::Mixed(depolarize(&pure, p)?)
        })
    };
    let undisturbed = channel_state(singlet)?;

    let mut rounds = Vec::with_capacity(n_singlets);
    for index in 0..n_singlets {
        let alice_basis = rng.gen_range(1..=3u8);
        let bob_basis = rng.gen_range(1..=3u8);
        let (a, b) = (table.alice_basis(alice_basis), table.bob_basis(bob_basis));
        let attacked;
        let state = match channel.eavesdropper {
            Eavesdropper::None => &undisturbed,
            Eavesdropper::InterceptResend => {
                attacked = channel_state(intercept_resend_attack(&singlet, &mut eve_rng))?;
                &attacked
            }
        };
        let (alice_outcome, bob_outcome) = match state {
            Source::Pure(s) => measure_pair(s, a, b, &mut rng),
            Source::Mixed(rho) => measure_pair(rho, a, b, &mut rng),
        };
        rounds.push(MeasurementRound {
            index,
            alice_basis,
            bob_basis,
            alice_outcome,
            bob_outcome,
        });
    }

    let (alice_key, bob_key) = sift(&rounds);
    let chsh_value = chsh_statistic(&rounds).ok();
    let secure = chsh_value.is_some_and(|e| detect_eavesdropper(e, chsh_threshold));
    Ok(ProtocolResult {
        rounds,
        alice_key,
        bob_key,
        chsh_value,
        chsh_threshold,
        secure,
        elapsed: started.elapsed(),
    })
}

/// One line of the key-generation-rate table.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateRow {
    pub singlets: usize,
    pub key_bits: usize,
    pub time_s: f64,
    pub rate_bps: f64,
    pub chsh: Option<f64>,
    pub secure: bool,
}

impl KeyRateRow {
    pub fn to_csv_row(&self) -> String {
        let chsh = self.chsh.map(|e| format!("{e:.6}")).unwrap_or_default();
        format!(
            "{},{},{:.6},{:.4},{},{}",
            self.singlets, self.key_bits, self.time_s, self.rate_bps, chsh, self.secure
        )
    }
}

impl fmt::Display for KeyRateRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv_row())
    }
}

pub fn key_generation_report(result: &ProtocolResult) -> KeyRateRow {
    KeyRateRow {
        singlets: result.singlets(),
        key_bits: result.alice_key.len(),
        time_s: result.elapsed.as_secs_f64(),
        rate_bps: result.key_rate(),
        chsh: result.chsh_value,
        secure: result.secure,
    }
}

/// Render rows as CSV including the header line.
pub fn key_rate_csv(rows: &[KeyRateRow]) -> String {
    let mut out = String::from(KEY_RATE_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round(alice_basis: u8, bob_basis: u8, a: i8, b: i8) -> MeasurementRound {
        let o = |v: i8| if v > 0 { Outcome::Plus } else { Outcome::Minus };
        MeasurementRound {
            index: 0,
            alice_basis,
            bob_basis,
            alice_outcome: o(a),
            bob_outcome: o(b),
        }
    }

    #[test]
    fn basis_table_observables() {
        let t = BasisTable::standard();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // (cos, sin) coefficients of Z and X
        let want_alice = [(1.0, 0.0), (s, s), (0.0, 1.0)];
        let want_bob = [(s, s), (0.0, 1.0), (-s, s)];
        for (dir, (z, x)) in t
            .alice
            .iter()
            .chain(&t.bob)
            .zip(want_alice.iter().chain(&want_bob))
        {
            let o = dir.observable();
            assert!(
                (o[0][0].re - z).abs() < 1e-12,
                "Z coefficient of {}",
                dir.angle()
            );
            assert!(
                (o[0][1].re - x).abs() < 1e-12,
                "X coefficient of {}",
                dir.angle()
            );
        }
    }

    #[test]
    fn sift_maps_matching_rounds() {
        let rounds = [
            round(2, 1, 1, -1),
            round(1, 3, 1, -1),
            round(3, 2, -1, 1),
            round(1, 1, 1, 1),
        ];
        let (a, b) = sift(&rounds);
        assert_eq!(a.to_string(), "01");
        assert_eq!(b.to_string(), "01");
    }

    #[test]
    fn chsh_names_missing_cell() {
        let rounds = [round(1, 1, 1, -1), round(1, 3, 1, 1), round(3, 1, 1, -1)];
        assert_eq!(
            chsh_statistic(&rounds),
            Err(ProtocolError::InsufficientData { alice: 3, bob: 3 })
        );
        assert_eq!(
            chsh_statistic(&[]),
            Err(ProtocolError::InsufficientData { alice: 1, bob: 1 })
        );
    }

    #[test]
    fn chsh_from_hand_transcript() {
        // ⟨a1b1⟩ = −1, ⟨a1b3⟩ = +1, ⟨a3b1⟩ = −1, ⟨a3b3⟩ = 0
        let rounds = [
            round(1, 1, 1, -1),
            round(1, 3, -1, -1),
            round(3, 1, 1, -1),
            round(3, 3, 1, 1),
            round(3, 3, 1, -1),
            round(2, 2, 1, 1),
        ];
        assert!((chsh_statistic(&rounds).unwrap() + 3.0).abs() < 1e-15);
    }

    #[test]
    fn detection_boundaries() {
        assert!(detect_eavesdropper(-2.82, DEFAULT_CHSH_THRESHOLD));
        assert!(!detect_eavesdropper(-1.9, DEFAULT_CHSH_THRESHOLD));
        assert!(!detect_eavesdropper(-2.5, DEFAULT_CHSH_THRESHOLD));
        assert!(validate_threshold(2.0).is_err());
        assert!(validate_threshold(2.9).is_err());
        assert!(validate_threshold(2.5).is_ok());
    }

    #[test]
    fn zero_singlets_rejected() {
        assert_eq!(
            run_protocol(0, &ChannelConfig::ideal(), 1).unwrap_err(),
            ProtocolError::NoSinglets
        );
    }

    #[test]
    fn one_singlet_boundary() {
        for seed in 0..20 {
            let r = run_protocol(1, &ChannelConfig::ideal(), seed).unwrap();
            assert!(r.alice_key.len() <= 1);
            assert_eq!(r.chsh_value, None);
            assert!(!r.secure);
        }
    }

    #[test]
    fn channel_config_validates_p() {
        assert!(ChannelConfig::new(1.2, Eavesdropper::None).is_err());
        assert!(ChannelConfig::new(0.0, Eavesdropper::InterceptResend).is_ok());
    }

    #[test]
    fn rate_of_empty_key_is_zero() {
        let mut r = run_protocol(1, &ChannelConfig::ideal(), 0).unwrap();
        r.alice_key = KeyBits::default();
        assert_eq!(key_generation_report(&r).rate_bps, 0.0);
    }

    #[test]
    fn report_row_rate_consistency() {
        let r = run_protocol(500, &ChannelConfig::ideal(), 9).unwrap();
        let row = key_generation_report(&r);
        assert_eq!(row.singlets, 500);
        assert_eq!(row.key_bits, r.alice_key.len());
        assert!((row.rate_bps - row.key_bits as f64 / row.time_s).abs() < 1e-6 * row.rate_bps);
        let csv = key_rate_csv(&[row]);
        assert!(csv.starts_with("singlets,key_bits,time_s,rate_bps,chsh,secure\n500,"));
    }

    #[test]
    fn eve_inactive_matches_plain_run() {
        let a = run_protocol(300, &ChannelConfig::ideal(), 42).unwrap();
        let b = run_protocol(
            300,
            &ChannelConfig::new(1.0, Eavesdropper::None).unwrap(),
            42,
        )
        .unwrap();
        assert!(a.same_transcript(&b));
    }
}
