use std::f64::consts::{FRAC_PI_2, SQRT_2};

use qstego_core::e91::{
    chsh_statistic, exact_chsh, run_protocol, sift, BasisTable, ChannelConfig, Eavesdropper,
    TSIRELSON_BOUND,
};
use qstego_core::quantum::{
    depolarize, joint_distribution, measure_single, prepare_singlet, BasisDirection, Outcome,
};

/// Mean and standard deviation of Binomial(n, 2/9).
fn sift_bounds(n: usize) -> (f64, f64) {
    let p = 2.0 / 9.0;
    let n = n as f64;
    (n * p, (n * p * (1.0 - p)).sqrt())
}

#[test]
fn key_agreement_on_ideal_channel() {
    for seed in 0..25 {
        let r = run_protocol(500, &ChannelConfig::ideal(), seed).unwrap();
        assert_eq!(r.alice_key, r.bob_key, "seed {seed}");
        assert_eq!(r.qber(), 0.0);
    }
}

#[test]
fn sifted_length_counts_matching_rounds() {
    let r = run_protocol(400, &ChannelConfig::ideal(), 3).unwrap();
    let matching = r.rounds.iter().filter(|x| x.is_key_round()).count();
    assert_eq!(r.alice_key.len(), matching);
    let (a, b) = sift(&r.rounds);
    assert_eq!((a, b), (r.alice_key.clone(), r.bob_key.clone()));
}

#[test]
fn sifting_fraction_within_three_sigma() {
    // a 3σ band holds with probability ≈ 0.997 per run, so allow the
    // occasional excursion across many seeds and check the pooled mean tightly
    for n in [100, 500, 2000] {
        let seeds = 60u64;
        let mut outside = 0;
        let mut pooled = 0usize;
        for seed in 0..seeds {
            let r = run_protocol(n, &ChannelConfig::ideal(), seed).unwrap();
            let (mean, sd) = sift_bounds(n);
            if (r.alice_key.len() as f64 - mean).abs() > 3.0 * sd {
                outside += 1;
            }
            pooled += r.alice_key.len();
        }
        assert!(outside <= 2, "n={n}: {outside} of {seeds} runs outside 3σ");
        let (mean, sd) = sift_bounds(n * seeds as usize);
        assert!(
            (pooled as f64 - mean).abs() <= 3.0 * sd,
            "n={n} pooled {pooled}"
        );
    }
}

#[test]
fn reference_key_lengths_are_plausible() {
    // reference key lengths for 25/100/250/500 singlets
    for (n, len) in [(25, 7), (100, 25), (250, 57), (500, 106)] {
        let (mean, sd) = sift_bounds(n);
        assert!((len as f64 - mean).abs() <= 3.0 * sd, "n={n} len={len}");
    }
}

#[test]
fn determinism_except_time() {
    let channel = ChannelConfig::new(0.8, Eavesdropper::InterceptResend).unwrap();
    let a = run_protocol(700, &channel, 11).unwrap();
    let b = run_protocol(700, &channel, 11).unwrap();
    assert!(a.same_transcript(&b));
    let c = run_protocol(700, &channel, 12).unwrap();
    assert!(!a.same_transcript(&c));
}

#[test]
fn chsh_exact_scaling() {
    let singlet = prepare_singlet();
    let table = BasisTable::standard();
    assert!((exact_chsh(&singlet, &table) + TSIRELSON_BOUND).abs() < 1e-12);
    for i in 0..=20 {
        let p = f64::from(i) / 20.0;
        let rho = depolarize(&singlet, p).unwrap();
        assert!(
            (exact_chsh(&rho, &table) + TSIRELSON_BOUND * p).abs() < 1e-12,
            "p={p}"
        );
    }
}

#[test]
fn sampled_chsh_tracks_depolarizing() {
    for (p, seed) in [(1.0, 10), (0.7, 11), (0.0, 12)] {
        let channel = ChannelConfig::new(p, Eavesdropper::None).unwrap();
        let r = run_protocol(40_000, &channel, seed).unwrap();
        let e = chsh_statistic(&r.rounds).unwrap();
        // four cell means of ≈ n/9 rounds each, each with variance ≤ 1
        let sigma = (4.0 * 9.0 / 40_000.0f64).sqrt();
        assert!((e + TSIRELSON_BOUND * p).abs() < 3.0 * sigma, "p={p} E={e}");
    }
}

/// Enumerate Eve's basis and outcome to get the exact post-attack
/// correlation for a pair of directions.
fn eve_exact_correlation(ta: f64, tb: f64) -> f64 {
    let singlet = prepare_singlet();
    let mut total = 0.0;
    for eve_angle in [0.0, FRAC_PI_2] {
        let basis = BasisDirection::new(eve_angle);
        // probability that Eve sees +1 on Bob's qubit
        let same = joint_distribution(&singlet, basis, basis);
        let p_plus = same.probability(Outcome::Minus, Outcome::Plus)
            + same.probability(Outcome::Plus, Outcome::Plus);
        for (outcome, prob) in [(Outcome::Plus, p_plus), (Outcome::Minus, 1.0 - p_plus)] {
            // a fixed-outcome rng: u just below or above p_plus selects the branch
            let mut rng = FixedRng(if outcome == Outcome::Plus {
                0.0
            } else {
                0.999_999
            });
            let (got, post) = measure_single(&singlet, 1, basis, &mut rng).unwrap();
            assert_eq!(got, outcome);
            let d = joint_distribution(&post, BasisDirection::new(ta), BasisDirection::new(tb));
            total += 0.5 * prob * d.correlation();
        }
    }
    total
}

struct FixedRng(f64);

impl rand::RngCore for FixedRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }
    fn next_u64(&mut self) -> u64 {
        // rand's f64 sampling uses the top 53 bits
        ((self.0 * (1u64 << 53) as f64) as u64) << 11
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for b in dest {
            *b = 0;
        }
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

#[test]
fn eve_exact_expectations() {
    let t = BasisTable::standard();
    let e: f64 = [(1, 1, 1.0), (1, 3, -1.0), (3, 1, 1.0), (3, 3, 1.0)]
        .iter()
        .map(|&(a, b, s)| {
            s * eve_exact_correlation(t.alice_basis(a).angle(), t.bob_basis(b).angle())
        })
        .sum();
    assert!((e + SQRT_2).abs() < 1e-12, "{e}");
    // key rounds: correlation −1/2 ⇒ P(equal outcomes) = 1/4 ⇒ QBER 25%
    for (a, b) in [(2, 1), (3, 2)] {
        let c = eve_exact_correlation(t.alice_basis(a).angle(), t.bob_basis(b).angle());
        assert!((c + 0.5).abs() < 1e-12);
    }
}

#[test]
fn eve_breaks_chsh_and_keys() {
    let channel = ChannelConfig::ideal().with_eavesdropper(Eavesdropper::InterceptResend);
    let n = 20_000;
    let r = run_protocol(n, &channel, 5).unwrap();
    let e = r.chsh_value.unwrap();
    let sigma = (4.0 * 9.0 / n as f64).sqrt();
    assert!(e.abs() <= 2.0 + 3.0 * sigma, "E={e}");
    assert!((e + SQRT_2).abs() < 3.0 * sigma);
    assert!(!r.secure);
    let k = r.alice_key.len() as f64;
    let qber_sigma = (0.25 * 0.75 / k).sqrt();
    assert!(
        (r.qber() - 0.25).abs() < 3.0 * qber_sigma,
        "qber {}",
        r.qber()
    );
}

#[test]
fn ideal_run_hits_tsirelson() {
    let r = run_protocol(10_000, &ChannelConfig::ideal(), 2024).unwrap();
    let e = r.chsh_value.unwrap();
    assert!((e + 2.0 * SQRT_2).abs() < 0.1, "E={e}");
    assert!(r.secure);
}
