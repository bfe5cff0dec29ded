//! Round-level statistics of the protocol engine over 10⁶ rounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spherekey::montecarlo::{run_trials, TrialConfig};
use spherekey::protocol::*;
use spherekey::EveStrategy;

const N: u64 = 1_000_000;

fn within_3_sigma(hits: u64, n: u64, p: f64) -> bool {
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    (hits as f64 / n as f64 - p).abs() <= 3.0 * sigma
}

/// Pearson statistic against the uniform distribution.
fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

/// Upper 1e-4 quantiles of χ² with 1..=5 degrees of freedom.
const CHI2_CRIT: [f64; 5] = [15.137, 18.421, 21.108, 23.513, 25.745];

#[test]
fn alice_pick_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for protocol in ProtocolKind::ALL {
        let n = protocol.size();
        let mut counts = vec![0u64; n];
        for _ in 0..N {
            counts[alice_pick(protocol, rng.random()) - 1] += 1;
        }
        assert!(chi_square_uniform(&counts) < CHI2_CRIT[n - 2], "{protocol:?} {counts:?}");
    }
}

#[test]
fn announcements_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut trine = [0u64; 3];
    let mut tetra = std::collections::HashMap::new();
    let n = 600_000u64;
    for _ in 0..n {
        if let Announcement::Trine { l } = bob_announce(ProtocolKind::Trine, 3, rng.random()).unwrap() {
            trine[l - 1] += 1;
        }
        *tetra.entry(bob_announce(ProtocolKind::Tetrahedron, 2, rng.random()).unwrap()).or_insert(0u64) += 1;
    }
    assert_eq!(trine[2], 0);
    assert!(chi_square_uniform(&trine[..2]) < CHI2_CRIT[0], "{trine:?}");
    assert_eq!(tetra.len(), 6);
    let counts: Vec<u64> = tetra.values().copied().collect();
    assert!(chi_square_uniform(&counts) < CHI2_CRIT[4], "{counts:?}");
}

#[test]
fn ideal_rounds_are_anticorrelated_and_consistent() {
    for protocol in [ProtocolKind::Trine, ProtocolKind::Tetrahedron] {
        let engine = RoundEngine::new(protocol, &EveStrategy::None, ChannelModel::Ideal).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut accepted = 0;
        for _ in 0..N {
            let t = engine.run(&RoundVariates::draw(&mut rng)).unwrap();
            assert_ne!(t.signal, t.bob_outcome);
            if t.accepted {
                accepted += 1;
                // inference on both sides recovers the true tuple
                assert_eq!(t.alice_bit, t.bob_bit);
                let bits = derive_bits(protocol, t.signal, t.bob_outcome, &t.announcement).unwrap();
                assert_eq!(Some(bits.0), t.alice_bit);
            }
        }
        let p = if protocol == ProtocolKind::Trine { 0.5 } else { 1.0 / 3.0 };
        assert!(within_3_sigma(accepted, N, p), "{protocol:?} {accepted}");
    }
}

#[test]
fn ideal_acceptance_rates_and_secrecy() {
    for (protocol, rate) in [
        (ProtocolKind::Trine, 0.5),
        (ProtocolKind::Tetrahedron, 1.0 / 3.0),
        (ProtocolKind::Bb84, 0.5),
        (ProtocolKind::SixState, 1.0 / 3.0),
    ] {
        let stats = run_trials(&TrialConfig {
            protocol,
            eve: EveStrategy::None,
            channel: ChannelModel::Ideal,
            n_rounds: N,
            seed: 4,
        })
        .unwrap();
        assert!(within_3_sigma(stats.sifted, N, rate), "{protocol:?}");
        assert_eq!(stats.errors, 0);
        assert!(stats.announcement_information() < 1e-3, "{protocol:?}");
    }
}

#[test]
fn fully_depolarized_channel_gives_coin_flip_bits() {
    for protocol in ProtocolKind::ALL {
        let stats = run_trials(&TrialConfig {
            protocol,
            eve: EveStrategy::None,
            channel: ChannelModel::Depolarizing(1.0),
            n_rounds: 200_000,
            seed: 5,
        })
        .unwrap();
        assert!(within_3_sigma(stats.errors, stats.sifted, 0.5), "{protocol:?}");
    }
}

#[test]
fn full_interception_raises_trine_acceptance() {
    let eve = EveStrategy::InterceptResend { q: 1.0, mix: spherekey::EnsembleMix::Symmetric };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 300_000u64;
    let mut accepted = 0;
    for _ in 0..n {
        let t = run_round(ProtocolKind::Trine, &eve, ChannelModel::Ideal, &mut rng).unwrap();
        assert!(t.eve_record.is_some_and(|r| r.intercepted));
        accepted += t.accepted as u64;
    }
    assert!(within_3_sigma(accepted, n, 7.0 / 12.0), "{accepted}");
}
