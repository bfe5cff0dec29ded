//! Seeded Monte Carlo runs and their comparison with the exact enumeration.
//!
//! Round `i` of a trial draws its six uniforms from a ChaCha8 stream keyed
//! by the trial seed with stream id `i`, so results do not depend on how
//! rounds are split across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::EveStrategy;
use crate::analysis::{mutual_information, JointDistribution};
use crate::error::{Error, Result};
use crate::protocol::{ChannelModel, ProtocolKind, RoundEngine, RoundTranscript, RoundVariates};

const CHUNK: u64 = 1 << 13;
const ANNOUNCEMENT_CODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub protocol: ProtocolKind,
    pub eve: EveStrategy,
    pub channel: ChannelModel,
    pub n_rounds: u64,
    pub seed: u64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::InvalidConfig("n_rounds must be at least 1".into()));
        }
        self.eve.validate()?;
        self.channel.validate()
    }
}

/// Counts from a batch of rounds. Merging is associative and commutative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleStats {
    pub rounds: u64,
    pub sifted: u64,
    /// Sifted rounds with `a ≠ b`.
    pub errors: u64,
    pub eve_correct_a: u64,
    pub eve_correct_b: u64,
    pub eve_abstain: u64,
    /// Sifted-round counts indexed by `[announcement code][alice bit]`.
    pub announcement_bits: Vec<[u64; 2]>,
}

impl Default for SampleStats {
    fn default() -> Self {
        SampleStats {
            rounds: 0,
            sifted: 0,
            errors: 0,
            eve_correct_a: 0,
            eve_correct_b: 0,
            eve_abstain: 0,
            announcement_bits: vec![[0; 2]; ANNOUNCEMENT_CODES],
        }
    }
}

/// A rate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    fn binomial(hits: u64, trials: u64) -> Self {
        if trials == 0 {
            return Estimate { value: 0.0, stderr: 0.0 };
        }
        let p = hits as f64 / trials as f64;
        Estimate { value: p, stderr: (p * (1.0 - p) / trials as f64).sqrt() }
    }
}

impl SampleStats {
    pub fn record(&mut self, t: &RoundTranscript) {
        self.rounds += 1;
        if !t.accepted {
            return;
        }
        let (Some(a), Some(b)) = (t.alice_bit, t.bob_bit) else {
            return;
        };
        self.sifted += 1;
        self.errors += u64::from(a != b);
        match t.eve_guess {
            None => self.eve_abstain += 1,
            Some(e) => {
                self.eve_correct_a += u64::from(e == a);
                self.eve_correct_b += u64::from(e == b);
            }
        }
        self.announcement_bits[t.announcement.code()][a as usize] += 1;
    }

    pub fn merge(mut self, other: &SampleStats) -> SampleStats {
        self.rounds += other.rounds;
        self.sifted += other.sifted;
        self.errors += other.errors;
        self.eve_correct_a += other.eve_correct_a;
        self.eve_correct_b += other.eve_correct_b;
        self.eve_abstain += other.eve_abstain;
        for (mine, theirs) in self.announcement_bits.iter_mut().zip(&other.announcement_bits) {
            mine[0] += theirs[0];
            mine[1] += theirs[1];
        }
        self
    }

    pub fn sift_rate(&self) -> Estimate {
        Estimate::binomial(self.sifted, self.rounds)
    }

    pub fn qber(&self) -> Estimate {
        Estimate::binomial(self.errors, self.sifted)
    }

    pub fn eve_agree_a(&self) -> Estimate {
        Estimate::binomial(self.eve_correct_a, self.sifted)
    }

    pub fn eve_agree_b(&self) -> Estimate {
        Estimate::binomial(self.eve_correct_b, self.sifted)
    }

    pub fn eve_abstain_rate(&self) -> Estimate {
        Estimate::binomial(self.eve_abstain, self.sifted)
    }

    /// Plug-in estimate, in bits, of what the public announcements reveal
    /// about Alice's key bit on sifted rounds.
    pub fn announcement_information(&self) -> f64 {
        if self.sifted == 0 {
            return 0.0;
        }
        let table: Vec<[f64; 2]> = self
            .announcement_bits
            .iter()
            .map(|row| [row[0] as f64, row[1] as f64])
            .collect();
        mutual_information(&table).unwrap_or(0.0)
    }
}

fn round_key(seed: u64) -> [u8; 32] {
    ChaCha8Rng::seed_from_u64(seed).get_seed()
}

/// Uniforms for round `index` of a trial with the given seed.
pub fn round_variates(seed: u64, index: u64) -> RoundVariates {
    let mut rng = ChaCha8Rng::from_seed(round_key(seed));
    rng.set_stream(index);
    RoundVariates::draw(&mut rng)
}

fn run_range(engine: &RoundEngine, key: [u8; 32], start: u64, end: u64) -> Result<SampleStats> {
    let mut stats = SampleStats::default();
    let mut rng = ChaCha8Rng::from_seed(key);
    for index in start..end {
        rng.set_stream(index);
        rng.set_word_pos(0);
        stats.record(&engine.run(&RoundVariates::draw(&mut rng))?);
    }
    Ok(stats)
}

/// Runs `n_rounds` rounds in parallel; identical configs give identical stats.
pub fn run_trials(config: &TrialConfig) -> Result<SampleStats> {
    config.validate()?;
    let engine = RoundEngine::new(config.protocol, &config.eve, config.channel)?;
    let key = round_key(config.seed);
    let chunks = config.n_rounds.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| run_range(&engine, key, c * CHUNK, ((c + 1) * CHUNK).min(config.n_rounds)))
        .try_reduce(SampleStats::default, |a, b| Ok(a.merge(&b)))
}

/// Same result as [`run_trials`], computed on the calling thread.
pub fn run_trials_serial(config: &TrialConfig) -> Result<SampleStats> {
    config.validate()?;
    let engine = RoundEngine::new(config.protocol, &config.eve, config.channel)?;
    run_range(&engine, round_key(config.seed), 0, config.n_rounds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatComparison {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub trials: u64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub comparisons: Vec<StatComparison>,
    pub max_abs_z: f64,
    /// True when any `|z|` exceeds [`ComparisonReport::Z_LIMIT`].
    pub flagged: bool,
}

impl ComparisonReport {
    pub const Z_LIMIT: f64 = 4.0;
}

fn z_score(observed: f64, expected: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let n = trials as f64;
    // a degenerate expectation still allows a one-count resolution
    let var = (expected * (1.0 - expected)).max(1.0 / n) / n;
    let diff = observed - expected;
    if diff.abs() < 1e-15 {
        0.0
    } else {
        diff / var.sqrt()
    }
}

/// Binomial z-scores of each empirical rate against the enumeration.
pub fn compare_to_oracle(stats: &SampleStats, joint: &JointDistribution<f64>) -> ComparisonReport {
    let rows = [
        ("sift_rate", stats.sift_rate(), joint.p_sift, stats.rounds),
        ("qber", stats.qber(), joint.qber(), stats.sifted),
        ("eve_agree_a", stats.eve_agree_a(), joint.p_ae(), stats.sifted),
        ("eve_agree_b", stats.eve_agree_b(), joint.p_be(), stats.sifted),
        ("eve_abstain", stats.eve_abstain_rate(), joint.p_noguess(), stats.sifted),
    ];
    let comparisons: Vec<StatComparison> = rows
        .into_iter()
        .map(|(name, est, expected, trials)| StatComparison {
            name: name.to_string(),
            observed: est.value,
            expected,
            trials,
            z: z_score(est.value, expected, trials),
        })
        .collect();
    let max_abs_z = comparisons.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
    ComparisonReport {
        comparisons,
        max_abs_z,
        flagged: max_abs_z > ComparisonReport::Z_LIMIT,
    }
}
