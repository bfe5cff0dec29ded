//! Key-rate sweeps, tolerable-error thresholds and depolarizing curves.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::information::{key_rate, RateReport};
use super::joint::{enumerate_joint, enumerate_joint_exact, enumerate_joint_numeric, ExactAttack, GuessRule, JointDistribution};
use crate::adversary::{EnsembleMix, EveStrategy};
use crate::error::{Error, Result};
use crate::protocol::{ChannelModel, ProtocolKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackFamily {
    Standard,
    Gentle,
}

impl AttackFamily {
    pub fn strategy(self, q: f64, mix: EnsembleMix) -> EveStrategy {
        match self {
            AttackFamily::Standard => EveStrategy::InterceptResend { q, mix },
            AttackFamily::Gentle => EveStrategy::Gentle { q, mix },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub q_star: f64,
    pub qber_star: f64,
    pub rate_at_q_star: f64,
}

/// One row of a key-rate sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: f64,
    pub p_sift: f64,
    pub qber: f64,
    pub i_ab: f64,
    pub i_ae: f64,
    pub i_be: f64,
    pub r: f64,
}

impl SweepRow {
    fn new(q: f64, joint: &JointDistribution, rate: &RateReport) -> Self {
        SweepRow {
            q,
            p_sift: joint.p_sift,
            qber: joint.qber(),
            i_ab: rate.i_ab,
            i_ae: rate.i_ae,
            i_be: rate.i_be,
            r: rate.r,
        }
    }
}

/// Evaluates the sifted distribution and its key rate for one attack setting.
pub fn evaluate(
    protocol: ProtocolKind,
    eve: &EveStrategy,
    channel: &ChannelModel,
    rule: GuessRule,
) -> Result<(JointDistribution, RateReport)> {
    let joint = match rule {
        GuessRule::Index => enumerate_joint(protocol, eve, channel)?,
        GuessRule::Posterior => enumerate_joint_numeric(protocol, eve, channel, rule)?,
    };
    let rate = key_rate(&joint)?;
    Ok((joint, rate))
}

pub fn sweep(
    protocol: ProtocolKind,
    family: AttackFamily,
    mix: EnsembleMix,
    channel: &ChannelModel,
    grid: &[f64],
) -> Result<Vec<SweepRow>> {
    grid.par_iter()
        .map(|&q| {
            let (joint, rate) = evaluate(protocol, &family.strategy(q, mix), channel, GuessRule::Index)?;
            Ok(SweepRow::new(q, &joint, &rate))
        })
        .collect()
}

/// Threshold under the symmetric ensemble mix and index guess rule.
pub fn find_threshold(protocol: ProtocolKind, family: AttackFamily) -> Result<Threshold> {
    find_threshold_with(protocol, family, EnsembleMix::Symmetric, GuessRule::Index)
}

/// Bisects `R(q) = 0` on `[0, 1]` until `|R| < 1e-10` or the bracket is
/// narrower than `1e-9`.
pub fn find_threshold_with(
    protocol: ProtocolKind,
    family: AttackFamily,
    mix: EnsembleMix,
    rule: GuessRule,
) -> Result<Threshold> {
    let eval = |q: f64| evaluate(protocol, &family.strategy(q, mix), &ChannelModel::Ideal, rule);
    let (q_star, (joint, rate)) = bisect_rate_root(eval)?;
    Ok(Threshold {
        q_star,
        qber_star: joint.qber(),
        rate_at_q_star: rate.r,
    })
}

fn bisect_rate_root<T>(eval: impl Fn(f64) -> Result<(T, RateReport)>) -> Result<(f64, (T, RateReport))> {
    let r_low = eval(0.0)?.1.r;
    let r_high = eval(1.0)?.1.r;
    if !(r_low > 0.0 && r_high < 0.0) {
        return Err(Error::NoThreshold { r_low, r_high });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        let value = eval(mid)?;
        let r = value.1.r;
        if r.abs() < 1e-10 || hi - lo < 1e-9 {
            return Ok((mid, value));
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingRow {
    pub p: f64,
    pub p_sift: f64,
    pub qber: f64,
}

/// Sift rate and bit error rate with no eavesdropper and a depolarizing
/// channel of each strength in `grid`.
pub fn depolarizing_curves(protocol: ProtocolKind, grid: &[f64]) -> Result<Vec<DepolarizingRow>> {
    grid.iter()
        .map(|&p| {
            let joint = enumerate_joint(protocol, &EveStrategy::None, &ChannelModel::Depolarizing(p))?;
            Ok(DepolarizingRow { p, p_sift: joint.p_sift, qber: joint.qber() })
        })
        .collect()
}

/// Exact `(p, p_sift, qber)` rows for rational channel strengths.
pub fn depolarizing_curves_exact(
    protocol: ProtocolKind,
    grid: &[BigRational],
) -> Result<Vec<(BigRational, BigRational, BigRational)>> {
    grid.iter()
        .map(|p| {
            let joint = enumerate_joint_exact(protocol, &ExactAttack::None, Some(p))?;
            Ok((p.clone(), joint.p_sift.clone(), joint.qber()))
        })
        .collect()
}
