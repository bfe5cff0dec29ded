use spherekey::analysis::{
    analytic_curves, enumerate_joint, estimate_q_from_sift, evaluate, find_threshold_with, sweep, AttackFamily,
    GuessRule,
};
use spherekey::montecarlo::{compare_to_oracle, run_trials, TrialConfig};
use spherekey::{ChannelModel, ProtocolKind};

use crate::args::*;
use crate::record::{Grid, OutputRecord};

/// A finished command: the record to print and the process exit code.
pub struct Outcome {
    pub record: OutputRecord,
    pub exit_code: u8,
}

impl From<OutputRecord> for Outcome {
    fn from(record: OutputRecord) -> Self {
        Outcome { record, exit_code: 0 }
    }
}

fn channel(depolarize: Option<f64>) -> Result<ChannelModel, String> {
    let c = depolarize.map_or(ChannelModel::Ideal, ChannelModel::Depolarizing);
    c.validate().map_err(|e| e.to_string())?;
    Ok(c)
}

fn family(attack: AttackArg) -> Result<AttackFamily, String> {
    attack.family().ok_or_else(|| "this command needs --attack standard or --attack gentle".to_string())
}

fn base(command: &str, a: &AttackArgs) -> OutputRecord {
    OutputRecord { attack: Some(a.attack), mix: Some(a.mix), ..OutputRecord::new(command, a.protocol) }
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

pub fn analytic(args: &AnalyticArgs) -> Result<Outcome, String> {
    let a = &args.attack;
    let eve = strategy(a.attack, args.q, a.mix)?;
    let (joint, rate) =
        evaluate(a.protocol.into(), &eve, &channel(args.depolarize)?, GuessRule::Index).map_err(|e| e.to_string())?;
    Ok(OutputRecord {
        q: args.q,
        depolarize: args.depolarize,
        p_sift: Some(joint.p_sift),
        qber: Some(joint.qber()),
        p_noguess: Some(joint.p_noguess()),
        i_ab: Some(rate.i_ab),
        i_ae: Some(rate.i_ae),
        i_be: Some(rate.i_be),
        r: Some(rate.r),
        ..base("analytic", a)
    }
    .into())
}

pub fn threshold(args: &ThresholdArgs) -> Result<Outcome, String> {
    let a = &args.attack;
    let t = find_threshold_with(a.protocol.into(), family(a.attack)?, a.mix.into(), GuessRule::Index)
        .map_err(|e| e.to_string())?;
    Ok(OutputRecord {
        q_star: Some(round4(t.q_star)),
        qber_star: Some(round4(t.qber_star)),
        ..base("threshold", a)
    }
    .into())
}

pub fn simulate(args: &SimulateArgs) -> Result<Outcome, String> {
    let a = &args.attack;
    let protocol: ProtocolKind = a.protocol.into();
    let config = TrialConfig {
        protocol,
        eve: strategy(a.attack, args.q, a.mix)?,
        channel: channel(args.depolarize)?,
        n_rounds: args.n,
        seed: args.seed,
    };
    let stats = run_trials(&config).map_err(|e| e.to_string())?;
    let joint = enumerate_joint(protocol, &config.eve, &config.channel).map_err(|e| e.to_string())?;
    let report = compare_to_oracle(&stats, &joint);
    let record = OutputRecord {
        q: args.q,
        depolarize: args.depolarize,
        seed: Some(args.seed),
        n_rounds: Some(args.n),
        p_sift: Some(stats.sift_rate().value),
        qber: Some(stats.qber().value),
        sifted: Some(stats.sifted),
        errors: Some(stats.errors),
        max_abs_z: Some(report.max_abs_z),
        flagged: Some(report.flagged),
        statistics: Some(report.comparisons),
        ..base("simulate", a)
    };
    Ok(Outcome { record, exit_code: if report.flagged { 2 } else { 0 } })
}

fn grid_points(from: f64, to: f64, step: f64) -> Result<Vec<f64>, String> {
    let ok = (0.0..=1.0).contains(&from) && (0.0..=1.0).contains(&to) && from <= to && step > 0.0 && step.is_finite();
    if !ok {
        return Err(format!("invalid grid {from}..{to} step {step}; need 0 ≤ from ≤ to ≤ 1 and step > 0"));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    // snap to 12 decimals so 0.07 prints as 0.07 rather than 0.07000000000000001
    Ok((0..count).map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12).collect())
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<Outcome, String> {
    let a = &args.attack;
    let grid = grid_points(args.from, args.to, args.step)?;
    let rows = sweep(a.protocol.into(), family(a.attack)?, a.mix.into(), &channel(args.depolarize)?, &grid)
        .map_err(|e| e.to_string())?;
    Ok(OutputRecord {
        depolarize: args.depolarize,
        grid: Some(Grid { from: args.from, to: args.to, step: args.step }),
        rows: Some(rows),
        ..base("sweep", a)
    }
    .into())
}

pub fn estimate_q(args: &EstimateArgs) -> Result<Outcome, String> {
    if args.total == 0 {
        return Err("--total must be positive".into());
    }
    if args.sift > args.total {
        return Err("--sift cannot exceed --total".into());
    }
    let protocol: ProtocolKind = args.protocol.into();
    let curves = analytic_curves(protocol).map_err(|e| e.to_string())?;
    let n = args.total as f64;
    let s = args.sift as f64 / n;
    let sift_stderr = (s * (1.0 - s) / n).sqrt();
    let est = estimate_q_from_sift(protocol, s, 3.0 * sift_stderr).map_err(|e| e.to_string())?;
    let slope = 1.0 / (curves.p_sift(&1.0) - curves.p_sift(&0.0));
    let eve = AttackFamily::Standard.strategy(est.q, args.mix.into());
    let (joint, rate) = evaluate(protocol, &eve, &ChannelModel::Ideal, GuessRule::Index).map_err(|e| e.to_string())?;
    Ok(OutputRecord {
        attack: Some(AttackArg::Standard),
        mix: Some(args.mix),
        sift_count: Some(args.sift),
        total_count: Some(args.total),
        p_sift: Some(s),
        q: Some(est.q),
        q_stderr: Some(slope.abs() * sift_stderr),
        in_model: Some(est.in_model),
        qber: Some(joint.qber()),
        i_ab: Some(rate.i_ab),
        i_ae: Some(rate.i_ae),
        i_be: Some(rate.i_be),
        r: Some(rate.r),
        ..OutputRecord::new("estimate-q", args.protocol)
    }
    .into())
}

pub fn run(command: &Command) -> Result<(Outcome, &OutputArgs), String> {
    Ok(match command {
        Command::Analytic(a) => (analytic(a)?, &a.output),
        Command::Threshold(a) => (threshold(a)?, &a.output),
        Command::Simulate(a) => (simulate(a)?, &a.output),
        Command::Sweep(a) => (sweep_cmd(a)?, &a.output),
        Command::EstimateQ(a) => (estimate_q(a)?, &a.output),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inclusive_and_clean() {
        let g = grid_points(0.0, 1.0, 0.01).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[7], 0.07);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(grid_points(0.5, 0.2, 0.1).is_err());
        assert!(grid_points(0.0, 1.0, 0.0).is_err());
    }
}
