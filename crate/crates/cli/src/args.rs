use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use spherekey::analysis::AttackFamily;
use spherekey::{EnsembleMix, EveStrategy, ProtocolKind};

#[derive(Debug, Parser)]
#[command(name = "spherekey", version, about = "Analyse and simulate trine, tetrahedron, BB84 and six-state key distribution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact sifting, error and information rates at one attack strength.
    Analytic(AnalyticArgs),
    /// Attack strength and bit error rate at which the key rate vanishes.
    Threshold(ThresholdArgs),
    /// Seeded Monte Carlo run compared against the exact enumeration.
    Simulate(SimulateArgs),
    /// Rates over a grid of attack strengths.
    Sweep(SweepArgs),
    /// Infer the interception fraction from sifting counts.
    EstimateQ(EstimateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolArg {
    Trine,
    Tetra,
    Bb84,
    SixState,
}

impl From<ProtocolArg> for ProtocolKind {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Trine => ProtocolKind::Trine,
            ProtocolArg::Tetra => ProtocolKind::Tetrahedron,
            ProtocolArg::Bb84 => ProtocolKind::Bb84,
            ProtocolArg::SixState => ProtocolKind::SixState,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackArg {
    None,
    Standard,
    Gentle,
}

impl AttackArg {
    pub fn family(self) -> Option<AttackFamily> {
        match self {
            AttackArg::None => None,
            AttackArg::Standard => Some(AttackFamily::Standard),
            AttackArg::Gentle => Some(AttackFamily::Gentle),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixArg {
    Alice,
    Bob,
    #[default]
    Symmetric,
}

impl From<MixArg> for EnsembleMix {
    fn from(m: MixArg) -> Self {
        match m {
            MixArg::Alice => EnsembleMix::AliceOnly,
            MixArg::Bob => EnsembleMix::BobOnly,
            MixArg::Symmetric => EnsembleMix::Symmetric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    #[arg(long, value_enum, default_value_t = AttackArg::Standard)]
    pub attack: AttackArg,
    /// Which ensemble Eve measures with.
    #[arg(long, value_enum, default_value_t = MixArg::Symmetric)]
    pub mix: MixArg,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub attack: AttackArgs,
    /// Attack strength in [0, 1]; required unless --attack none.
    #[arg(long)]
    pub q: Option<f64>,
    /// Depolarizing probability applied after Eve.
    #[arg(long)]
    pub depolarize: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub attack: AttackArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub attack: AttackArgs,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub depolarize: Option<f64>,
    /// Number of rounds.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub attack: AttackArgs,
    #[arg(long)]
    pub depolarize: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 1.0)]
    pub to: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    /// Mix assumed when evaluating qber and R at the estimate.
    #[arg(long, value_enum, default_value_t = MixArg::Symmetric)]
    pub mix: MixArg,
    /// Number of sifted rounds.
    #[arg(long)]
    pub sift: u64,
    /// Number of rounds sent.
    #[arg(long)]
    pub total: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Builds the strategy for `attack` at strength `q`.
pub fn strategy(attack: AttackArg, q: Option<f64>, mix: MixArg) -> Result<EveStrategy, String> {
    match (attack.family(), q) {
        (None, _) => Ok(EveStrategy::None),
        (Some(family), Some(q)) => Ok(family.strategy(q, mix.into())),
        (Some(_), None) => Err("--q is required for this attack".into()),
    }
}
