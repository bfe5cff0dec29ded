//! Exact analysis: enumerated joint distributions, closed-form curves,
//! mutual information and key rates, thresholds and sift-rate inversion.

mod curves;
mod information;
mod joint;
mod threshold;

pub use curves::{analytic_curves, estimate_q_from_sift, AnalyticCurves, SiftEstimate};
pub use information::{binary_entropy, key_rate, mutual_information, RateReport};
pub use joint::{
    enumerate_joint, enumerate_joint_exact, enumerate_joint_numeric, ExactAttack, GuessRule,
    JointDistribution, ABSTAIN,
};
pub use threshold::{
    depolarizing_curves, depolarizing_curves_exact, evaluate, find_threshold, find_threshold_with,
    sweep, AttackFamily, DepolarizingRow, SweepRow, Threshold,
};
