//! Exhaustive branch enumeration of the sifted `p(a, b, e)` distribution.
//!
//! Every discrete branch (signal × Eve's action × Bob's outcome ×
//! announcement) is visited with its exact weight. The same walk runs over
//! two scalar types: exact rationals for the standard attack, where all
//! Born probabilities are rational in the canonical frames, and `f64`
//! density matrices for everything else.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::adversary::{eve_guess, EnsembleMix, EnsembleSide, EveRecord, EveStrategy, Interceptor};
use crate::bloch::{pure_from_bloch, DensityMatrix, Povm};
use crate::codes::{code_povm, exact_bloch_dot};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::protocol::{announcement_options, derive_bits, sift_accept, Announcement, ChannelModel, ProtocolKind};

/// Index of Eve's abstention symbol in the third table axis.
pub const ABSTAIN: usize = 2;

/// Sift probability plus `p(a, b, e)` conditioned on sifting, with
/// `e ∈ {0, 1, ⊥}` stored at indices `0, 1, 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution<T = f64> {
    pub p_sift: T,
    pub table: [[[T; 3]; 2]; 2],
}

impl<T: Field> JointDistribution<T> {
    fn zero() -> Self {
        let z = || T::zero();
        JointDistribution {
            p_sift: z(),
            table: [[[z(), z(), z()], [z(), z(), z()]], [[z(), z(), z()], [z(), z(), z()]]],
        }
    }

    fn sum_where(&self, pred: impl Fn(usize, usize, usize) -> bool) -> T {
        let mut acc = T::zero();
        for a in 0..2 {
            for b in 0..2 {
                for e in 0..3 {
                    if pred(a, b, e) {
                        acc = acc + self.table[a][b][e].clone();
                    }
                }
            }
        }
        acc
    }

    pub fn total(&self) -> T {
        self.sum_where(|_, _, _| true)
    }

    /// `P(a = b)` among sifted rounds.
    pub fn p_ab(&self) -> T {
        self.sum_where(|a, b, _| a == b)
    }

    /// Key bit error rate `P(a ≠ b)`.
    pub fn qber(&self) -> T {
        self.sum_where(|a, b, _| a != b)
    }

    /// `P(e = a)`; abstentions count as disagreement.
    pub fn p_ae(&self) -> T {
        self.sum_where(|a, _, e| e == a)
    }

    pub fn p_be(&self) -> T {
        self.sum_where(|_, b, e| e == b)
    }

    pub fn p_noguess(&self) -> T {
        self.sum_where(|_, _, e| e == ABSTAIN)
    }

    /// `P(e ≠ ⊥, e ≠ a)`.
    pub fn p_e_wrong_a(&self) -> T {
        self.sum_where(|a, _, e| e != ABSTAIN && e != a)
    }

    pub fn p_e_wrong_b(&self) -> T {
        self.sum_where(|_, b, e| e != ABSTAIN && e != b)
    }

    /// Unconditional probability of a sifted round landing in `(a, b, e)`.
    pub fn unconditional(&self, a: usize, b: usize, e: usize) -> T {
        self.table[a][b][e].clone() * self.p_sift.clone()
    }

    pub fn to_f64(&self) -> JointDistribution<f64> {
        let mut out = JointDistribution::<f64>::zero();
        out.p_sift = self.p_sift.to_f64();
        for a in 0..2 {
            for b in 0..2 {
                for e in 0..3 {
                    out.table[a][b][e] = self.table[a][b][e].to_f64();
                }
            }
        }
        out
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let nonneg = self.table.iter().flatten().flatten().all(|p| p.to_f64() >= -tol);
        nonneg && (self.total().to_f64() - 1.0).abs() <= tol
    }
}

/// How Eve turns her measurement record into a key-bit guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GuessRule {
    /// Treat the outcome as the party's index, abstain if announcements exclude it.
    Index,
    /// Maximum a posteriori bit given the record and announcements; abstain on ties.
    Posterior,
}

/// Standard attack parameters in exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactAttack {
    None,
    InterceptResend { q: BigRational, mix: EnsembleMix },
}

struct Leaf<P> {
    weight: P,
    a: u8,
    b: u8,
    record: Option<EveRecord>,
    ann: Announcement,
}

/// `(probability, Eve's record, forwarded state)` for one measurement branch.
type Branch<P, S> = (P, Option<EveRecord>, S);

trait Algebra {
    type P: Field;
    type State;

    fn protocol(&self) -> ProtocolKind;
    fn signal(&self, j: usize) -> Self::State;
    fn eve_branches(&self, s: &Self::State) -> Result<Vec<Branch<Self::P, Self::State>>>;
    /// Bob's outcome probabilities after the channel.
    fn bob_probabilities(&self, s: &Self::State) -> Result<Vec<Self::P>>;
}

/// Sift probability and the accepted leaves of the round tree.
#[allow(clippy::type_complexity)]
fn sifted_leaves<A: Algebra>(alg: &A) -> Result<(A::P, Vec<Leaf<A::P>>)> {
    let protocol = alg.protocol();
    let n = protocol.size();
    let p_signal = A::P::ratio(1, n as i64);
    let mut p_sift = A::P::zero();
    let mut leaves = Vec::new();
    for j in 1..=n {
        let sent = alg.signal(j);
        for (p_eve, record, state) in alg.eve_branches(&sent)? {
            let w_eve = p_signal.clone() * p_eve;
            for (k0, p_k) in alg.bob_probabilities(&state)?.into_iter().enumerate() {
                if !p_k.is_positive() {
                    continue;
                }
                let k = k0 + 1;
                let options = announcement_options(protocol, k)?;
                let p_ann = A::P::ratio(1, options.len() as i64);
                for ann in options {
                    if !sift_accept(protocol, j, &ann) {
                        continue;
                    }
                    let weight = w_eve.clone() * p_k.clone() * p_ann.clone();
                    let (a, b) = derive_bits(protocol, j, k, &ann)?;
                    p_sift = p_sift + weight.clone();
                    leaves.push(Leaf { weight, a, b, record, ann });
                }
            }
        }
    }
    Ok((p_sift, leaves))
}

fn index_table<P: Field>(protocol: ProtocolKind, p_sift: P, leaves: Vec<Leaf<P>>) -> JointDistribution<P> {
    let mut joint = JointDistribution::<P>::zero();
    for leaf in leaves {
        let e = leaf
            .record
            .and_then(|r| eve_guess(&r, protocol, &leaf.ann, true))
            .map_or(ABSTAIN, usize::from);
        let cell = &mut joint.table[leaf.a as usize][leaf.b as usize][e];
        *cell = cell.clone() + leaf.weight;
    }
    normalize(joint, p_sift)
}

fn posterior_table(p_sift: f64, leaves: Vec<Leaf<f64>>) -> JointDistribution<f64> {
    // Eve's evidence is her record plus the public announcement
    let mut evidence: HashMap<(EveRecord, Announcement), [f64; 2]> = HashMap::new();
    for leaf in &leaves {
        if let Some(rec) = leaf.record.filter(|r| r.intercepted) {
            let target = match rec.ensemble_used {
                Some(EnsembleSide::Bob) => leaf.b,
                _ => leaf.a,
            };
            evidence.entry((rec, leaf.ann)).or_default()[target as usize] += leaf.weight;
        }
    }
    let mut joint = JointDistribution::<f64>::zero();
    for leaf in leaves {
        let e = leaf
            .record
            .filter(|r| r.intercepted)
            .and_then(|rec| {
                let [w0, w1] = evidence[&(rec, leaf.ann)];
                if (w0 - w1).abs() <= 1e-12 * (w0 + w1) {
                    None
                } else {
                    Some(usize::from(w1 > w0))
                }
            })
            .unwrap_or(ABSTAIN);
        joint.table[leaf.a as usize][leaf.b as usize][e] += leaf.weight;
    }
    normalize(joint, p_sift)
}

fn normalize<P: Field>(mut joint: JointDistribution<P>, p_sift: P) -> JointDistribution<P> {
    if p_sift.is_positive() {
        for cell in joint.table.iter_mut().flatten().flatten() {
            *cell = cell.clone() / p_sift.clone();
        }
    }
    joint.p_sift = p_sift;
    joint
}

// ---------------------------------------------------------------------------
// exact path

#[derive(Clone, Copy, PartialEq, Eq)]
enum Component {
    Pure(EnsembleSide, usize),
    Mixed,
}

type ExactState = Vec<(BigRational, Component)>;

struct ExactAlgebra {
    protocol: ProtocolKind,
    q: BigRational,
    mix: Option<EnsembleMix>,
    depolarize: BigRational,
}

impl ExactAlgebra {
    /// `tr(ρ E)` for element `m` of the given side's code POVM.
    fn born(&self, state: &ExactState, side: EnsembleSide, m: usize) -> BigRational {
        let kind = self.protocol.code_kind();
        let weight = BigRational::ratio(2, kind.size() as i64);
        let half = BigRational::ratio(1, 2);
        let mut p = BigRational::zero();
        for (c, comp) in state {
            let overlap = match *comp {
                Component::Mixed => half.clone(),
                Component::Pure(s, i) => {
                    let same = s == side || !kind.is_spherical();
                    let dot: BigRational = exact_bloch_dot(kind, i, m, same);
                    (BigRational::one() + dot) * half.clone()
                }
            };
            p += c * &weight * overlap;
        }
        p
    }
}

impl Algebra for ExactAlgebra {
    type P = BigRational;
    type State = ExactState;

    fn protocol(&self) -> ProtocolKind {
        self.protocol
    }

    fn signal(&self, j: usize) -> ExactState {
        vec![(BigRational::one(), Component::Pure(EnsembleSide::Alice, j))]
    }

    fn eve_branches(&self, s: &ExactState) -> Result<Vec<Branch<BigRational, ExactState>>> {
        let Some(mix) = self.mix else {
            return Ok(vec![(BigRational::one(), None, s.clone())]);
        };
        let mut out = Vec::new();
        let pass = BigRational::one() - &self.q;
        if pass.is_positive() {
            out.push((pass, Some(EveRecord::PASSED), s.clone()));
        }
        for &(side, w) in mix.sides() {
            let w = if w == 1.0 { BigRational::one() } else { BigRational::ratio(1, 2) };
            for m in 1..=self.protocol.size() {
                let p = self.born(s, side, m);
                if !p.is_positive() {
                    continue;
                }
                let record = EveRecord {
                    intercepted: true,
                    ensemble_used: Some(side),
                    outcome_index: Some(m),
                };
                let resent = vec![(BigRational::one(), Component::Pure(side, m))];
                out.push((&self.q * &w * p, Some(record), resent));
            }
        }
        Ok(out)
    }

    fn bob_probabilities(&self, s: &ExactState) -> Result<Vec<BigRational>> {
        let keep = BigRational::one() - &self.depolarize;
        let mut received: ExactState = s.iter().map(|(c, comp)| (c * &keep, *comp)).collect();
        if self.depolarize.is_positive() {
            received.push((self.depolarize.clone(), Component::Mixed));
        }
        Ok((1..=self.protocol.size())
            .map(|k| self.born(&received, EnsembleSide::Bob, k))
            .collect())
    }
}

/// Exact enumeration for no attack or the standard intercept/resend attack,
/// optionally followed by a depolarizing channel of rational strength.
pub fn enumerate_joint_exact(
    protocol: ProtocolKind,
    attack: &ExactAttack,
    depolarize: Option<&BigRational>,
) -> Result<JointDistribution<BigRational>> {
    let unit = |name: &'static str, x: &BigRational| {
        if x < &BigRational::zero() || x > &BigRational::one() {
            Err(Error::InvalidParameter { name, value: x.to_f64() })
        } else {
            Ok(())
        }
    };
    let (q, mix) = match attack {
        ExactAttack::None => (BigRational::zero(), None),
        ExactAttack::InterceptResend { q, mix } => {
            unit("q", q)?;
            (q.clone(), Some(*mix))
        }
    };
    let depolarize = depolarize.cloned().unwrap_or_else(BigRational::zero);
    unit("depolarize", &depolarize)?;
    let alg = ExactAlgebra { protocol, q, mix, depolarize };
    let (p_sift, leaves) = sifted_leaves(&alg)?;
    Ok(index_table(protocol, p_sift, leaves))
}

// ---------------------------------------------------------------------------
// floating-point path

struct NumericAlgebra {
    protocol: ProtocolKind,
    signals: Vec<DensityMatrix>,
    interceptor: Interceptor,
    channel: ChannelModel,
    bob: Povm,
}

impl Algebra for NumericAlgebra {
    type P = f64;
    type State = DensityMatrix;

    fn protocol(&self) -> ProtocolKind {
        self.protocol
    }

    fn signal(&self, j: usize) -> DensityMatrix {
        self.signals[j - 1]
    }

    fn eve_branches(&self, s: &DensityMatrix) -> Result<Vec<Branch<f64, DensityMatrix>>> {
        self.interceptor.branches(s)
    }

    fn bob_probabilities(&self, s: &DensityMatrix) -> Result<Vec<f64>> {
        Ok(self.bob.probabilities(&self.channel.apply(s)?))
    }
}

/// Floating-point enumeration over density matrices; handles every attack.
pub fn enumerate_joint_numeric(
    protocol: ProtocolKind,
    eve: &EveStrategy,
    channel: &ChannelModel,
    rule: GuessRule,
) -> Result<JointDistribution<f64>> {
    channel.validate()?;
    let alg = NumericAlgebra {
        protocol,
        signals: protocol
            .alice_code()
            .states()
            .iter()
            .map(pure_from_bloch)
            .collect::<Result<_>>()?,
        interceptor: Interceptor::new(protocol, eve)?,
        channel: *channel,
        bob: code_povm(&protocol.bob_code()),
    };
    let (p_sift, leaves) = sifted_leaves(&alg)?;
    Ok(match rule {
        GuessRule::Index => index_table(protocol, p_sift, leaves),
        GuessRule::Posterior => posterior_table(p_sift, leaves),
    })
}

/// Exact sifted joint distribution for a protocol, attack and channel.
///
/// No attack and the standard attack go through exact rational arithmetic
/// (inputs are taken at their exact binary value); the gentle attack uses
/// the floating-point route.
pub fn enumerate_joint(
    protocol: ProtocolKind,
    eve: &EveStrategy,
    channel: &ChannelModel,
) -> Result<JointDistribution<f64>> {
    eve.validate()?;
    channel.validate()?;
    let exact = |x: f64| BigRational::from_float(x).expect("validated parameters are finite");
    let attack = match *eve {
        EveStrategy::None => ExactAttack::None,
        EveStrategy::InterceptResend { q, mix } => ExactAttack::InterceptResend { q: exact(q), mix },
        EveStrategy::Gentle { .. } => {
            return enumerate_joint_numeric(protocol, eve, channel, GuessRule::Index);
        }
    };
    let depolarize = match *channel {
        ChannelModel::Ideal => None,
        ChannelModel::Depolarizing(p) => Some(exact(p)),
    };
    Ok(enumerate_joint_exact(protocol, &attack, depolarize.as_ref())?.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rational;

    fn exact_full(protocol: ProtocolKind, mix: EnsembleMix) -> JointDistribution<BigRational> {
        let attack = ExactAttack::InterceptResend { q: rational(1, 1), mix };
        enumerate_joint_exact(protocol, &attack, None).unwrap()
    }

    #[test]
    fn no_attack_is_perfect() {
        for p in ProtocolKind::ALL {
            let j = enumerate_joint_exact(p, &ExactAttack::None, None).unwrap();
            assert_eq!(j.p_ab(), rational(1, 1));
            assert_eq!(j.p_noguess(), rational(1, 1));
        }
    }

    #[test]
    fn trine_alice_only_case_split() {
        let j = exact_full(ProtocolKind::Trine, EnsembleMix::AliceOnly);
        assert_eq!(j.p_sift, rational(7, 12));
        // all three agree
        assert_eq!(j.unconditional(0, 0, 0) + j.unconditional(1, 1, 1), rational(1, 3));
        // Bob and Eve share a bit Alice does not have
        assert_eq!(j.unconditional(0, 1, 1) + j.unconditional(1, 0, 0), rational(1, 12));
        assert_eq!(j.p_be() * j.p_sift.clone(), rational(5, 12));
        assert_eq!(j.p_e_wrong_b(), rational(0, 1));
    }

    #[test]
    fn bob_only_swaps_agreements() {
        let a = exact_full(ProtocolKind::Trine, EnsembleMix::AliceOnly);
        let b = exact_full(ProtocolKind::Trine, EnsembleMix::BobOnly);
        assert_eq!(a.p_ae(), b.p_be());
        assert_eq!(a.p_be(), b.p_ae());
        assert_eq!(a.p_noguess(), b.p_noguess());
    }

    #[test]
    fn numeric_route_matches_exact_route() {
        for p in ProtocolKind::ALL {
            for mix in [EnsembleMix::AliceOnly, EnsembleMix::BobOnly, EnsembleMix::Symmetric] {
                for (qn, qd) in [(0, 1), (3, 10), (1, 1)] {
                    let exact = enumerate_joint_exact(
                        p,
                        &ExactAttack::InterceptResend { q: rational(qn, qd), mix },
                        Some(&rational(1, 5)),
                    )
                    .unwrap()
                    .to_f64();
                    let eve = EveStrategy::InterceptResend { q: qn as f64 / qd as f64, mix };
                    let numeric =
                        enumerate_joint_numeric(p, &eve, &ChannelModel::Depolarizing(0.2), GuessRule::Index)
                            .unwrap();
                    assert!((exact.p_sift - numeric.p_sift).abs() < 1e-12);
                    for (x, y) in exact.table.iter().flatten().flatten().zip(numeric.table.iter().flatten().flatten()) {
                        assert!((x - y).abs() < 1e-12, "{p:?} {mix:?} {qn}/{qd}");
                    }
                }
            }
        }
    }

    #[test]
    fn posterior_rule_reproduces_index_rule_for_standard_attack() {
        for p in ProtocolKind::ALL {
            let eve = EveStrategy::InterceptResend { q: 0.6, mix: EnsembleMix::Symmetric };
            let a = enumerate_joint_numeric(p, &eve, &ChannelModel::Ideal, GuessRule::Index).unwrap();
            let b = enumerate_joint_numeric(p, &eve, &ChannelModel::Ideal, GuessRule::Posterior).unwrap();
            for (x, y) in a.table.iter().flatten().flatten().zip(b.table.iter().flatten().flatten()) {
                assert!((x - y).abs() < 1e-12, "{p:?}");
            }
        }
    }

    #[test]
    fn invalid_exact_parameters() {
        let attack = ExactAttack::InterceptResend { q: rational(3, 2), mix: EnsembleMix::Symmetric };
        assert!(enumerate_joint_exact(ProtocolKind::Trine, &attack, None).is_err());
        assert!(enumerate_joint_exact(ProtocolKind::Trine, &ExactAttack::None, Some(&rational(-1, 2))).is_err());
        let eve = EveStrategy::Gentle { q: 2.0, mix: EnsembleMix::Symmetric };
        assert!(enumerate_joint(ProtocolKind::Trine, &eve, &ChannelModel::Ideal).is_err());
    }
}
