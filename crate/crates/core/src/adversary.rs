//! Eve: standard intercept/resend and the gentle smeared-POVM attack.
//!
//! Eve measures with either Alice's code or Bob's dual code. In the
//! standard attack she intercepts a fraction `q` of signals and resends the
//! pure state of the measuring ensemble. In the gentle attack every element
//! `q·(2/n)P_m + ((1 − q)/n)·I` is applied through its square root and the
//! disturbed state is forwarded. Her key-bit guess takes the outcome as the
//! party's index and abstains when the announcements rule it out.

use serde::{Deserialize, Serialize};

use crate::bloch::{
    born_probability, pure_from_bloch, sample_index, sqrt_post_measurement_state, DensityMatrix,
    Povm, PovmElement, ZERO_PROB,
};
use crate::codes::{code_povm, SphericalCode};
use crate::error::{Error, Result};
use crate::protocol::{basis_bit, basis_of, remaining_index, tuple_bit, Announcement, ProtocolKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnsembleMix {
    AliceOnly,
    BobOnly,
    /// Fair coin per signal between the two ensembles.
    Symmetric,
}

impl EnsembleMix {
    /// `(side, weight)` pairs with positive weight.
    pub fn sides(self) -> &'static [(EnsembleSide, f64)] {
        match self {
            EnsembleMix::AliceOnly => &[(EnsembleSide::Alice, 1.0)],
            EnsembleMix::BobOnly => &[(EnsembleSide::Bob, 1.0)],
            EnsembleMix::Symmetric => &[(EnsembleSide::Alice, 0.5), (EnsembleSide::Bob, 0.5)],
        }
    }

    pub fn pick(self, u: f64) -> EnsembleSide {
        match self {
            EnsembleMix::AliceOnly => EnsembleSide::Alice,
            EnsembleMix::BobOnly => EnsembleSide::Bob,
            EnsembleMix::Symmetric if u < 0.5 => EnsembleSide::Alice,
            EnsembleMix::Symmetric => EnsembleSide::Bob,
        }
    }
}

impl std::str::FromStr for EnsembleMix {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "alice" => Ok(EnsembleMix::AliceOnly),
            "bob" => Ok(EnsembleMix::BobOnly),
            "symmetric" => Ok(EnsembleMix::Symmetric),
            other => Err(format!("unknown ensemble mix `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnsembleSide {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EveStrategy {
    None,
    InterceptResend { q: f64, mix: EnsembleMix },
    Gentle { q: f64, mix: EnsembleMix },
}

impl EveStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EveStrategy::InterceptResend { q, .. } | EveStrategy::Gentle { q, .. }
                if !(0.0..=1.0).contains(&q) =>
            {
                Err(Error::InvalidParameter { name: "q", value: q })
            }
            _ => Ok(()),
        }
    }

    pub fn strength(&self) -> f64 {
        match *self {
            EveStrategy::None => 0.0,
            EveStrategy::InterceptResend { q, .. } | EveStrategy::Gentle { q, .. } => q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EveRecord {
    pub intercepted: bool,
    pub ensemble_used: Option<EnsembleSide>,
    /// 1-based outcome of Eve's measurement.
    pub outcome_index: Option<usize>,
}

impl EveRecord {
    pub const PASSED: EveRecord = EveRecord {
        intercepted: false,
        ensemble_used: None,
        outcome_index: None,
    };

    fn measured(side: EnsembleSide, outcome: usize) -> Self {
        EveRecord {
            intercepted: true,
            ensemble_used: Some(side),
            outcome_index: Some(outcome),
        }
    }
}

/// Smeared code POVM with elements `q·(2/n)|ψ_m⟩⟨ψ_m| + ((1 − q)/n)·I`.
pub fn gentle_povm(code: &SphericalCode, q: f64) -> Result<Povm> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter { name: "q", value: q });
    }
    let n = code.len() as f64;
    let elements = code
        .states()
        .iter()
        .map(|v| PovmElement::weighted_projector(v, q * 2.0 / n, (1.0 - q) / n))
        .collect();
    Povm::new(elements)
}

#[derive(Debug, Clone)]
struct Ensemble {
    povm: Povm,
    resend: Vec<DensityMatrix>,
}

impl Ensemble {
    fn new(code: &SphericalCode, gentle_strength: Option<f64>) -> Result<Self> {
        let povm = match gentle_strength {
            Some(q) => gentle_povm(code, q)?,
            None => code_povm(code),
        };
        let resend = code.states().iter().map(pure_from_bloch).collect::<Result<_>>()?;
        Ok(Ensemble { povm, resend })
    }
}

/// Eve's measuring apparatus for one protocol and strategy.
#[derive(Debug, Clone)]
pub struct Interceptor {
    strategy: EveStrategy,
    alice: Option<Ensemble>,
    bob: Option<Ensemble>,
}

impl Interceptor {
    pub fn new(protocol: ProtocolKind, strategy: &EveStrategy) -> Result<Self> {
        strategy.validate()?;
        let gentle = match *strategy {
            EveStrategy::None => {
                return Ok(Interceptor { strategy: *strategy, alice: None, bob: None });
            }
            EveStrategy::InterceptResend { .. } => None,
            EveStrategy::Gentle { q, .. } => Some(q),
        };
        Ok(Interceptor {
            strategy: *strategy,
            alice: Some(Ensemble::new(&protocol.alice_code(), gentle)?),
            bob: Some(Ensemble::new(&protocol.bob_code(), gentle)?),
        })
    }

    pub fn strategy(&self) -> &EveStrategy {
        &self.strategy
    }

    fn ensemble(&self, side: EnsembleSide) -> &Ensemble {
        let e = match side {
            EnsembleSide::Alice => self.alice.as_ref(),
            EnsembleSide::Bob => self.bob.as_ref(),
        };
        e.expect("ensembles exist for every active strategy")
    }

    fn measure(&self, side: EnsembleSide, rho: &DensityMatrix, m: usize) -> Result<DensityMatrix> {
        let ens = self.ensemble(side);
        match self.strategy {
            EveStrategy::Gentle { .. } => sqrt_post_measurement_state(rho, &ens.povm.elements()[m]),
            _ => Ok(ens.resend[m]),
        }
    }

    /// Samples Eve's action from three uniforms (interception coin,
    /// ensemble coin, outcome).
    pub fn apply(
        &self,
        rho: &DensityMatrix,
        coin: f64,
        ensemble_coin: f64,
        outcome_u: f64,
    ) -> Result<(DensityMatrix, Option<EveRecord>)> {
        let mix = match self.strategy {
            EveStrategy::None => return Ok((*rho, None)),
            EveStrategy::InterceptResend { q, .. } if coin >= q => {
                return Ok((*rho, Some(EveRecord::PASSED)));
            }
            EveStrategy::InterceptResend { mix, .. } | EveStrategy::Gentle { mix, .. } => mix,
        };
        let side = mix.pick(ensemble_coin);
        let probs = self.ensemble(side).povm.probabilities(rho);
        let m = sample_index(&probs, outcome_u);
        let forwarded = self.measure(side, rho, m)?;
        Ok((forwarded, Some(EveRecord::measured(side, m + 1))))
    }

    /// Every branch of Eve's action with its probability.
    pub fn branches(&self, rho: &DensityMatrix) -> Result<Vec<(f64, Option<EveRecord>, DensityMatrix)>> {
        let (intercept_prob, mix) = match self.strategy {
            EveStrategy::None => return Ok(vec![(1.0, None, *rho)]),
            EveStrategy::InterceptResend { q, mix } => (q, mix),
            EveStrategy::Gentle { mix, .. } => (1.0, mix),
        };
        let mut out = Vec::new();
        if intercept_prob < 1.0 {
            out.push((1.0 - intercept_prob, Some(EveRecord::PASSED), *rho));
        }
        for &(side, w) in mix.sides() {
            for (m, e) in self.ensemble(side).povm.elements().iter().enumerate() {
                let p = born_probability(rho, e);
                if p <= ZERO_PROB {
                    continue;
                }
                let state = self.measure(side, rho, m)?;
                out.push((intercept_prob * w * p, Some(EveRecord::measured(side, m + 1)), state));
            }
        }
        Ok(out)
    }
}

/// Single-shot interception; see [`Interceptor::apply`].
pub fn intercept(
    strategy: &EveStrategy,
    protocol: ProtocolKind,
    rho: &DensityMatrix,
    coins: [f64; 3],
) -> Result<(DensityMatrix, Option<EveRecord>)> {
    Interceptor::new(protocol, strategy)?.apply(rho, coins[0], coins[1], coins[2])
}

/// Eve's key-bit guess on a sifted round, or `None` to abstain.
pub fn eve_guess(
    record: &EveRecord,
    protocol: ProtocolKind,
    ann: &Announcement,
    accepted: bool,
) -> Option<u8> {
    if !accepted || !record.intercepted {
        return None;
    }
    let side = record.ensemble_used?;
    let m = record.outcome_index?;
    if let Announcement::Basis { basis } = *ann {
        return (basis_of(m) == basis).then(|| basis_bit(m));
    }
    if ann.excludes(m) {
        return None;
    }
    let mut used = match *ann {
        Announcement::Trine { l } => vec![l],
        Announcement::Tetra { l, m } => vec![l, m],
        Announcement::Basis { .. } => unreachable!(),
    };
    used.push(m);
    let other = remaining_index(protocol.size(), &used)?;
    let (j, k) = match side {
        EnsembleSide::Alice => (m, other),
        EnsembleSide::Bob => (other, m),
    };
    tuple_bit(protocol, j, k, ann).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{Mat2, TOL};
    use crate::codes::{code_povm, make_code, CodeKind};

    fn trine_signal(j: usize) -> DensityMatrix {
        pure_from_bloch(make_code(CodeKind::Trine).state(j).unwrap()).unwrap()
    }

    #[test]
    fn gentle_povm_limits() {
        let code = make_code(CodeKind::Trine);
        let full = gentle_povm(&code, 1.0).unwrap();
        let std = code_povm(&code);
        for (a, b) in full.elements().iter().zip(std.elements()) {
            assert!(a.matrix().max_abs_diff(b.matrix()) < TOL);
        }
        let zero = gentle_povm(&code, 0.0).unwrap();
        for e in zero.elements() {
            assert!(e.matrix().max_abs_diff(&Mat2::IDENTITY.scale(1.0 / 3.0)) < TOL);
        }
        assert!(gentle_povm(&code, 1.1).is_err());
    }

    #[test]
    fn gentle_trine_eigenvalues_at_half_strength() {
        let povm = gentle_povm(&make_code(CodeKind::Trine), 0.5).unwrap();
        let [lo, hi] = povm.elements()[0].eigenvalues();
        assert!((hi - 0.5).abs() < TOL);
        assert!((lo - 1.0 / 6.0).abs() < TOL);
    }

    #[test]
    fn gentle_update_moves_state_partway() {
        // ψ₂ measured with the q = 1/2 element for ψ₁
        let povm = gentle_povm(&make_code(CodeKind::Trine), 0.5).unwrap();
        let code = make_code(CodeKind::Trine);
        let rho = trine_signal(2);
        let post = sqrt_post_measurement_state(&rho, &povm.elements()[0]).unwrap();
        let (v1, v2) = (code.state(1).unwrap(), code.state(2).unwrap());
        assert!(post.fidelity_with_pure(v1) > rho.fidelity_with_pure(v1));
        assert!(post.fidelity_with_pure(v1) < 1.0 - 1e-6);
        assert!(post.fidelity_with_pure(v2) < 1.0 - 1e-6);
        assert!(post.fidelity_with_pure(v2) > rho.fidelity_with_pure(v1));
    }

    #[test]
    fn full_interception_outcome_statistics() {
        let eve = Interceptor::new(
            ProtocolKind::Trine,
            &EveStrategy::InterceptResend { q: 1.0, mix: EnsembleMix::AliceOnly },
        )
        .unwrap();
        let branches = eve.branches(&trine_signal(1)).unwrap();
        assert_eq!(branches.len(), 3);
        let same: f64 = branches
            .iter()
            .filter(|b| b.1.unwrap().outcome_index == Some(1))
            .map(|b| b.0)
            .sum();
        assert!((same - 2.0 / 3.0).abs() < TOL);
        for b in branches.iter().filter(|b| b.1.unwrap().outcome_index != Some(1)) {
            assert!((b.0 - 1.0 / 6.0).abs() < TOL);
        }
    }

    #[test]
    fn sampled_interception() {
        let strat = EveStrategy::InterceptResend { q: 1.0, mix: EnsembleMix::AliceOnly };
        let rho = trine_signal(1);
        let (out, rec) = intercept(&strat, ProtocolKind::Trine, &rho, [0.3, 0.9, 0.1]).unwrap();
        assert_eq!(rec.unwrap().outcome_index, Some(1));
        assert!(out.matrix().max_abs_diff(rho.matrix()) < TOL);
        // u beyond 2/3 lands on one of the other outcomes
        let (_, rec) = intercept(&strat, ProtocolKind::Trine, &rho, [0.3, 0.9, 0.7]).unwrap();
        assert_ne!(rec.unwrap().outcome_index, Some(1));
    }

    #[test]
    fn zero_rate_interception_is_transparent() {
        let rho = trine_signal(2);
        for mix in [EnsembleMix::AliceOnly, EnsembleMix::BobOnly, EnsembleMix::Symmetric] {
            let (out, rec) = intercept(
                &EveStrategy::InterceptResend { q: 0.0, mix },
                ProtocolKind::Trine,
                &rho,
                [0.0, 0.2, 0.5],
            )
            .unwrap();
            assert_eq!(out, rho);
            assert_eq!(rec, Some(EveRecord::PASSED));
            let (out, rec) = intercept(&EveStrategy::Gentle { q: 0.0, mix }, ProtocolKind::Trine, &rho, [0.0, 0.2, 0.5]).unwrap();
            assert!(out.matrix().max_abs_diff(rho.matrix()) < TOL);
            assert!(rec.unwrap().intercepted);
        }
        let (out, rec) = intercept(&EveStrategy::None, ProtocolKind::Trine, &rho, [0.0; 3]).unwrap();
        assert_eq!((out, rec), (rho, None));
    }

    #[test]
    fn bob_side_resends_dual_state() {
        let strat = EveStrategy::InterceptResend { q: 1.0, mix: EnsembleMix::BobOnly };
        let (out, rec) = intercept(&strat, ProtocolKind::Trine, &trine_signal(1), [0.0, 0.0, 0.0]).unwrap();
        let m = rec.unwrap().outcome_index.unwrap();
        assert_ne!(m, 1);
        let dual = ProtocolKind::Trine.bob_code();
        assert!((out.fidelity_with_pure(dual.state(m).unwrap()) - 1.0).abs() < TOL);
    }

    #[test]
    fn guess_rule() {
        let p = ProtocolKind::Trine;
        let alice_1 = EveRecord::measured(EnsembleSide::Alice, 1);
        // Eve saw the true signal j = 1, Bob had k = 3 and announced l = 2
        assert_eq!(eve_guess(&alice_1, p, &Announcement::Trine { l: 2 }, true), Some(1));
        let alice_2 = EveRecord::measured(EnsembleSide::Alice, 2);
        assert_eq!(eve_guess(&alice_2, p, &Announcement::Trine { l: 2 }, true), None);
        assert_eq!(eve_guess(&alice_1, p, &Announcement::Trine { l: 2 }, false), None);
        assert_eq!(eve_guess(&EveRecord::PASSED, p, &Announcement::Trine { l: 2 }, true), None);
        // Bob-side candidate k = 3 gives the same tuple
        let bob_3 = EveRecord::measured(EnsembleSide::Bob, 3);
        assert_eq!(eve_guess(&bob_3, p, &Announcement::Trine { l: 2 }, true), Some(1));

        let t = ProtocolKind::Tetrahedron;
        let ann = Announcement::Tetra { l: 3, m: 4 };
        assert_eq!(eve_guess(&EveRecord::measured(EnsembleSide::Alice, 1), t, &ann, true), Some(1));
        assert_eq!(eve_guess(&EveRecord::measured(EnsembleSide::Alice, 4), t, &ann, true), None);

        let b = ProtocolKind::Bb84;
        let ann = Announcement::Basis { basis: 1 };
        assert_eq!(eve_guess(&EveRecord::measured(EnsembleSide::Alice, 4), b, &ann, true), Some(1));
        assert_eq!(eve_guess(&EveRecord::measured(EnsembleSide::Alice, 1), b, &ann, true), None);
    }

    #[test]
    fn strategy_validation() {
        let bad = EveStrategy::Gentle { q: -0.2, mix: EnsembleMix::Symmetric };
        assert!(Interceptor::new(ProtocolKind::Trine, &bad).is_err());
        assert_eq!("symmetric".parse::<EnsembleMix>(), Ok(EnsembleMix::Symmetric));
        assert!("both".parse::<EnsembleMix>().is_err());
    }
}
