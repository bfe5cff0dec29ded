//! Single-round protocol mechanics for the trine, tetrahedron, BB84 and
//! six-state protocols.
//!
//! For the spherical codes Bob measures in the dual of Alice's code and
//! announces outcomes he did *not* obtain; Alice rejects the round when an
//! announced index is her signal. On acceptance both sides know the full
//! index tuple and compute the key bit from its Levi-Civita sign. The
//! baselines use basis announcements with `+` eigenstates encoding 0.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{eve_guess, EveRecord, EveStrategy, Interceptor};
use crate::bloch::{depolarize, pure_from_bloch, sample_index, DensityMatrix, Povm};
use crate::codes::{self, code_povm, dual_code, make_code, CodeKind, SphericalCode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolKind {
    Trine,
    Tetrahedron,
    Bb84,
    SixState,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] = [
        ProtocolKind::Trine,
        ProtocolKind::Tetrahedron,
        ProtocolKind::Bb84,
        ProtocolKind::SixState,
    ];

    pub fn code_kind(self) -> CodeKind {
        match self {
            ProtocolKind::Trine => CodeKind::Trine,
            ProtocolKind::Tetrahedron => CodeKind::Tetrahedron,
            ProtocolKind::Bb84 => CodeKind::Bb84,
            ProtocolKind::SixState => CodeKind::SixState,
        }
    }

    /// Number of signals (and of Bob's outcomes).
    pub fn size(self) -> usize {
        self.code_kind().size()
    }

    pub fn is_spherical(self) -> bool {
        self.code_kind().is_spherical()
    }

    pub fn alice_code(self) -> SphericalCode {
        make_code(self.code_kind())
    }

    /// Bob's measurement ensemble: the dual code for trine/tetrahedron,
    /// Alice's own code (random basis choice) for the baselines.
    pub fn bob_code(self) -> SphericalCode {
        let alice = self.alice_code();
        if self.is_spherical() {
            dual_code(&alice).expect("spherical codes have duals")
        } else {
            alice
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Trine => "trine",
            ProtocolKind::Tetrahedron => "tetra",
            ProtocolKind::Bb84 => "bb84",
            ProtocolKind::SixState => "six-state",
        }
    }
}

impl std::fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "trine" => Ok(ProtocolKind::Trine),
            "tetra" | "tetrahedron" => Ok(ProtocolKind::Tetrahedron),
            "bb84" => Ok(ProtocolKind::Bb84),
            "six-state" | "sixstate" | "six_state" => Ok(ProtocolKind::SixState),
            other => Err(format!("unknown protocol `{other}`")),
        }
    }
}

/// Bob's public sifting message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Announcement {
    /// Trine: one outcome Bob did not obtain.
    Trine { l: usize },
    /// Tetrahedron: an ordered pair of outcomes Bob did not obtain.
    Tetra { l: usize, m: usize },
    /// Baselines: Bob's measurement basis (0 = z, 1 = x, 2 = y).
    Basis { basis: usize },
}

impl Announcement {
    /// Whether the announcement rules out index `i` as Bob's outcome.
    pub fn excludes(&self, i: usize) -> bool {
        match *self {
            Announcement::Trine { l } => l == i,
            Announcement::Tetra { l, m } => l == i || m == i,
            Announcement::Basis { .. } => false,
        }
    }

    fn excluded(&self) -> Vec<usize> {
        match *self {
            Announcement::Trine { l } => vec![l],
            Announcement::Tetra { l, m } => vec![l, m],
            Announcement::Basis { .. } => vec![],
        }
    }

    /// Dense code in `0..16`, used for contingency tables.
    pub fn code(&self) -> usize {
        match *self {
            Announcement::Trine { l } => l - 1,
            Announcement::Tetra { l, m } => 4 * (l - 1) + (m - 1),
            Announcement::Basis { basis } => basis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChannelModel {
    Ideal,
    /// Replaces the state by `I/2` with the given probability.
    Depolarizing(f64),
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelModel::Depolarizing(p) if !(0.0..=1.0).contains(&p) => {
                Err(Error::InvalidParameter { name: "depolarize", value: p })
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match *self {
            ChannelModel::Ideal => Ok(*rho),
            ChannelModel::Depolarizing(p) => depolarize(rho, p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTranscript {
    pub signal: usize,
    pub bob_outcome: usize,
    pub announcement: Announcement,
    pub accepted: bool,
    pub alice_bit: Option<u8>,
    pub bob_bit: Option<u8>,
    pub eve_record: Option<EveRecord>,
    /// Eve's key-bit guess on accepted rounds; `None` is an abstention.
    pub eve_guess: Option<u8>,
}

/// Basis of a baseline state index (pairs of antipodal states).
pub fn basis_of(index: usize) -> usize {
    (index - 1) / 2
}

/// Bit value of a baseline state index: `+` eigenstate is 0.
pub fn basis_bit(index: usize) -> u8 {
    ((index - 1) % 2) as u8
}

/// The single index in `1..=n` not listed in `used`, if exactly one remains.
pub(crate) fn remaining_index(n: usize, used: &[usize]) -> Option<usize> {
    let mut free = (1..=n).filter(|i| !used.contains(i));
    match (free.next(), free.next()) {
        (Some(i), None) => Some(i),
        _ => None,
    }
}

fn check_index(protocol: ProtocolKind, index: usize) -> Result<()> {
    let max = protocol.size();
    if index == 0 || index > max {
        return Err(Error::InvalidIndex { index, max });
    }
    Ok(())
}

/// Alice's uniformly distributed signal index, by inverse CDF on `u`.
pub fn alice_pick(protocol: ProtocolKind, u: f64) -> usize {
    let n = protocol.size();
    ((u * n as f64).floor() as usize).min(n - 1) + 1
}

/// All announcements Bob may make after outcome `k`, each equally likely.
pub fn announcement_options(protocol: ProtocolKind, k: usize) -> Result<Vec<Announcement>> {
    check_index(protocol, k)?;
    let n = protocol.size();
    let others: Vec<usize> = (1..=n).filter(|&i| i != k).collect();
    Ok(match protocol {
        ProtocolKind::Trine => others.iter().map(|&l| Announcement::Trine { l }).collect(),
        ProtocolKind::Tetrahedron => others
            .iter()
            .flat_map(|&l| {
                others
                    .iter()
                    .filter(move |&&m| m != l)
                    .map(move |&m| Announcement::Tetra { l, m })
            })
            .collect(),
        ProtocolKind::Bb84 | ProtocolKind::SixState => vec![Announcement::Basis { basis: basis_of(k) }],
    })
}

pub fn bob_announce(protocol: ProtocolKind, k: usize, u: f64) -> Result<Announcement> {
    let options = announcement_options(protocol, k)?;
    let i = ((u * options.len() as f64).floor() as usize).min(options.len() - 1);
    Ok(options[i])
}

pub fn sift_accept(protocol: ProtocolKind, j: usize, ann: &Announcement) -> bool {
    match (protocol, ann) {
        (ProtocolKind::Bb84 | ProtocolKind::SixState, Announcement::Basis { basis }) => {
            basis_of(j) == *basis
        }
        (ProtocolKind::Trine, Announcement::Trine { .. })
        | (ProtocolKind::Tetrahedron, Announcement::Tetra { .. }) => !ann.excludes(j),
        _ => false,
    }
}

/// Key bit from a full index tuple `(signal, outcome, announcement)`.
pub(crate) fn tuple_bit(protocol: ProtocolKind, j: usize, k: usize, ann: &Announcement) -> Result<u8> {
    match *ann {
        Announcement::Trine { l } if protocol == ProtocolKind::Trine => codes::trine_key_bit(j, k, l),
        Announcement::Tetra { l, m } if protocol == ProtocolKind::Tetrahedron => {
            codes::tetra_key_bit(j, k, l, m)
        }
        _ => Err(Error::InvalidAnnouncement(format!(
            "{ann:?} does not belong to the {protocol} protocol"
        ))),
    }
}

fn check_announcement(protocol: ProtocolKind, ann: &Announcement) -> Result<()> {
    match *ann {
        Announcement::Trine { l } if protocol == ProtocolKind::Trine => check_index(protocol, l),
        Announcement::Tetra { l, m } if protocol == ProtocolKind::Tetrahedron => {
            check_index(protocol, l)?;
            check_index(protocol, m)?;
            if l == m {
                return Err(Error::InvalidAnnouncement(format!("repeated index {l}")));
            }
            Ok(())
        }
        Announcement::Basis { basis } if !protocol.is_spherical() => {
            if basis < protocol.size() / 2 {
                Ok(())
            } else {
                Err(Error::InvalidAnnouncement(format!("no basis {basis}")))
            }
        }
        _ => Err(Error::InvalidAnnouncement(format!(
            "{ann:?} does not belong to the {protocol} protocol"
        ))),
    }
}

/// Bits computed independently by Alice (from `j`) and Bob (from `k`).
///
/// Each party infers the missing index as the unique one left after
/// removing their own index and the announced ones.
pub fn derive_bits(protocol: ProtocolKind, j: usize, k: usize, ann: &Announcement) -> Result<(u8, u8)> {
    check_index(protocol, j)?;
    check_index(protocol, k)?;
    check_announcement(protocol, ann)?;
    if !sift_accept(protocol, j, ann) {
        return Err(Error::InvalidTranscript(format!(
            "signal {j} was rejected by {ann:?}"
        )));
    }
    if let Announcement::Basis { basis } = *ann {
        if basis_of(k) != basis {
            return Err(Error::InvalidTranscript(format!(
                "outcome {k} is not in announced basis {basis}"
            )));
        }
        return Ok((basis_bit(j), basis_bit(k)));
    }
    if ann.excludes(k) {
        return Err(Error::InvalidTranscript(format!("Bob announced his own outcome {k}")));
    }
    let n = protocol.size();
    let mut used = ann.excluded();
    used.push(j);
    let k_inferred = remaining_index(n, &used)
        .ok_or_else(|| Error::InvalidTranscript("Alice cannot infer Bob's outcome".into()))?;
    used.pop();
    used.push(k);
    let j_inferred = remaining_index(n, &used)
        .ok_or_else(|| Error::InvalidTranscript("Bob cannot infer Alice's signal".into()))?;
    Ok((
        tuple_bit(protocol, j, k_inferred, ann)?,
        tuple_bit(protocol, j_inferred, k, ann)?,
    ))
}

/// The six uniform variates one round consumes, in draw order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundVariates {
    pub alice: f64,
    pub eve_coin: f64,
    pub eve_ensemble: f64,
    pub eve_outcome: f64,
    pub bob_outcome: f64,
    pub announcement: f64,
}

impl RoundVariates {
    pub const COUNT: usize = 6;

    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            alice: rng.random(),
            eve_coin: rng.random(),
            eve_ensemble: rng.random(),
            eve_outcome: rng.random(),
            bob_outcome: rng.random(),
            announcement: rng.random(),
        }
    }
}

/// Precomputed states and measurements for repeated rounds of one
/// configuration.
#[derive(Debug, Clone)]
pub struct RoundEngine {
    protocol: ProtocolKind,
    signals: Vec<DensityMatrix>,
    interceptor: Interceptor,
    channel: ChannelModel,
    bob_povm: Povm,
}

impl RoundEngine {
    pub fn new(protocol: ProtocolKind, eve: &EveStrategy, channel: ChannelModel) -> Result<Self> {
        channel.validate()?;
        let signals = protocol
            .alice_code()
            .states()
            .iter()
            .map(pure_from_bloch)
            .collect::<Result<_>>()?;
        Ok(Self {
            protocol,
            signals,
            interceptor: Interceptor::new(protocol, eve)?,
            channel,
            bob_povm: code_povm(&protocol.bob_code()),
        })
    }

    pub fn protocol(&self) -> ProtocolKind {
        self.protocol
    }

    pub fn run(&self, v: &RoundVariates) -> Result<RoundTranscript> {
        let protocol = self.protocol;
        let signal = alice_pick(protocol, v.alice);
        let sent = self.signals[signal - 1];
        let (after_eve, record) =
            self.interceptor.apply(&sent, v.eve_coin, v.eve_ensemble, v.eve_outcome)?;
        let received = self.channel.apply(&after_eve)?;
        let bob_outcome = sample_index(&self.bob_povm.probabilities(&received), v.bob_outcome) + 1;
        let announcement = bob_announce(protocol, bob_outcome, v.announcement)?;
        let accepted = sift_accept(protocol, signal, &announcement);
        let (alice_bit, bob_bit, guess) = if accepted {
            let (a, b) = derive_bits(protocol, signal, bob_outcome, &announcement)?;
            let g = record
                .as_ref()
                .and_then(|r| eve_guess(r, protocol, &announcement, true));
            (Some(a), Some(b), g)
        } else {
            (None, None, None)
        };
        Ok(RoundTranscript {
            signal,
            bob_outcome,
            announcement,
            accepted,
            alice_bit,
            bob_bit,
            eve_record: record,
            eve_guess: guess,
        })
    }
}

/// One round drawn from `rng`; consumes exactly [`RoundVariates::COUNT`] uniforms.
pub fn run_round<R: Rng + ?Sized>(
    protocol: ProtocolKind,
    eve: &EveStrategy,
    channel: ChannelModel,
    rng: &mut R,
) -> Result<RoundTranscript> {
    let engine = RoundEngine::new(protocol, eve, channel)?;
    engine.run(&RoundVariates::draw(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::EnsembleMix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alice_pick_inverse_cdf() {
        assert_eq!(alice_pick(ProtocolKind::Trine, 0.0), 1);
        assert_eq!(alice_pick(ProtocolKind::Trine, 0.333), 1);
        assert_eq!(alice_pick(ProtocolKind::Trine, 0.34), 2);
        assert_eq!(alice_pick(ProtocolKind::Trine, 0.999_999_999), 3);
        assert_eq!(alice_pick(ProtocolKind::SixState, 0.99), 6);
        for i in 0..1000 {
            let j = alice_pick(ProtocolKind::Tetrahedron, i as f64 / 1000.0);
            assert!((1..=4).contains(&j));
        }
    }

    #[test]
    fn trine_announcements() {
        let opts = announcement_options(ProtocolKind::Trine, 3).unwrap();
        assert_eq!(opts, vec![Announcement::Trine { l: 1 }, Announcement::Trine { l: 2 }]);
        assert_eq!(bob_announce(ProtocolKind::Trine, 3, 0.2).unwrap(), Announcement::Trine { l: 1 });
        assert_eq!(bob_announce(ProtocolKind::Trine, 3, 0.7).unwrap(), Announcement::Trine { l: 2 });
        for k in 1..=3 {
            for opt in announcement_options(ProtocolKind::Trine, k).unwrap() {
                assert!(!opt.excludes(k));
            }
        }
    }

    #[test]
    fn tetra_announcements_are_six_ordered_pairs() {
        let opts = announcement_options(ProtocolKind::Tetrahedron, 2).unwrap();
        assert_eq!(opts.len(), 6);
        let mut seen = std::collections::HashSet::new();
        for a in &opts {
            let Announcement::Tetra { l, m } = *a else { panic!() };
            assert!(l != m && l != 2 && m != 2);
            assert!([1, 3, 4].contains(&l) && [1, 3, 4].contains(&m));
            seen.insert((l, m));
        }
        assert_eq!(seen.len(), 6);
        assert!(announcement_options(ProtocolKind::Tetrahedron, 5).is_err());
    }

    #[test]
    fn sift_rules() {
        assert!(sift_accept(ProtocolKind::Trine, 1, &Announcement::Trine { l: 2 }));
        assert!(!sift_accept(ProtocolKind::Trine, 1, &Announcement::Trine { l: 1 }));
        assert!(sift_accept(ProtocolKind::Tetrahedron, 1, &Announcement::Tetra { l: 3, m: 4 }));
        assert!(!sift_accept(ProtocolKind::Tetrahedron, 1, &Announcement::Tetra { l: 1, m: 3 }));
        assert!(!sift_accept(ProtocolKind::Tetrahedron, 1, &Announcement::Tetra { l: 3, m: 1 }));
        assert!(sift_accept(ProtocolKind::Bb84, 4, &Announcement::Basis { basis: 1 }));
        assert!(!sift_accept(ProtocolKind::Bb84, 4, &Announcement::Basis { basis: 0 }));
        assert!(!sift_accept(ProtocolKind::Trine, 1, &Announcement::Basis { basis: 0 }));
    }

    #[test]
    fn worked_examples() {
        let ann = Announcement::Trine { l: 2 };
        assert_eq!(derive_bits(ProtocolKind::Trine, 1, 3, &ann), Ok((1, 1)));
        let ann = Announcement::Tetra { l: 3, m: 4 };
        assert_eq!(derive_bits(ProtocolKind::Tetrahedron, 1, 2, &ann), Ok((1, 1)));
    }

    #[test]
    fn orthogonal_outcome_gives_opposite_bits() {
        // Bob got k = j, which only a disturbed state allows
        let ann = Announcement::Trine { l: 3 };
        let (a, b) = derive_bits(ProtocolKind::Trine, 1, 1, &ann).unwrap();
        assert_ne!(a, b);
        let ann = Announcement::Tetra { l: 2, m: 4 };
        let (a, b) = derive_bits(ProtocolKind::Tetrahedron, 3, 3, &ann).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn inconsistent_transcripts_are_rejected() {
        let p = ProtocolKind::Trine;
        assert!(matches!(
            derive_bits(p, 1, 3, &Announcement::Trine { l: 1 }),
            Err(Error::InvalidTranscript(_))
        ));
        assert!(matches!(
            derive_bits(p, 1, 2, &Announcement::Trine { l: 2 }),
            Err(Error::InvalidTranscript(_))
        ));
        assert!(matches!(
            derive_bits(ProtocolKind::Tetrahedron, 1, 2, &Announcement::Tetra { l: 3, m: 3 }),
            Err(Error::InvalidAnnouncement(_))
        ));
        assert!(matches!(
            derive_bits(ProtocolKind::Bb84, 1, 3, &Announcement::Basis { basis: 0 }),
            Err(Error::InvalidTranscript(_))
        ));
        assert!(derive_bits(p, 1, 3, &Announcement::Basis { basis: 0 }).is_err());
    }

    #[test]
    fn baseline_bits() {
        assert_eq!(derive_bits(ProtocolKind::Bb84, 3, 4, &Announcement::Basis { basis: 1 }), Ok((0, 1)));
        assert_eq!(derive_bits(ProtocolKind::SixState, 6, 6, &Announcement::Basis { basis: 2 }), Ok((1, 1)));
    }

    #[test]
    fn ideal_rounds_never_disagree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let engine = RoundEngine::new(ProtocolKind::Trine, &EveStrategy::None, ChannelModel::Ideal).unwrap();
        for _ in 0..5000 {
            let t = engine.run(&RoundVariates::draw(&mut rng)).unwrap();
            assert_ne!(t.signal, t.bob_outcome);
            assert_eq!(t.accepted, t.alice_bit.is_some());
            assert_eq!(t.alice_bit, t.bob_bit);
            assert!(t.eve_record.is_none());
        }
    }

    #[test]
    fn rejected_rounds_keep_indices() {
        let v = RoundVariates {
            alice: 0.0,
            eve_coin: 0.0,
            eve_ensemble: 0.0,
            eve_outcome: 0.0,
            bob_outcome: 0.0,
            announcement: 0.0,
        };
        let engine = RoundEngine::new(ProtocolKind::Trine, &EveStrategy::None, ChannelModel::Ideal).unwrap();
        let t = engine.run(&v).unwrap();
        // j = 1, first possible outcome is 2, first option is l = 1
        assert_eq!((t.signal, t.bob_outcome), (1, 2));
        assert_eq!(t.announcement, Announcement::Trine { l: 1 });
        assert!(!t.accepted && t.alice_bit.is_none());
    }

    #[test]
    fn run_round_consumes_fixed_variates() {
        let eve = EveStrategy::InterceptResend { q: 0.5, mix: EnsembleMix::Symmetric };
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let t1 = run_round(ProtocolKind::Tetrahedron, &eve, ChannelModel::Ideal, &mut a).unwrap();
            let v = RoundVariates::draw(&mut b);
            let engine = RoundEngine::new(ProtocolKind::Tetrahedron, &eve, ChannelModel::Ideal).unwrap();
            assert_eq!(t1, engine.run(&v).unwrap());
        }
    }

    #[test]
    fn invalid_channel() {
        assert!(RoundEngine::new(ProtocolKind::Trine, &EveStrategy::None, ChannelModel::Depolarizing(2.0)).is_err());
    }

    #[test]
    fn protocol_names_parse() {
        for p in ProtocolKind::ALL {
            assert_eq!(p.name().parse::<ProtocolKind>(), Ok(p));
        }
        assert!("bb85".parse::<ProtocolKind>().is_err());
    }
}
