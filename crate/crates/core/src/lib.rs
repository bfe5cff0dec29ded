//! Qubit key distribution with the trine and tetrahedron spherical codes,
//! compared against BB84 and six-state.
//!
//! * [`bloch`]: density matrices, POVMs, Born rule, square-root updates.
//! * [`codes`]: the four ensembles, dual codes and Levi-Civita key bits.
//! * [`protocol`]: single rounds, announcements, sifting and bit derivation.
//! * [`adversary`]: intercept/resend and gentle attacks, Eve's guess rule.
//! * [`analysis`]: exact joint distributions, key rates and thresholds.
//! * [`montecarlo`]: seeded, order-independent simulation of many rounds.

pub mod adversary;
pub mod analysis;
pub mod bloch;
pub mod codes;
mod error;
pub mod field;
pub mod montecarlo;
pub mod protocol;

pub use adversary::{EnsembleMix, EnsembleSide, EveRecord, EveStrategy};
pub use analysis::{AttackFamily, GuessRule, JointDistribution, RateReport};
pub use bloch::{BlochVector, DensityMatrix, Povm, PovmElement};
pub use codes::{CodeKind, SphericalCode};
pub use error::{Error, Result};
pub use protocol::{Announcement, ChannelModel, ProtocolKind, RoundTranscript};
