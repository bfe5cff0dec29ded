//! Closed-form intercept/resend curves for the spherical codes, and the
//! inversion of the sift rate back to the interception fraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::protocol::ProtocolKind;

/// Rational functions of the interception fraction `q` under the standard
/// attack with symmetric ensemble mixing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyticCurves {
    protocol: ProtocolKind,
}

pub fn analytic_curves(protocol: ProtocolKind) -> Result<AnalyticCurves> {
    if !protocol.is_spherical() {
        return Err(Error::UnsupportedKind(protocol.code_kind()));
    }
    Ok(AnalyticCurves { protocol })
}

impl AnalyticCurves {
    pub fn protocol(&self) -> ProtocolKind {
        self.protocol
    }

    fn trine(&self) -> bool {
        self.protocol == ProtocolKind::Trine
    }

    /// Unconditional probability a round survives sifting.
    pub fn p_sift<T: Field>(&self, q: &T) -> T {
        if self.trine() {
            (T::int(6) + q.clone()) / T::int(12)
        } else {
            (T::int(3) + q.clone()) / T::int(9)
        }
    }

    pub fn p_ab<T: Field>(&self, q: &T) -> T {
        if self.trine() {
            (T::int(6) - q.clone()) / (T::int(6) + q.clone())
        } else {
            (T::int(6) - q.clone()) / (T::int(2) * (T::int(3) + q.clone()))
        }
    }

    pub fn p_ae<T: Field>(&self, q: &T) -> T {
        if self.trine() {
            T::int(9) * q.clone() / (T::int(2) * (T::int(6) + q.clone()))
        } else {
            T::int(7) * q.clone() / (T::int(4) * (T::int(3) + q.clone()))
        }
    }

    pub fn p_noguess<T: Field>(&self, q: &T) -> T {
        if self.trine() {
            T::int(2) * (T::int(3) - T::int(2) * q.clone()) / (T::int(6) + q.clone())
        } else {
            (T::int(3) - q.clone()) / (T::int(3) + q.clone())
        }
    }

    pub fn qber<T: Field>(&self, q: &T) -> T {
        if self.trine() {
            T::int(2) * q.clone() / (T::int(6) + q.clone())
        } else {
            T::int(3) * q.clone() / (T::int(2) * (T::int(3) + q.clone()))
        }
    }

    /// Attainable sift-rate range `[p_sift(0), p_sift(1)]`.
    pub fn sift_range(&self) -> (f64, f64) {
        (self.p_sift(&0.0), self.p_sift(&1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiftEstimate {
    /// Estimate clamped to `[0, 1]`.
    pub q: f64,
    /// Linear inversion before clamping.
    pub q_unclamped: f64,
    /// False when the observed rate lies outside the attainable range by
    /// more than the caller's margin.
    pub in_model: bool,
}

/// Inverts `p_sift(q)`: `q = 12·s − 6` (trine) or `q = 9·s − 3` (tetra).
pub fn estimate_q_from_sift(protocol: ProtocolKind, observed_sift: f64, margin: f64) -> Result<SiftEstimate> {
    let curves = analytic_curves(protocol)?;
    if !observed_sift.is_finite() {
        return Err(Error::InvalidParameter { name: "observed_sift", value: observed_sift });
    }
    let q_unclamped = match protocol {
        ProtocolKind::Trine => 12.0 * observed_sift - 6.0,
        _ => 9.0 * observed_sift - 3.0,
    };
    let (lo, hi) = curves.sift_range();
    let in_model = observed_sift >= lo - margin && observed_sift <= hi + margin;
    Ok(SiftEstimate {
        q: q_unclamped.clamp(0.0, 1.0),
        q_unclamped,
        in_model,
    })
}
