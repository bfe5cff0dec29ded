//! Signal ensembles: the trine and tetrahedron spherical codes plus the
//! BB84 and six-state baselines, their duals, POVMs, and the Levi-Civita
//! bit functions used to turn a sifted round into a key bit.
//!
//! All indices in this module's public interface are 1-based.

use serde::{Deserialize, Serialize};

use crate::bloch::{BlochVector, Povm, PovmElement};
use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeKind {
    Trine,
    Tetrahedron,
    Bb84,
    SixState,
}

impl CodeKind {
    pub const ALL: [CodeKind; 4] = [
        CodeKind::Trine,
        CodeKind::Tetrahedron,
        CodeKind::Bb84,
        CodeKind::SixState,
    ];

    pub fn size(self) -> usize {
        match self {
            CodeKind::Trine => 3,
            CodeKind::Tetrahedron | CodeKind::Bb84 => 4,
            CodeKind::SixState => 6,
        }
    }

    /// True for the equiangular codes, which have distinct duals.
    pub fn is_spherical(self) -> bool {
        matches!(self, CodeKind::Trine | CodeKind::Tetrahedron)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalCode {
    kind: CodeKind,
    states: Vec<BlochVector>,
    dual: bool,
}

impl SphericalCode {
    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn is_dual(&self) -> bool {
        self.dual
    }

    pub fn states(&self) -> &[BlochVector] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Bloch vector of state `index` (1-based).
    pub fn state(&self, index: usize) -> Result<&BlochVector> {
        check_index(index, self.len())?;
        Ok(&self.states[index - 1])
    }

    /// Weight `2/n` on each projector so the POVM is complete.
    pub fn povm_weight(&self) -> f64 {
        2.0 / self.len() as f64
    }
}

fn check_index(index: usize, max: usize) -> Result<()> {
    if index == 0 || index > max {
        return Err(Error::InvalidIndex { index, max });
    }
    Ok(())
}

/// Canonical frame for each ensemble.
pub fn make_code(kind: CodeKind) -> SphericalCode {
    let states = match kind {
        CodeKind::Trine => (0..3)
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / 3.0;
                BlochVector::new(theta.sin(), 0.0, theta.cos())
            })
            .collect(),
        CodeKind::Tetrahedron => {
            let r2 = 2f64.sqrt();
            let r23 = (2.0f64 / 3.0).sqrt();
            vec![
                BlochVector::new(0.0, 0.0, 1.0),
                BlochVector::new(2.0 * r2 / 3.0, 0.0, -1.0 / 3.0),
                BlochVector::new(-r2 / 3.0, r23, -1.0 / 3.0),
                BlochVector::new(-r2 / 3.0, -r23, -1.0 / 3.0),
            ]
        }
        CodeKind::Bb84 => vec![
            BlochVector::new(0.0, 0.0, 1.0),
            BlochVector::new(0.0, 0.0, -1.0),
            BlochVector::new(1.0, 0.0, 0.0),
            BlochVector::new(-1.0, 0.0, 0.0),
        ],
        CodeKind::SixState => vec![
            BlochVector::new(0.0, 0.0, 1.0),
            BlochVector::new(0.0, 0.0, -1.0),
            BlochVector::new(1.0, 0.0, 0.0),
            BlochVector::new(-1.0, 0.0, 0.0),
            BlochVector::new(0.0, 1.0, 0.0),
            BlochVector::new(0.0, -1.0, 0.0),
        ],
    };
    SphericalCode { kind, states, dual: false }
}

/// Antipodal code: dual state `j` is orthogonal to code state `j`.
pub fn dual_code(code: &SphericalCode) -> Result<SphericalCode> {
    if !code.kind.is_spherical() {
        return Err(Error::UnsupportedKind(code.kind));
    }
    Ok(SphericalCode {
        kind: code.kind,
        states: code.states.iter().map(BlochVector::antipode).collect(),
        dual: !code.dual,
    })
}

/// Elements `(2/n)|ψ_m⟩⟨ψ_m|`.
pub fn code_povm(code: &SphericalCode) -> Povm {
    let w = code.povm_weight();
    let elements = code
        .states
        .iter()
        .map(|v| PovmElement::weighted_projector(v, w, 0.0))
        .collect();
    Povm::new(elements).expect("code POVMs are complete by construction")
}

/// Exact Bloch inner product between state `i` of the primal code and
/// state `j` of the primal (`same_side`) or dual code.
///
/// Inner products of the canonical frames are rational, which lets the
/// standard-attack enumeration run in exact arithmetic.
pub fn exact_bloch_dot<T: Field>(kind: CodeKind, i: usize, j: usize, same_side: bool) -> T {
    let primal = if i == j {
        T::one()
    } else {
        match kind {
            CodeKind::Trine => T::ratio(-1, 2),
            CodeKind::Tetrahedron => T::ratio(-1, 3),
            CodeKind::Bb84 | CodeKind::SixState => {
                if (i - 1) / 2 == (j - 1) / 2 {
                    T::zero() - T::one()
                } else {
                    T::zero()
                }
            }
        }
    };
    if same_side {
        primal
    } else {
        T::zero() - primal
    }
}

fn permutation_sign(indices: &[usize], n: usize) -> Result<i8> {
    for &i in indices {
        check_index(i, n)?;
    }
    let mut sign = 1i8;
    for a in 0..indices.len() {
        for b in (a + 1)..indices.len() {
            match indices[a].cmp(&indices[b]) {
                std::cmp::Ordering::Equal => return Ok(0),
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    Ok(sign)
}

pub fn levi_civita_3(j: usize, k: usize, l: usize) -> Result<i8> {
    permutation_sign(&[j, k, l], 3)
}

pub fn levi_civita_4(j: usize, k: usize, l: usize, m: usize) -> Result<i8> {
    permutation_sign(&[j, k, l, m], 4)
}

/// Trine key bit `(1 − ε_jkl)/2` for signal `j`, outcome `k`, announced `l`.
pub fn trine_key_bit(j: usize, k: usize, l: usize) -> Result<u8> {
    match levi_civita_3(j, k, l)? {
        0 => Err(Error::InvalidAnnouncement(format!("repeated index in ({j},{k},{l})"))),
        e => Ok(((1 - e) / 2) as u8),
    }
}

/// Tetrahedron key bit `(1 + ε_jklm)/2` for announced ordered pair `(l, m)`.
pub fn tetra_key_bit(j: usize, k: usize, l: usize, m: usize) -> Result<u8> {
    match levi_civita_4(j, k, l, m)? {
        0 => Err(Error::InvalidAnnouncement(format!("repeated index in ({j},{k},{l},{m})"))),
        e => Ok(((1 + e) / 2) as u8),
    }
}
