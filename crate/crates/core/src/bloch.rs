//! Qubit state and measurement algebra.
//!
//! States are stored as 2×2 complex matrices; [`BlochVector`] is a view onto
//! them. Everything here is an immutable value type.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used by every invariant check in this module.
pub const TOL: f64 = 1e-12;

/// Probabilities below this are treated as exact zeros when sampling.
pub const ZERO_PROB: f64 = 1e-12;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Antipodal point; the corresponding pure state is orthogonal.
    pub fn antipode(&self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Plain 2×2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[C0, C0], [C0, C0]]);
    pub const IDENTITY: Mat2 = Mat2([[C1, C0], [C0, C1]]);

    /// `(s·I + v·σ)` with Pauli matrices σ.
    pub fn from_pauli(s: f64, v: &BlochVector) -> Self {
        Mat2([
            [Complex64::new(s + v.z, 0.0), Complex64::new(v.x, -v.y)],
            [Complex64::new(v.x, v.y), Complex64::new(s - v.z, 0.0)],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let tr = self.trace().re;
        let det = self.det().re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        [tr / 2.0 - disc, tr / 2.0 + disc]
    }

    /// Principal square root of a Hermitian positive semidefinite matrix.
    ///
    /// Uses the closed form `√A = (A + √det(A)·I) / √(tr A + 2√det(A))`,
    /// which is exact for 2×2 PSD matrices.
    pub fn psd_sqrt(&self) -> Self {
        let tr = self.trace().re;
        let mut det = self.det().re;
        // det carries absolute rounding error of order eps·tr², which the
        // square root would amplify to ~1e-8 on rank-one inputs
        if det <= 16.0 * f64::EPSILON * tr * tr {
            det = 0.0;
        }
        let s = det.sqrt();
        let t = (tr + 2.0 * s).max(0.0).sqrt();
        if t == 0.0 {
            return Mat2::ZERO;
        }
        let m = &self.0;
        Mat2([[m[0][0] + s, m[0][1]], [m[1][0], m[1][1] + s]]).scale(1.0 / t)
    }

    /// Bloch decomposition `(s, v)` of `A = s·I + v·σ` for Hermitian `A`.
    pub fn pauli_parts(&self) -> (f64, BlochVector) {
        let m = &self.0;
        let s = 0.5 * (m[0][0].re + m[1][1].re);
        let v = BlochVector::new(m[1][0].re, m[1][0].im, 0.5 * (m[0][0].re - m[1][1].re));
        (s, v)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[C0; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

/// A normalized qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat2::IDENTITY.scale(0.5))
    }

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: Mat2) -> Result<Self> {
        if !m.is_hermitian(TOL) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        if m.hermitian_eigenvalues()[0] < -TOL {
            return Err(Error::InvalidState("matrix has a negative eigenvalue".into()));
        }
        Ok(DensityMatrix(m))
    }

    /// Mixed or pure state with the given Bloch vector (`|v| ≤ 1`).
    pub fn from_bloch(v: &BlochVector) -> Result<Self> {
        if v.norm() > 1.0 + TOL {
            return Err(Error::InvalidState(format!("Bloch vector norm {} > 1", v.norm())));
        }
        Ok(DensityMatrix(Mat2::from_pauli(0.5, &v.scale(0.5))))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn bloch(&self) -> BlochVector {
        self.0.pauli_parts().1.scale(2.0)
    }

    /// `⟨ψ|ρ|ψ⟩` for the pure state `ψ` on the Bloch sphere at `v`.
    pub fn fidelity_with_pure(&self, v: &BlochVector) -> f64 {
        0.5 * (1.0 + self.bloch().dot(v))
    }

    /// Applies `U ρ U†`.
    pub fn conjugate(&self, u: &Mat2) -> Self {
        DensityMatrix(*u * self.0 * u.adjoint())
    }
}

/// Positive semidefinite measurement operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmElement(Mat2);

impl PovmElement {
    pub fn new(m: Mat2) -> Result<Self> {
        if !m.is_hermitian(TOL) {
            return Err(Error::InvalidState("POVM element is not Hermitian".into()));
        }
        if m.hermitian_eigenvalues()[0] < -TOL {
            return Err(Error::InvalidState("POVM element is not positive".into()));
        }
        Ok(PovmElement(m))
    }

    /// `weight·|ψ⟩⟨ψ| + identity_weight·I` for the pure state at Bloch vector `v`.
    pub fn weighted_projector(v: &BlochVector, weight: f64, identity_weight: f64) -> Self {
        let s = 0.5 * weight + identity_weight;
        PovmElement(Mat2::from_pauli(s, &v.scale(0.5 * weight)))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        self.0.hermitian_eigenvalues()
    }

    pub fn sqrt(&self) -> Mat2 {
        self.0.psd_sqrt()
    }

    pub fn conjugate(&self, u: &Mat2) -> Self {
        PovmElement(*u * self.0 * u.adjoint())
    }
}

/// Labelled list of POVM elements summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<PovmElement>,
    labels: Vec<usize>,
}

impl Povm {
    /// Builds a POVM with 1-based labels, checking completeness.
    pub fn new(elements: Vec<PovmElement>) -> Result<Self> {
        let labels = (1..=elements.len()).collect();
        Self::with_labels(elements, labels)
    }

    pub fn with_labels(elements: Vec<PovmElement>, labels: Vec<usize>) -> Result<Self> {
        if elements.len() != labels.len() || elements.is_empty() {
            return Err(Error::InvalidState("POVM needs one label per element".into()));
        }
        let sum = elements.iter().fold(Mat2::ZERO, |acc, e| acc + e.0);
        let defect = sum.max_abs_diff(&Mat2::IDENTITY);
        if defect > TOL {
            return Err(Error::InvalidState(format!(
                "POVM elements miss the identity by {defect:e}"
            )));
        }
        Ok(Povm { elements, labels })
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| born_probability(rho, e)).collect()
    }
}

/// Pure state `(I + v·σ)/2` for a unit Bloch vector.
pub fn pure_from_bloch(v: &BlochVector) -> Result<DensityMatrix> {
    if (v.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "pure state needs a unit Bloch vector, got norm {}",
            v.norm()
        )));
    }
    let unit = v.scale(1.0 / v.norm());
    Ok(DensityMatrix(Mat2::from_pauli(0.5, &unit.scale(0.5))))
}

/// `tr(ρE)`, clamped to `[0, 1]`.
pub fn born_probability(rho: &DensityMatrix, e: &PovmElement) -> f64 {
    (rho.0 * e.0).trace().re.clamp(0.0, 1.0)
}

/// Post-measurement state `√E ρ √E / tr(√E ρ √E)`.
pub fn sqrt_post_measurement_state(rho: &DensityMatrix, e: &PovmElement) -> Result<DensityMatrix> {
    let root = e.sqrt();
    let unnormalized = root * rho.0 * root;
    let p = unnormalized.trace().re;
    if p <= ZERO_PROB {
        return Err(Error::UndefinedConditional);
    }
    let m = unnormalized.scale(1.0 / p);
    // restore exact Hermiticity lost to rounding
    Ok(DensityMatrix((m + m.adjoint()).scale(0.5)))
}

/// `(1 − p)·ρ + p·I/2`.
pub fn depolarize(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter { name: "p", value: p });
    }
    Ok(DensityMatrix(rho.0.scale(1.0 - p) + Mat2::IDENTITY.scale(0.5 * p)))
}

/// Inverse-CDF draw of a 0-based outcome index from `u ∈ [0, 1)`.
///
/// Outcomes with probability below [`ZERO_PROB`] are never returned.
pub fn sample_outcome(rho: &DensityMatrix, povm: &Povm, u: f64) -> usize {
    sample_index(&povm.probabilities(rho), u)
}

/// Inverse-CDF draw over an explicit probability vector.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= ZERO_PROB {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Unitary for a rotation by `angle` about the unit `axis`.
pub fn rotation_unitary(axis: &BlochVector, angle: f64) -> Mat2 {
    let n = axis.scale(1.0 / axis.norm());
    let (s, c) = (0.5 * angle).sin_cos();
    // cos(θ/2)·I − i·sin(θ/2)·n·σ
    let i = Complex64::new(0.0, 1.0);
    Mat2([
        [c - i * s * n.z, -i * s * Complex64::new(n.x, -n.y)],
        [-i * s * Complex64::new(n.x, n.y), c + i * s * n.z],
    ])
}
