//! Single-qubit state tomography: Pauli expectations from counts, density
//! matrix reconstruction, readout-error mitigation, and projector
//! purification.

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Counts, Gate};
use crate::linalg::ComplexMatrix;

#[derive(Debug, Error)]
pub enum TomographyError {
    #[error("readout flip probability {0} is not invertible (must be < 0.5)")]
    NonInvertibleReadout(f64),
    #[error("zero Bloch vector: maximally mixed state has no unique projector")]
    ZeroBlochVector,
}

pub type Result<T> = std::result::Result<T, TomographyError>;

/// Measured Pauli expectations of a single qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliExpectations {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl PauliExpectations {
    pub fn bloch_norm(&self) -> f64 {
        (self.sx * self.sx + self.sy * self.sy + self.sz * self.sz).sqrt()
    }
}

/// Which Pauli operator a measurement targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// (n_0 - n_1) / shots for a single measured bit.
pub fn expectation_from_counts(c: &Counts) -> f64 {
    let n0 = c.get("0") as f64;
    let n1 = c.get("1") as f64;
    (n0 - n1) / c.shots as f64
}

/// Same, from real-valued (mitigated) probabilities.
pub fn expectation_from_probs(p0: f64, p1: f64) -> f64 {
    p0 - p1
}

/// Pre-measurement basis rotation: after these gates a sigma_z measurement
/// yields the target Pauli expectation.
pub fn basis_rotation_gates(pauli: Pauli, target: usize) -> Vec<Gate> {
    match pauli {
        Pauli::X => vec![Gate::Ry {
            theta: -std::f64::consts::FRAC_PI_2,
            target,
        }],
        Pauli::Y => vec![Gate::Rx {
            theta: std::f64::consts::FRAC_PI_2,
            target,
        }],
        Pauli::Z => vec![],
    }
}

/// Assemble the single-qubit density matrix
/// [[(1+sz)/2, (sx - i sy)/2], [(sx + i sy)/2, (1-sz)/2]].
///
/// With `purify` the Bloch vector is rescaled to unit norm first, so the
/// result is an exact rank-1 projector.
pub fn reconstruct_projector(e: PauliExpectations, purify: bool) -> Result<ComplexMatrix> {
    let (sx, sy, sz) = if purify {
        let n = e.bloch_norm();
        if n < 1e-12 {
            return Err(TomographyError::ZeroBlochVector);
        }
        (e.sx / n, e.sy / n, e.sz / n)
    } else {
        (e.sx, e.sy, e.sz)
    };
    let mut p = ComplexMatrix::zeros(2);
    p[(0, 0)] = Complex64::new(0.5 * (1.0 + sz), 0.0);
    p[(1, 1)] = Complex64::new(0.5 * (1.0 - sz), 0.0);
    p[(0, 1)] = Complex64::new(0.5 * sx, -0.5 * sy);
    p[(1, 0)] = Complex64::new(0.5 * sx, 0.5 * sy);
    Ok(p)
}

/// Invert the per-bit confusion matrix [[1-q, q], [q, 1-q]] on the
/// outcome probability vector; negatives are clamped to zero and the
/// result renormalized. Returns (p0, p1).
pub fn readout_mitigation(c: &Counts, q: f64) -> Result<(f64, f64)> {
    if q >= 0.5 {
        return Err(TomographyError::NonInvertibleReadout(q));
    }
    let shots = c.shots as f64;
    let p0 = c.get("0") as f64 / shots;
    let p1 = c.get("1") as f64 / shots;
    if q == 0.0 {
        return Ok((p0, p1));
    }
    let det = 1.0 - 2.0 * q;
    let m0 = ((1.0 - q) * p0 - q * p1) / det;
    let m1 = ((1.0 - q) * p1 - q * p0) / det;
    let m0 = m0.max(0.0);
    let m1 = m1.max(0.0);
    let total = m0 + m1;
    if total == 0.0 {
        return Ok((0.5, 0.5));
    }
    Ok((m0 / total, m1 / total))
}

/// Exact Pauli expectations of a pure single-qubit state, used as the
/// exact-mode path of both preparation pipelines.
pub fn exact_expectations(psi: &[Complex64]) -> PauliExpectations {
    let a = psi[0];
    let b = psi[1];
    let cross = a.conj() * b;
    PauliExpectations {
        sx: 2.0 * cross.re,
        sy: 2.0 * cross.im,
        sz: a.norm_sqr() - b.norm_sqr(),
    }
}
