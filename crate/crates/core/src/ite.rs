//! Ground-state preparation by imaginary-time evolution embedded in an
//! enlarged unitary: build e^{-tau H}, rescale by the largest singular
//! value, complete to a 4x4 unitary via QR, run the two-qubit circuit with
//! ancilla post-selection, and reconstruct the projector by tomography.

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{
    all_up, post_select, run_circuit_counts, Circuit, CircuitError, Gate,
};
use crate::linalg::{
    hermitian_eigensolve, matrix_exponential_hermitian, qr_decompose, sqrt_psd, ComplexMatrix,
    LinalgError,
};
use crate::model::{bloch_vector, build_hamiltonian, ModelPoint};
use crate::tomography::{
    basis_rotation_gates, expectation_from_counts, expectation_from_probs, readout_mitigation,
    reconstruct_projector, Pauli, PauliExpectations, TomographyError,
};
use crate::vqa::Mode;

#[derive(Debug, Error)]
pub enum IteError {
    #[error("gapless point: |d| = {0:.3e}")]
    Gapless(f64),
    #[error("tau must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("initial |up> state is orthogonal to the ground state here (d aligned with +z); retry with the |+> initial state")]
    OrthogonalStart,
    #[error("post-selection success fraction {0:.3e} below threshold {1:.3e}")]
    PostSelectionTooRare(f64, f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
}

pub type Result<T> = std::result::Result<T, IteError>;

/// Physical-qubit initial state for the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Up,
    /// (|up> + |down>)/sqrt(2), the fallback when |up> is orthogonal to
    /// the ground state.
    Plus,
}

impl InitialState {
    fn vector(self) -> Vec<Complex64> {
        match self {
            InitialState::Up => vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            InitialState::Plus => {
                let s = 1.0 / 2.0f64.sqrt();
                vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)]
            }
        }
    }

    /// Gates preparing the state from |up> on the physical wire.
    fn preparation_gates(self, target: usize) -> Vec<Gate> {
        match self {
            InitialState::Up => vec![],
            InitialState::Plus => vec![Gate::U3 {
                theta: std::f64::consts::FRAC_PI_2,
                phi: 0.0,
                lambda: 0.0,
                target,
            }],
        }
    }
}

/// The embedded evolution operator and its scale.
#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    /// u = (lambda_max(U^dag U))^{-1/2}, so u U has operator norm 1.
    pub u: f64,
    /// 4x4 unitary whose upper-left 2x2 block equals u e^{-tau H}.
    pub u_big: ComplexMatrix,
    pub tau: f64,
}

/// U = e^{-tau H}, Hermitian positive definite.
pub fn ite_operator(h: &ComplexMatrix, tau: f64) -> Result<ComplexMatrix> {
    if tau <= 0.0 {
        return Err(IteError::NonPositiveTau(tau));
    }
    Ok(matrix_exponential_hermitian(h, -tau)?)
}

/// Embed an invertible 2x2 operator into a 4x4 unitary: rescale so the
/// block is a contraction, complete the columns with
/// C = sqrt(I - u^2 U^dag U), fill the rest with identity blocks, and
/// orthonormalize by QR. The positive-diagonal QR convention keeps the
/// already-orthonormal leading columns (and hence the upper-left block)
/// unchanged.
pub fn embed_unitary(u_tb: &ComplexMatrix, tau: f64) -> Result<EmbeddingResult> {
    let gram = u_tb.adjoint().mul(u_tb);
    let (vals, _) = hermitian_eigensolve(&gram)?;
    let lam_max = vals[vals.len() - 1];
    let u = 1.0 / lam_max.sqrt();
    let scaled = u_tb.scale_real(u);
    let c = sqrt_psd(&ComplexMatrix::identity(2).sub(&scaled.adjoint().mul(&scaled)))?;
    // M = [[u U, I], [C, I]]; B = D = I.
    let mut m = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = scaled[(i, j)];
            m[(i + 2, j)] = c[(i, j)];
        }
        m[(i, i + 2)] = Complex64::new(1.0, 0.0);
        m[(i + 2, i + 2)] = Complex64::new(1.0, 0.0);
    }
    let (q, _) = qr_decompose(&m)?;
    Ok(EmbeddingResult { u, u_big: q, tau })
}

/// The ancilla-up block action on a physical state: given the full
/// two-qubit output, the unnormalized physical state with ancilla up.
pub fn ancilla_up_block(state: &[Complex64]) -> [Complex64; 2] {
    // Wire order: ancilla is qubit 0 (high bit), physical qubit 1.
    [state[0], state[1]]
}

/// Exact-mode preparation result.
pub struct ItePreparation {
    pub projector: ComplexMatrix,
    pub success_fraction: f64,
}

fn guard_overlap(p: ModelPoint, initial: InitialState) -> Result<()> {
    let d = bloch_vector(p);
    let dn = d.norm();
    if dn <= 1e-12 {
        return Err(IteError::Gapless(dn));
    }
    if initial == InitialState::Up {
        // d aligned with +z means the ground state is exactly |down>.
        let off = (d.dx * d.dx + d.dy * d.dy + (d.dz - dn) * (d.dz - dn)).sqrt();
        if off < 1e-6 {
            return Err(IteError::OrthogonalStart);
        }
    }
    Ok(())
}

fn ite_circuit(embedding: &EmbeddingResult, initial: InitialState, pauli: Pauli) -> Circuit {
    let mut c = Circuit::new(2);
    c.gates.extend(initial.preparation_gates(1));
    c.gates.push(Gate::TwoQ {
        matrix: embedding.u_big.clone(),
        targets: (0, 1),
    });
    c.gates.extend(basis_rotation_gates(pauli, 1));
    c.measure = vec![0, 1];
    c
}

/// Prepare the ground-state projector by embedded imaginary-time evolution.
///
/// Builds one two-qubit circuit per Pauli operator, each initialized
/// |up>_A (x) |initial>_P, applies the embedded unitary, post-selects the
/// ancilla on up, and reconstructs the projector from the surviving counts.
pub fn prepare_ground_projector_ite(
    p: ModelPoint,
    tau: f64,
    mode: Mode,
    initial: InitialState,
    purify: bool,
    min_success: f64,
) -> Result<ItePreparation> {
    guard_overlap(p, initial)?;
    let h = build_hamiltonian(bloch_vector(p));
    let u_tb = ite_operator(&h, tau)?;
    let embedding = embed_unitary(&u_tb, tau)?;
    match mode {
        Mode::Exact => {
            let psi0 = initial.vector();
            let mut full = vec![Complex64::new(0.0, 0.0); 4];
            full[0] = psi0[0];
            full[1] = psi0[1];
            let evolved = embedding.u_big.apply(&full);
            let block = ancilla_up_block(&evolved);
            let success = block[0].norm_sqr() + block[1].norm_sqr();
            if success < min_success {
                return Err(IteError::PostSelectionTooRare(success, min_success));
            }
            let norm = success.sqrt();
            let psi = [block[0] / norm, block[1] / norm];
            Ok(ItePreparation {
                projector: ComplexMatrix::outer(&psi),
                success_fraction: success,
            })
        }
        Mode::Shots { shots, seed, noise, mitigate } => {
            let mut values = [0.0f64; 3];
            let mut min_frac = 1.0f64;
            for (i, pauli) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
                let c = ite_circuit(&embedding, initial, pauli);
                let counts =
                    run_circuit_counts(&c, &all_up(2), shots, seed.wrapping_add(i as u64), noise)?;
                let (kept, frac) = post_select(&counts, 0, 0).map_err(|_| {
                    IteError::PostSelectionTooRare(0.0, min_success)
                })?;
                if frac < min_success {
                    return Err(IteError::PostSelectionTooRare(frac, min_success));
                }
                min_frac = min_frac.min(frac);
                values[i] = if mitigate && noise.readout_q > 0.0 {
                    let (p0, p1) = readout_mitigation(&kept, noise.readout_q)?;
                    expectation_from_probs(p0, p1)
                } else {
                    expectation_from_counts(&kept)
                };
            }
            let e = PauliExpectations {
                sx: values[0],
                sy: values[1],
                sz: values[2],
            };
            Ok(ItePreparation {
                projector: reconstruct_projector(e, purify)?,
                success_fraction: min_frac,
            })
        }
    }
}
