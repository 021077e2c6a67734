//! Qi-Wu-Zhang two-band model, its exact ground-state oracle, an
//! eigenvector-based geometric-tensor oracle, and a degenerate four-band
//! Gamma-matrix model used by the non-Abelian extraction.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    fix_phase, hermitian_eigensolve, sigma_x, sigma_y, sigma_z, ComplexMatrix, LinalgError,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("gapless point: |d| = {0:.3e} below tolerance")]
    Gapless(f64),
    #[error("degenerate levels split beyond tolerance: {0:.3e}")]
    DegeneracyBroken(f64),
    #[error("reference vector projects onto the ground subspace with norm {0:.3e}; pick another gauge reference")]
    SingularReference(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// A point in the momentum/parameter space of the two-band model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint {
    pub kx: f64,
    pub ky: f64,
    pub m: f64,
}

impl ModelPoint {
    pub fn new(kx: f64, ky: f64, m: f64) -> Self {
        Self { kx, ky, m }
    }

    pub fn shifted(&self, dkx: f64, dky: f64) -> Self {
        Self {
            kx: self.kx + dkx,
            ky: self.ky + dky,
            m: self.m,
        }
    }
}

/// Coefficients of the Pauli decomposition of the Bloch Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl BlochVector {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Self {
        Self { dx, dy, dz }
    }

    /// |d|, half the band gap.
    pub fn norm(&self) -> f64 {
        (self.dx * self.dx + self.dy * self.dy + self.dz * self.dz).sqrt()
    }
}

/// d(k) = (sin kx, sin ky, m - cos kx - cos ky).
pub fn bloch_vector(p: ModelPoint) -> BlochVector {
    BlochVector {
        dx: p.kx.sin(),
        dy: p.ky.sin(),
        dz: p.m - p.kx.cos() - p.ky.cos(),
    }
}

/// H = dx sigma_x + dy sigma_y + dz sigma_z.
pub fn build_hamiltonian(d: BlochVector) -> ComplexMatrix {
    sigma_x()
        .scale_real(d.dx)
        .add(&sigma_y().scale_real(d.dy))
        .add(&sigma_z().scale_real(d.dz))
}

pub const GAP_TOL: f64 = 1e-12;

/// Gauge-fixed ground-state eigenvector at a gapped point.
pub fn exact_ground_state(p: ModelPoint) -> Result<Vec<Complex64>> {
    let d = bloch_vector(p);
    if d.norm() <= GAP_TOL {
        return Err(ModelError::Gapless(d.norm()));
    }
    let h = build_hamiltonian(d);
    let (_, vecs) = hermitian_eigensolve(&h)?;
    Ok(vec![vecs[(0, 0)], vecs[(1, 0)]])
}

/// P_g = |psi_g><psi_g| for the lower band.
pub fn exact_ground_projector(p: ModelPoint) -> Result<ComplexMatrix> {
    let psi = exact_ground_state(p)?;
    Ok(ComplexMatrix::outer(&psi))
}

/// The excited-band projector I - P_g.
pub fn exact_excited_projector(p: ModelPoint) -> Result<ComplexMatrix> {
    Ok(ComplexMatrix::identity(2).sub(&exact_ground_projector(p)?))
}

/// Metric and curvature components at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QgtPoint {
    pub g_xx: f64,
    pub g_xy: f64,
    pub g_yy: f64,
    pub f_xy: f64,
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Q_{mu nu} = <d_mu psi| (1 - P_g) |d_nu psi> from states differentiated by
/// forward differences. The excited-projector insertion makes the result
/// insensitive to the per-point phase gauge up to O(delta).
fn qgt_from_states(
    psi: &[Complex64],
    psi_dx: &[Complex64],
    psi_dy: &[Complex64],
    delta: f64,
) -> QgtPoint {
    let n = psi.len();
    let mut der_x = Vec::with_capacity(n);
    let mut der_y = Vec::with_capacity(n);
    for i in 0..n {
        der_x.push((psi_dx[i] - psi[i]) / delta);
        der_y.push((psi_dy[i] - psi[i]) / delta);
    }
    // Project out the |psi><psi| component: |Dpsi> - |psi><psi|Dpsi>.
    let ox = inner(psi, &der_x);
    let oy = inner(psi, &der_y);
    let px: Vec<Complex64> = (0..n).map(|i| der_x[i] - psi[i] * ox).collect();
    let py: Vec<Complex64> = (0..n).map(|i| der_y[i] - psi[i] * oy).collect();
    let q_xx = inner(&px, &px);
    let q_xy = inner(&px, &py);
    let q_yx = inner(&py, &px);
    let q_yy = inner(&py, &py);
    QgtPoint {
        g_xx: q_xx.re,
        g_xy: 0.5 * (q_xy + q_yx).re,
        g_yy: q_yy.re,
        // F_xy = i (Q_xy - Q_yx), real for exact states.
        f_xy: (Complex64::new(0.0, 1.0) * (q_xy - q_yx)).re,
    }
}

/// Rephase `v` so its overlap with `center` is real and positive; this
/// keeps finite differences of the eigenvector field smooth regardless of
/// the eigensolver's per-point phase convention.
fn align_phase(center: &[Complex64], mut v: Vec<Complex64>) -> Vec<Complex64> {
    let ov = inner(center, &v);
    if ov.norm() > 0.0 {
        let phase = ov / ov.norm();
        for c in v.iter_mut() {
            *c /= phase;
        }
    }
    v
}

/// Eigenvector-based oracle for the geometric tensor, using forward finite
/// differences of exact ground states in the overlap-aligned gauge.
pub fn oracle_qgt(p: ModelPoint, delta: f64) -> Result<QgtPoint> {
    let psi = exact_ground_state(p)?;
    let psi_dx = align_phase(&psi, exact_ground_state(p.shifted(delta, 0.0))?);
    let psi_dy = align_phase(&psi, exact_ground_state(p.shifted(0.0, delta))?);
    Ok(qgt_from_states(&psi, &psi_dx, &psi_dy, delta))
}

fn qgt_central(p: ModelPoint, delta: f64) -> Result<QgtPoint> {
    let xp = exact_ground_state(p.shifted(delta, 0.0))?;
    let xm = exact_ground_state(p.shifted(-delta, 0.0))?;
    let yp = exact_ground_state(p.shifted(0.0, delta))?;
    let ym = exact_ground_state(p.shifted(0.0, -delta))?;
    let psi = exact_ground_state(p)?;
    // Align neighbor phases with the center state so central differences of
    // the gauge-fixed field stay smooth.
    let align = |mut v: Vec<Complex64>| -> Vec<Complex64> {
        let ov = inner(&psi, &v);
        if ov.norm() > 0.0 {
            let phase = ov / ov.norm();
            for c in v.iter_mut() {
                *c /= phase;
            }
        }
        v
    };
    let (xp, xm, yp, ym) = (align(xp), align(xm), align(yp), align(ym));
    let n = psi.len();
    let der_x: Vec<Complex64> = (0..n).map(|i| (xp[i] - xm[i]) / (2.0 * delta)).collect();
    let der_y: Vec<Complex64> = (0..n).map(|i| (yp[i] - ym[i]) / (2.0 * delta)).collect();
    let ox = inner(&psi, &der_x);
    let oy = inner(&psi, &der_y);
    let px: Vec<Complex64> = (0..n).map(|i| der_x[i] - psi[i] * ox).collect();
    let py: Vec<Complex64> = (0..n).map(|i| der_y[i] - psi[i] * oy).collect();
    let q_xx = inner(&px, &px);
    let q_xy = inner(&px, &py);
    let q_yx = inner(&py, &px);
    let q_yy = inner(&py, &py);
    Ok(QgtPoint {
        g_xx: q_xx.re,
        g_xy: 0.5 * (q_xy + q_yx).re,
        g_yy: q_yy.re,
        f_xy: (Complex64::new(0.0, 1.0) * (q_xy - q_yx)).re,
    })
}

/// Second, independent oracle: Richardson extrapolation of central
/// differences at delta and delta/2 (error O(delta^4)). Used as the
/// reference truth in convergence studies.
pub fn oracle_qgt_refined(p: ModelPoint, delta: f64) -> Result<QgtPoint> {
    let c1 = qgt_central(p, delta)?;
    let c2 = qgt_central(p, 0.5 * delta)?;
    let rich = |a: f64, b: f64| (4.0 * b - a) / 3.0;
    Ok(QgtPoint {
        g_xx: rich(c1.g_xx, c2.g_xx),
        g_xy: rich(c1.g_xy, c2.g_xy),
        g_yy: rich(c1.g_yy, c2.g_yy),
        f_xy: rich(c1.f_xy, c2.f_xy),
    })
}

/// Parameter point for the degenerate four-band model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaModelPoint {
    pub k_mu: f64,
    pub k_nu: f64,
    pub m: f64,
}

impl GammaModelPoint {
    pub fn new(k_mu: f64, k_nu: f64, m: f64) -> Self {
        Self { k_mu, k_nu, m }
    }

    pub fn shifted(&self, d_mu: f64, d_nu: f64) -> Self {
        Self {
            k_mu: self.k_mu + d_mu,
            k_nu: self.k_nu + d_nu,
            m: self.m,
        }
    }

    /// Five-component coefficient vector
    /// (sin k_mu, sin k_nu, 0, 0, m - cos k_mu - cos k_nu).
    pub fn d5(&self) -> [f64; 5] {
        [
            self.k_mu.sin(),
            self.k_nu.sin(),
            0.0,
            0.0,
            self.m - self.k_mu.cos() - self.k_nu.cos(),
        ]
    }
}

/// The five 4x4 Dirac matrices: Gamma_1..Gamma_5 =
/// sx(x)sx, sx(x)sy, sx(x)sz, sy(x)I, sz(x)I.
/// Pairwise anticommuting and squaring to the identity.
pub fn gamma_matrices() -> [ComplexMatrix; 5] {
    let id = ComplexMatrix::identity(2);
    [
        sigma_x().kron(&sigma_x()),
        sigma_x().kron(&sigma_y()),
        sigma_x().kron(&sigma_z()),
        sigma_y().kron(&id),
        sigma_z().kron(&id),
    ]
}

/// H = sum_a d5_a Gamma_a; spectrum {-|d5|, -|d5|, +|d5|, +|d5|}.
pub fn gamma_model_hamiltonian(q: GammaModelPoint) -> Result<ComplexMatrix> {
    let d5 = q.d5();
    let norm = d5.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= GAP_TOL {
        return Err(ModelError::Gapless(norm));
    }
    let gammas = gamma_matrices();
    let mut h = ComplexMatrix::zeros(4);
    for (g, &c) in gammas.iter().zip(&d5) {
        if c != 0.0 {
            h = h.add(&g.scale_real(c));
        }
    }
    Ok(h)
}

/// Gauge-fixed orthonormal basis of the twofold-degenerate ground subspace,
/// obtained by projecting reference vectors onto the subspace.
pub fn gamma_ground_basis(
    q: GammaModelPoint,
    refs: &[Vec<Complex64>; 2],
) -> Result<[Vec<Complex64>; 2]> {
    let h = gamma_model_hamiltonian(q)?;
    let (vals, vecs) = hermitian_eigensolve(&h)?;
    let split = (vals[1] - vals[0]).abs();
    if split > 1e-10 * vals[3].abs().max(1.0) {
        return Err(ModelError::DegeneracyBroken(split));
    }
    if vals[2] - vals[1] < 1e-8 {
        return Err(ModelError::Gapless(vals[2] - vals[1]));
    }
    // Ground projector from the two lowest eigenvectors.
    let mut pg = ComplexMatrix::zeros(4);
    for col in 0..2 {
        let v: Vec<Complex64> = (0..4).map(|i| vecs[(i, col)]).collect();
        pg = pg.add(&ComplexMatrix::outer(&v));
    }
    // Project references and Gram-Schmidt.
    let mut v1 = pg.apply(&refs[0]);
    let n1: f64 = v1.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n1 < 1e-8 {
        return Err(ModelError::SingularReference(n1));
    }
    for c in v1.iter_mut() {
        *c /= n1;
    }
    let mut v2 = pg.apply(&refs[1]);
    let ov = inner(&v1, &v2);
    for (c, b) in v2.iter_mut().zip(&v1) {
        *c -= ov * b;
    }
    let n2: f64 = v2.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n2 < 1e-8 {
        return Err(ModelError::SingularReference(n2));
    }
    for c in v2.iter_mut() {
        *c /= n2;
    }
    Ok([v1, v2])
}

/// Default reference vectors e_1, e_2 for the subspace gauge.
pub fn default_references() -> [Vec<Complex64>; 2] {
    let mut e1 = vec![Complex64::new(0.0, 0.0); 4];
    let mut e2 = vec![Complex64::new(0.0, 0.0); 4];
    e1[0] = Complex64::new(1.0, 0.0);
    e2[1] = Complex64::new(1.0, 0.0);
    [e1, e2]
}

/// Gauge-fix a single vector in place (re-exported convenience).
pub fn gauge_fix(v: &mut [Complex64]) {
    fix_phase(v);
}
