//! Dense complex linear algebra on small square matrices (2x2, 4x4, 8x8).
//!
//! Everything here is exact-arithmetic plumbing for the rest of the crate:
//! Hermitian eigendecomposition with a deterministic phase gauge, the
//! Hermitian matrix exponential, modified Gram-Schmidt QR with a
//! real-positive-diagonal convention, and the PSD matrix square root.

use num_complex::Complex64;
use thiserror::Error;

/// Hermiticity / unitarity checks performed at this tolerance by default.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max |A - A^dag| element = {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not PSD (eigenvalue {0:.3e} below tolerance)")]
    NotPsd(f64),
    #[error("matrix is rank deficient (column {0} has norm {1:.3e} after orthogonalization)")]
    RankDeficient(usize, f64),
    #[error("scalar exponent {0:.3e} overflows f64 range")]
    ExpOverflow(f64),
    #[error("eigensolver failed to converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Small dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "rows must form a square matrix");
            data.extend_from_slice(r);
        }
        Self { dim, data }
    }

    /// Diagonal matrix from real entries.
    pub fn diag_real(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = Complex64::new(e, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest element magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Apply to a vector: A v.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[i] += self[(i, j)] * v[j];
            }
        }
        out
    }

    /// Rank-1 projector |v><v| from a (not necessarily normalized) vector.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = v[i] * v[j].conj();
            }
        }
        out
    }

    /// Kronecker product self (x) other.
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.dim;
        let m = other.dim;
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                for p in 0..m {
                    for q in 0..m {
                        out[(i * m + p, j * m + q)] = self[(i, j)] * other[(p, q)];
                    }
                }
            }
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).max_abs() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint()
            .mul(self)
            .sub(&Self::identity(self.dim))
            .max_abs()
            <= tol
    }

    pub fn is_upper_triangular(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..i {
                if self[(i, j)].norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// P^2 = P and P = P^dag.
    pub fn is_projector(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.mul(self).sub(self).max_abs() <= tol
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        let d = self.dim;
        &mut self.data[i * d + j]
    }
}

/// Fix the phase of an eigenvector so its largest-magnitude component is
/// real and positive. Deterministic gauge for reproducible tests.
pub fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_mag = 0.0;
    for (i, c) in v.iter().enumerate() {
        let m = c.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return;
    }
    let phase = v[best] / best_mag;
    for c in v.iter_mut() {
        *c /= phase;
    }
}

fn normalize(v: &mut [Complex64]) {
    let n: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in v.iter_mut() {
        *c /= n;
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are returned ascending; eigenvectors are the matching
/// orthonormal columns of the returned matrix, each phase-gauged via
/// [`fix_phase`]. 2x2 inputs use the closed form, larger ones a cyclic
/// Jacobi iteration converged to 1e-13.
pub fn hermitian_eigensolve(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let defect = a.hermiticity_defect();
    if defect > DEFAULT_TOL {
        return Err(LinalgError::NotHermitian(defect));
    }
    if a.dim == 2 {
        return Ok(eigensolve_2x2(a));
    }
    eigensolve_jacobi(a)
}

fn eigensolve_2x2(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let p = a[(0, 0)].re;
    let q = a[(1, 1)].re;
    let b = a[(0, 1)];
    let half_sum = 0.5 * (p + q);
    let half_diff = 0.5 * (p - q);
    let disc = (half_diff * half_diff + b.norm_sqr()).sqrt();
    let lo = half_sum - disc;
    let hi = half_sum + disc;

    let mut vecs = ComplexMatrix::zeros(2);
    for (col, lam) in [(0usize, lo), (1usize, hi)] {
        // (A - lam) v = 0; both candidates are exact null vectors, pick the
        // better-conditioned one.
        let cand1 = [b, Complex64::new(lam - p, 0.0)];
        let cand2 = [Complex64::new(lam - q, 0.0), b.conj()];
        let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
        let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
        let mut v = if n1 >= n2 { cand1 } else { cand2 };
        if n1.max(n2) == 0.0 {
            // Diagonal degenerate matrix: basis vectors.
            v = [
                Complex64::new(if col == 0 { 1.0 } else { 0.0 }, 0.0),
                Complex64::new(if col == 0 { 0.0 } else { 1.0 }, 0.0),
            ];
        }
        normalize(&mut v);
        fix_phase(&mut v);
        vecs[(0, col)] = v[0];
        vecs[(1, col)] = v[1];
    }
    (vec![lo, hi], vecs)
}

fn eigensolve_jacobi(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.dim;
    let mut m = a.clone();
    // Symmetrize away the sub-tolerance defect so the iteration sees an
    // exactly Hermitian matrix.
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = m.norm().max(1.0);
    const MAX_SWEEPS: usize = 100;
    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-13 * scale {
            return Ok(finish_jacobi(m, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(app - aqq);
                let c = theta.cos();
                let s = theta.sin();
                // Column rotation: [p q] <- [p q] * [[c, -s e^{i phi}], [s e^{-i phi}, c]]
                let sp = Complex64::new(s, 0.0) * phase;
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c + miq * sp.conj();
                    m[(i, q)] = -mip * sp + miq * c;
                }
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * c + mqj * sp;
                    m[(q, j)] = -mpj * sp.conj() + mqj * c;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * sp.conj();
                    v[(i, q)] = -vip * sp + viq * c;
                }
            }
        }
    }
    Err(LinalgError::NoConvergence(MAX_SWEEPS))
}

fn finish_jacobi(m: ComplexMatrix, v: ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.dim;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap());
    let mut vals = Vec::with_capacity(n);
    let mut vecs = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        vals.push(m[(src, src)].re);
        let mut column: Vec<Complex64> = (0..n).map(|i| v[(i, src)]).collect();
        fix_phase(&mut column);
        for i in 0..n {
            vecs[(i, col)] = column[i];
        }
    }
    (vals, vecs)
}

/// e^{s H} for Hermitian H, via eigendecomposition.
pub fn matrix_exponential_hermitian(h: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    let (vals, vecs) = hermitian_eigensolve(h)?;
    for &lam in &vals {
        let x = s * lam;
        if x > 709.0 {
            return Err(LinalgError::ExpOverflow(x));
        }
    }
    let exp_vals: Vec<f64> = vals.iter().map(|&lam| (s * lam).exp()).collect();
    Ok(reassemble(&vecs, &exp_vals))
}

/// V diag(d) V^dag.
fn reassemble(vecs: &ComplexMatrix, d: &[f64]) -> ComplexMatrix {
    let n = vecs.dim();
    let mut out = ComplexMatrix::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += vecs[(i, k)] * d[k] * vecs[(j, k)].conj();
            }
        }
    }
    out
}

/// QR decomposition by modified Gram-Schmidt with one re-orthogonalization
/// pass. R has a real positive diagonal, so a matrix whose leading columns
/// are already orthonormal keeps them unchanged in Q.
pub fn qr_decompose(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = m.dim;
    let mut q = ComplexMatrix::zeros(n);
    let mut r = ComplexMatrix::zeros(n);
    let scale = m.norm().max(1.0);
    for j in 0..n {
        let mut v: Vec<Complex64> = (0..n).map(|i| m[(i, j)]).collect();
        for _pass in 0..2 {
            for i in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    proj += q[(k, i)].conj() * v[k];
                }
                r[(i, j)] += proj;
                for k in 0..n {
                    v[k] -= proj * q[(k, i)];
                }
            }
        }
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-13 * scale {
            return Err(LinalgError::RankDeficient(j, norm));
        }
        r[(j, j)] = Complex64::new(norm, 0.0);
        for k in 0..n {
            q[(k, j)] = v[k] / norm;
        }
    }
    Ok((q, r))
}

/// Hermitian PSD square root: B with B^2 = A. Eigenvalues in
/// [-1e-12, 0) are clamped to zero; anything below -1e-9 is rejected.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, vecs) = hermitian_eigensolve(a)?;
    let mut roots = Vec::with_capacity(vals.len());
    for &lam in &vals {
        if lam < -1e-9 {
            return Err(LinalgError::NotPsd(lam));
        }
        roots.push(lam.max(0.0).sqrt());
    }
    Ok(reassemble(&vecs, &roots))
}

/// Pauli matrices, used throughout as building blocks.
pub fn sigma_x() -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    ComplexMatrix::from_rows(&[&[z, one], &[one, z]])
}

pub fn sigma_y() -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    ComplexMatrix::from_rows(&[&[z, -i], &[i, z]])
}

pub fn sigma_z() -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    ComplexMatrix::from_rows(&[&[one, z], &[z, -one]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in (i + 1)..dim {
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = c;
                m[(j, i)] = c.conj();
            }
        }
        m
    }

    fn random_matrix(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    #[test]
    fn eigensolve_sigma_z() {
        let (vals, vecs) = hermitian_eigensolve(&sigma_z()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        // Ground of sigma_z is |down>, excited |up>.
        assert!((vecs[(1, 0)].re - 1.0).abs() < 1e-14);
        assert!((vecs[(0, 1)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigensolve_sigma_x() {
        let (vals, vecs) = hermitian_eigensolve(&sigma_x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        let s = 1.0 / 2.0f64.sqrt();
        // Phase gauge: largest component real positive.
        assert!((vecs[(0, 0)].re - s).abs() < 1e-14);
        assert!((vecs[(1, 0)].re + s).abs() < 1e-14);
        assert!((vecs[(0, 1)].re - s).abs() < 1e-14);
        assert!((vecs[(1, 1)].re - s).abs() < 1e-14);
    }

    #[test]
    fn eigensolve_residual_random_4x4() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_hermitian(4, &mut rng);
            let (vals, vecs) = hermitian_eigensolve(&a).unwrap();
            for k in 0..4 {
                let v: Vec<Complex64> = (0..4).map(|i| vecs[(i, k)]).collect();
                let av = a.apply(&v);
                let res: f64 = av
                    .iter()
                    .zip(&v)
                    .map(|(x, y)| (x - y * vals[k]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-10, "residual {res}");
            }
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            // V^dag V = I and V Lambda V^dag = A.
            assert!(vecs.is_unitary(1e-10));
            assert!(reassemble(&vecs, &vals).sub(&a).max_abs() < 1e-10);
        }
    }

    #[test]
    fn eigensolve_rejects_non_hermitian() {
        let mut m = sigma_x();
        m[(0, 1)] += Complex64::new(1e-3, 0.0);
        assert!(matches!(
            hermitian_eigensolve(&m),
            Err(LinalgError::NotHermitian(_))
        ));
    }

    #[test]
    fn exp_zero_is_identity() {
        let h = ComplexMatrix::zeros(2);
        let e = matrix_exponential_hermitian(&h, 1.0).unwrap();
        assert!(e.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn exp_diagonal() {
        let h = sigma_z().scale_real(-1.0);
        let e = matrix_exponential_hermitian(&h, -8.0).unwrap();
        assert!((e[(0, 0)].re - 8.0f64.exp()).abs() / 8.0f64.exp() < 1e-12);
        assert!((e[(1, 1)].re - (-8.0f64).exp()).abs() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn exp_commutes_and_matches_eigenvalues() {
        // H = d.sigma with d = (1,1,1), s = -8 -> eigenvalues e^{-/+ 8 sqrt(3)}.
        let h = sigma_x().add(&sigma_y()).add(&sigma_z());
        let e = matrix_exponential_hermitian(&h, -8.0).unwrap();
        let (vals, _) = hermitian_eigensolve(&e).unwrap();
        let lo = (-8.0 * 3.0f64.sqrt()).exp();
        let hi = (8.0 * 3.0f64.sqrt()).exp();
        assert!((vals[0] - lo).abs() < 1e-10);
        assert!((vals[1] - hi).abs() / hi < 1e-10);
        let comm = h.mul(&e).sub(&e.mul(&h));
        assert!(comm.max_abs() / hi < 1e-10);
    }

    #[test]
    fn exp_overflow_rejected() {
        let h = sigma_z();
        assert!(matches!(
            matrix_exponential_hermitian(&h, 1000.0),
            Err(LinalgError::ExpOverflow(_))
        ));
    }

    #[test]
    fn qr_identity() {
        let (q, r) = qr_decompose(&ComplexMatrix::identity(4)).unwrap();
        assert!(q.sub(&ComplexMatrix::identity(4)).max_abs() < 1e-14);
        assert!(r.sub(&ComplexMatrix::identity(4)).max_abs() < 1e-14);
    }

    #[test]
    fn qr_random_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_matrix(4, &mut rng);
            let (q, r) = qr_decompose(&m).unwrap();
            assert!(q.mul(&r).sub(&m).max_abs() < 1e-12);
            assert!(q.is_unitary(1e-12));
            assert!(r.is_upper_triangular(1e-14));
            for i in 0..4 {
                assert!(r[(i, i)].re > 0.0 && r[(i, i)].im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn qr_preserves_orthonormal_leading_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            // Build a 4x4 whose first two columns are orthonormal.
            let h = random_hermitian(4, &mut rng);
            let (_, vecs) = hermitian_eigensolve(&h).unwrap();
            let mut m = random_matrix(4, &mut rng);
            for i in 0..4 {
                m[(i, 0)] = vecs[(i, 0)];
                m[(i, 1)] = vecs[(i, 1)];
            }
            let (q, _) = qr_decompose(&m).unwrap();
            for i in 0..4 {
                assert!((q[(i, 0)] - m[(i, 0)]).norm() < 1e-12);
                assert!((q[(i, 1)] - m[(i, 1)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn qr_rejects_rank_deficient() {
        let mut m = ComplexMatrix::identity(3);
        m[(2, 2)] = Complex64::new(0.0, 0.0);
        assert!(matches!(
            qr_decompose(&m),
            Err(LinalgError::RankDeficient(_, _))
        ));
    }

    #[test]
    fn qr_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = random_matrix(4, &mut rng);
        let (q1, r1) = qr_decompose(&m).unwrap();
        let (q2, r2) = qr_decompose(&m).unwrap();
        assert_eq!(q1, q2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn sqrt_diag() {
        let a = ComplexMatrix::diag_real(&[4.0, 9.0]);
        let b = sqrt_psd(&a).unwrap();
        assert!((b[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((b[(1, 1)].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_random_psd_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let m = random_matrix(4, &mut rng);
            let a = m.adjoint().mul(&m); // PSD by construction
            let b = sqrt_psd(&a).unwrap();
            assert!(b.is_hermitian(1e-10));
            assert!(b.mul(&b).sub(&a).max_abs() < 1e-10);
            // sqrt(B^2) = B for Hermitian PSD B.
            let b2 = sqrt_psd(&b.mul(&b)).unwrap();
            assert!(b2.sub(&b).max_abs() < 1e-9);
        }
    }

    #[test]
    fn sqrt_rejects_negative() {
        let a = ComplexMatrix::diag_real(&[1.0, -0.5]);
        assert!(matches!(sqrt_psd(&a), Err(LinalgError::NotPsd(_))));
    }
}
