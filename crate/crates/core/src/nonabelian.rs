//! Matrix-valued geometric-tensor extraction for twofold-degenerate ground
//! subspaces: subspace projectors in a deterministic reference gauge,
//! superposition projectors P_M and P_N, diagonal-component recovery by
//! projector sandwiching, and off-diagonal reconstruction from the
//! M/N combination identities.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{hermitian_eigensolve, ComplexMatrix, LinalgError};
use crate::model::{gamma_model_hamiltonian, GammaModelPoint, ModelError};
use crate::qgt::recover_scalar_elements;

#[derive(Debug, Error)]
pub enum NonAbelianError {
    #[error("ground levels split by {0:.3e}, not degenerate")]
    DegeneracyBroken(f64),
    #[error("gap to the excited pair is {0:.3e}, too small")]
    GapTooSmall(f64),
    #[error("reference vector projects onto the ground subspace with norm {0:.3e}")]
    SingularReference(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, NonAbelianError>;

/// The six projectors of one degenerate point.
#[derive(Debug, Clone)]
pub struct DegenerateProjectors {
    pub p1: ComplexMatrix,
    pub p2: ComplexMatrix,
    pub pm: ComplexMatrix,
    pub pn: ComplexMatrix,
    pub pg: ComplexMatrix,
    pub pe: ComplexMatrix,
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal ground-subspace basis in the reference-projection gauge:
/// project e_1, e_2 onto the ground subspace and Gram-Schmidt. The result
/// varies smoothly in k wherever the projections stay nonsingular.
pub fn subspace_basis(
    h4: &ComplexMatrix,
    refs: &[Vec<Complex64>; 2],
) -> Result<[Vec<Complex64>; 2]> {
    let (vals, vecs) = hermitian_eigensolve(h4)?;
    let split = (vals[1] - vals[0]).abs();
    if split > 1e-8 {
        return Err(NonAbelianError::DegeneracyBroken(split));
    }
    let gap = vals[2] - vals[1];
    if gap <= 1e-8 {
        return Err(NonAbelianError::GapTooSmall(gap));
    }
    let mut pg = ComplexMatrix::zeros(4);
    for col in 0..2 {
        let v: Vec<Complex64> = (0..4).map(|i| vecs[(i, col)]).collect();
        pg = pg.add(&ComplexMatrix::outer(&v));
    }
    let mut v1 = pg.apply(&refs[0]);
    let n1 = vec_norm(&v1);
    if n1 < 1e-8 {
        return Err(NonAbelianError::SingularReference(n1));
    }
    for c in v1.iter_mut() {
        *c /= n1;
    }
    let mut v2 = pg.apply(&refs[1]);
    let ov = inner(&v1, &v2);
    for (c, b) in v2.iter_mut().zip(&v1) {
        *c -= ov * b;
    }
    let n2 = vec_norm(&v2);
    if n2 < 1e-8 {
        return Err(NonAbelianError::SingularReference(n2));
    }
    for c in v2.iter_mut() {
        *c /= n2;
    }
    Ok([v1, v2])
}

/// Assemble all six projectors from a 4x4 Hamiltonian with a twofold
/// degenerate ground level.
pub fn build_subspace_projectors(
    h4: &ComplexMatrix,
    refs: &[Vec<Complex64>; 2],
) -> Result<DegenerateProjectors> {
    let [psi1, psi2] = subspace_basis(h4, refs)?;
    projectors_from_basis(&psi1, &psi2)
}

fn projectors_from_basis(psi1: &[Complex64], psi2: &[Complex64]) -> Result<DegenerateProjectors> {
    let p1 = ComplexMatrix::outer(psi1);
    let p2 = ComplexMatrix::outer(psi2);
    let pg = p1.add(&p2);
    let pe = ComplexMatrix::identity(4).sub(&pg);
    let s = 1.0 / 2.0f64.sqrt();
    let psi_m: Vec<Complex64> = psi1.iter().zip(psi2).map(|(a, b)| (a + b) * s).collect();
    let i = Complex64::new(0.0, 1.0);
    let psi_n: Vec<Complex64> = psi1.iter().zip(psi2).map(|(a, b)| (a + i * b) * s).collect();
    Ok(DegenerateProjectors {
        p1,
        p2,
        pm: ComplexMatrix::outer(&psi_m),
        pn: ComplexMatrix::outer(&psi_n),
        pg,
        pe,
    })
}

/// Build the projector set for the Gamma model at one parameter point.
pub fn gamma_projectors(
    q: GammaModelPoint,
    refs: &[Vec<Complex64>; 2],
) -> Result<DegenerateProjectors> {
    let h = gamma_model_hamiltonian(q)?;
    build_subspace_projectors(&h, refs)
}

/// The eight diagonal-type scalars of one direction pair.
#[derive(Debug, Clone, Copy)]
pub struct DiagonalComponents {
    pub g11: Complex64,
    pub g22: Complex64,
    pub f11: Complex64,
    pub f22: Complex64,
    pub gmm: Complex64,
    pub gnn: Complex64,
    pub fmm: Complex64,
    pub fnn: Complex64,
}

/// Off-diagonal components reconstructed from the diagonal set.
#[derive(Debug, Clone, Copy)]
pub struct OffDiagonalComponents {
    pub g12: Complex64,
    pub g21: Complex64,
    pub f12: Complex64,
    pub f21: Complex64,
}

fn derivative(at_k: &ComplexMatrix, at_shift: &ComplexMatrix, delta: f64) -> ComplexMatrix {
    at_shift.sub(at_k).scale_real(1.0 / delta)
}

fn sandwich_recover(
    p: &ComplexMatrix,
    l: &ComplexMatrix,
    robust_eps: f64,
) -> Complex64 {
    let plp = p.mul(l).mul(p);
    recover_scalar_elements(&plp, p, robust_eps).0
}

/// Recover g^{11}, g^{22}, F^{11}, F^{22} and the M/N combinations for one
/// direction pair from projector fields at k, k + delta e_mu and
/// k + delta e_nu, all in the same gauge.
pub fn extract_diagonal_components(
    at_k: &DegenerateProjectors,
    at_mu: &DegenerateProjectors,
    at_nu: &DegenerateProjectors,
    delta: f64,
    robust_eps: f64,
) -> DiagonalComponents {
    let i = Complex64::new(0.0, 1.0);
    let combos = |dmu: &ComplexMatrix, dnu: &ComplexMatrix| {
        let a = dmu.mul(&at_k.pe).mul(dnu);
        let b = dnu.mul(&at_k.pe).mul(dmu);
        let sym = a.add(&b).scale_real(0.5);
        let asym = a.sub(&b).scale(i);
        (sym, asym)
    };

    let dg_mu = derivative(&at_k.pg, &at_mu.pg, delta);
    let dg_nu = derivative(&at_k.pg, &at_nu.pg, delta);
    let (sym_g, asym_g) = combos(&dg_mu, &dg_nu);

    let dm_mu = derivative(&at_k.pm, &at_mu.pm, delta);
    let dm_nu = derivative(&at_k.pm, &at_nu.pm, delta);
    let (sym_m, asym_m) = combos(&dm_mu, &dm_nu);

    let dn_mu = derivative(&at_k.pn, &at_mu.pn, delta);
    let dn_nu = derivative(&at_k.pn, &at_nu.pn, delta);
    let (sym_n, asym_n) = combos(&dn_mu, &dn_nu);

    DiagonalComponents {
        g11: sandwich_recover(&at_k.p1, &sym_g, robust_eps),
        g22: sandwich_recover(&at_k.p2, &sym_g, robust_eps),
        f11: sandwich_recover(&at_k.p1, &asym_g, robust_eps),
        f22: sandwich_recover(&at_k.p2, &asym_g, robust_eps),
        gmm: sandwich_recover(&at_k.pm, &sym_m, robust_eps),
        gnn: sandwich_recover(&at_k.pn, &sym_n, robust_eps),
        fmm: sandwich_recover(&at_k.pm, &asym_m, robust_eps),
        fnn: sandwich_recover(&at_k.pn, &asym_n, robust_eps),
    }
}

/// Solve the M/N combination identities
/// 2 s^{MM} = s^{11} + s^{22} + s^{12} + s^{21} and
/// 2 s^{NN} = s^{11} + s^{22} + i (s^{12} - s^{21})
/// for the off-diagonal entries. The Hermiticity relation
/// s^{21} = conj(s^{12}) is available to callers as a consistency check,
/// not enforced here.
pub fn extract_offdiagonal_components(d: &DiagonalComponents) -> OffDiagonalComponents {
    let i = Complex64::new(0.0, 1.0);
    let solve = |s11: Complex64, s22: Complex64, smm: Complex64, snn: Complex64| {
        let s = s11 + s22;
        let x12 = smm - i * snn - (Complex64::new(1.0, -1.0)) * s * 0.5;
        let x21 = smm + i * snn - (Complex64::new(1.0, 1.0)) * s * 0.5;
        (x12, x21)
    };
    let (g12, g21) = solve(d.g11, d.g22, d.gmm, d.gnn);
    let (f12, f21) = solve(d.f11, d.f22, d.fmm, d.fnn);
    OffDiagonalComponents { g12, g21, f12, f21 }
}

/// One 2x2 block pair (metric and curvature) of the non-Abelian tensor.
#[derive(Debug, Clone, Copy)]
pub struct BlockComponents {
    pub g: [[Complex64; 2]; 2],
    pub f: [[Complex64; 2]; 2],
}

/// All four direction pairs for the Gamma model.
#[derive(Debug, Clone, Copy)]
pub struct NonAbelianQgt {
    pub mu_mu: BlockComponents,
    pub mu_nu: BlockComponents,
    pub nu_mu: BlockComponents,
    pub nu_nu: BlockComponents,
}

impl NonAbelianQgt {
    pub fn blocks(&self) -> [(&'static str, &BlockComponents); 4] {
        [
            ("mu_mu", &self.mu_mu),
            ("mu_nu", &self.mu_nu),
            ("nu_mu", &self.nu_mu),
            ("nu_nu", &self.nu_nu),
        ]
    }
}

fn assemble_block(d: &DiagonalComponents) -> BlockComponents {
    let off = extract_offdiagonal_components(d);
    BlockComponents {
        g: [[d.g11, off.g12], [off.g21, d.g22]],
        f: [[d.f11, off.f12], [off.f21, d.f22]],
    }
}

/// Full projector-based extraction at one Gamma-model point.
pub fn extract_nonabelian(
    q: GammaModelPoint,
    delta: f64,
    refs: &[Vec<Complex64>; 2],
    robust_eps: f64,
) -> Result<NonAbelianQgt> {
    let at_k = gamma_projectors(q, refs)?;
    let at_mu = gamma_projectors(q.shifted(delta, 0.0), refs)?;
    let at_nu = gamma_projectors(q.shifted(0.0, delta), refs)?;
    let pair = |a: &DegenerateProjectors, b: &DegenerateProjectors| {
        extract_diagonal_components(&at_k, a, b, delta, robust_eps)
    };
    Ok(NonAbelianQgt {
        mu_mu: assemble_block(&pair(&at_mu, &at_mu)),
        mu_nu: assemble_block(&pair(&at_mu, &at_nu)),
        nu_mu: assemble_block(&pair(&at_nu, &at_mu)),
        nu_nu: assemble_block(&pair(&at_nu, &at_nu)),
    })
}

/// Eigenvector oracle: Q^{ij} = <d_mu psi_i| P_e |d_nu psi_j> from forward
/// differences of the gauge-fixed basis fields, then
/// g = (Q + Q^dag)/2 and F = i (Q - Q^dag) per block.
pub fn oracle_nonabelian(
    q: GammaModelPoint,
    delta: f64,
    refs: &[Vec<Complex64>; 2],
) -> Result<NonAbelianQgt> {
    let h = gamma_model_hamiltonian(q)?;
    let basis = subspace_basis(&h, refs)?;
    let basis_mu = subspace_basis(&gamma_model_hamiltonian(q.shifted(delta, 0.0))?, refs)?;
    let basis_nu = subspace_basis(&gamma_model_hamiltonian(q.shifted(0.0, delta))?, refs)?;
    let pg = ComplexMatrix::outer(&basis[0]).add(&ComplexMatrix::outer(&basis[1]));
    let pe = ComplexMatrix::identity(4).sub(&pg);

    let diff = |shifted: &[Vec<Complex64>; 2]| -> [Vec<Complex64>; 2] {
        let d = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> {
            a.iter().zip(b).map(|(x, y)| (x - y) / delta).collect()
        };
        [d(&shifted[0], &basis[0]), d(&shifted[1], &basis[1])]
    };
    let der_mu = diff(&basis_mu);
    let der_nu = diff(&basis_nu);

    let q_block = |da: &[Vec<Complex64>; 2], db: &[Vec<Complex64>; 2]| -> [[Complex64; 2]; 2] {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = inner(&da[i], &pe.apply(&db[j]));
            }
        }
        out
    };
    let to_components = |qb: [[Complex64; 2]; 2]| -> BlockComponents {
        let mut g = [[Complex64::new(0.0, 0.0); 2]; 2];
        let mut f = [[Complex64::new(0.0, 0.0); 2]; 2];
        let i = Complex64::new(0.0, 1.0);
        for r in 0..2 {
            for c in 0..2 {
                g[r][c] = 0.5 * (qb[r][c] + qb[c][r].conj());
                f[r][c] = i * (qb[r][c] - qb[c][r].conj());
            }
        }
        BlockComponents { g, f }
    };
    Ok(NonAbelianQgt {
        mu_mu: to_components(q_block(&der_mu, &der_mu)),
        mu_nu: to_components(q_block(&der_mu, &der_nu)),
        nu_mu: to_components(q_block(&der_nu, &der_mu)),
        nu_nu: to_components(q_block(&der_nu, &der_nu)),
    })
}
