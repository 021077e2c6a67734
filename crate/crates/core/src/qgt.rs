//! Geometric-tensor extraction from projectors: finite-difference
//! derivatives, the element-wise solve of
//! dP_mu . P_e . dP_nu (sym/antisym) = scalar * P_g with four-element
//! averaging, and Chern-number integration over the Brillouin zone.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::model::QgtPoint;

#[derive(Debug, Error)]
pub enum QgtError {
    #[error("finite-difference increment must be positive, got {0}")]
    BadDelta(f64),
    #[error("P_e deviates from I - P_g by {0:.3e}")]
    InconsistentProjectors(f64),
    #[error("curvature field incomplete: expected {0} points, got {1}")]
    IncompleteField(usize, usize),
}

pub type Result<T> = std::result::Result<T, QgtError>;

/// Per-point quality notes attached to an extraction.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExtractionFlags {
    /// Elements excluded from the average because |(P_g)_ij| fell below
    /// the robust threshold, summed over the four scalar solves.
    pub excluded_elements: u32,
    /// Some scalar fell back to the trace identity (all four elements
    /// excluded).
    pub trace_fallback: bool,
    /// Largest imaginary residue of a metric average (or real residue of a
    /// curvature average), a direct noise indicator.
    pub max_residue: f64,
}

impl ExtractionFlags {
    pub fn clean(&self) -> bool {
        !self.trace_fallback && self.excluded_elements == 0
    }
}

/// Extraction output: tensor components plus quality flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractedQgt {
    pub point: QgtPoint,
    pub flags: ExtractionFlags,
}

/// Forward difference (P(k+delta) - P(k)) / delta.
pub fn projector_derivative(
    p_at_k: &ComplexMatrix,
    p_at_k_plus: &ComplexMatrix,
    delta: f64,
) -> Result<ComplexMatrix> {
    if delta <= 0.0 {
        return Err(QgtError::BadDelta(delta));
    }
    Ok(p_at_k_plus.sub(p_at_k).scale_real(1.0 / delta))
}

/// Average of L_ij / (P_g)_ij over usable elements, weighted by
/// |(P_g)_ij|^2 — the least-squares solution of L = scalar * P_g over the
/// included elements, which keeps ill-conditioned tiny denominators from
/// dominating. Elements with |(P_g)_ij| below `robust_eps` (or exactly
/// zero) are excluded; when all are excluded the trace identity
/// Tr(L) / Tr(P_g) takes over and the point is flagged.
fn recover_scalar(
    l: &ComplexMatrix,
    pg: &ComplexMatrix,
    robust_eps: f64,
    flags: &mut ExtractionFlags,
) -> Complex64 {
    let n = pg.dim();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0f64;
    let mut used = 0u32;
    for i in 0..n {
        for j in 0..n {
            let denom = pg[(i, j)];
            let mag = denom.norm();
            if mag == 0.0 || mag < robust_eps {
                flags.excluded_elements += 1;
                continue;
            }
            num += l[(i, j)] * denom.conj();
            den += mag * mag;
            used += 1;
        }
    }
    if used == 0 {
        flags.trace_fallback = true;
        let tr_p = pg.trace();
        return l.trace() / tr_p;
    }
    num / den
}

/// Scalar recovery with fresh flags, for callers that sandwich with other
/// rank-1 projectors (the degenerate-subspace path).
pub(crate) fn recover_scalar_elements(
    l: &ComplexMatrix,
    pg: &ComplexMatrix,
    robust_eps: f64,
) -> (Complex64, ExtractionFlags) {
    let mut flags = ExtractionFlags::default();
    let s = recover_scalar(l, pg, robust_eps, &mut flags);
    (s, flags)
}

/// Solve for the metric and curvature components from the ground and
/// excited projectors and the two projector derivatives.
pub fn extract_qgt(
    p_g: &ComplexMatrix,
    p_e: &ComplexMatrix,
    dp_x: &ComplexMatrix,
    dp_y: &ComplexMatrix,
    robust_eps: f64,
) -> Result<ExtractedQgt> {
    let defect = p_g
        .add(p_e)
        .sub(&ComplexMatrix::identity(p_g.dim()))
        .max_abs();
    if defect > 1e-8 {
        return Err(QgtError::InconsistentProjectors(defect));
    }
    let mut flags = ExtractionFlags::default();

    let xex = dp_x.mul(p_e).mul(dp_x);
    let xey = dp_x.mul(p_e).mul(dp_y);
    let yex = dp_y.mul(p_e).mul(dp_x);
    let yey = dp_y.mul(p_e).mul(dp_y);

    // g_xx, g_yy: the mu = nu symmetric combination is the product itself.
    let g_xx = recover_scalar(&xex, p_g, robust_eps, &mut flags);
    let g_yy = recover_scalar(&yey, p_g, robust_eps, &mut flags);
    // g_xy from the symmetrized combination, F_xy from the antisymmetric one.
    let sym = xey.add(&yex).scale_real(0.5);
    let asym = xey.sub(&yex).scale(Complex64::new(0.0, 1.0));
    let g_xy = recover_scalar(&sym, p_g, robust_eps, &mut flags);
    let f_xy = recover_scalar(&asym, p_g, robust_eps, &mut flags);

    flags.max_residue = g_xx
        .im
        .abs()
        .max(g_yy.im.abs())
        .max(g_xy.im.abs())
        .max(f_xy.im.abs());

    Ok(ExtractedQgt {
        point: QgtPoint {
            g_xx: g_xx.re,
            g_xy: g_xy.re,
            g_yy: g_yy.re,
            f_xy: f_xy.re,
        },
        flags,
    })
}

/// Uniform momentum grid k_i = 2 pi i / n and the finite-difference
/// increment used over it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub delta: f64,
    pub m: f64,
}

impl GridSpec {
    pub fn new(n: usize, delta: f64, m: f64) -> Self {
        Self { n, delta, m }
    }

    pub fn k(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * i as f64 / self.n as f64
    }

    pub fn points(&self) -> usize {
        self.n * self.n
    }
}

/// C = (1/2pi) sum F_xy (2pi/n)^2 over the full grid.
pub fn chern_number(f_field: &[f64], grid: &GridSpec) -> Result<f64> {
    if f_field.len() != grid.points() {
        return Err(QgtError::IncompleteField(grid.points(), f_field.len()));
    }
    let cell = 2.0 * std::f64::consts::PI / grid.n as f64;
    let sum: f64 = f_field.iter().sum();
    Ok(sum * cell * cell / (2.0 * std::f64::consts::PI))
}
