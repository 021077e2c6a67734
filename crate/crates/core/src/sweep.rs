//! Grid sweeps over the Brillouin zone: per-point projector preparation by
//! the chosen method, geometric-tensor extraction, deterministic per-point
//! seeding, parallel execution, Chern integration, and serialization.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::NoiseConfig;
use crate::ite::{prepare_ground_projector_ite, InitialState, IteError};
use crate::linalg::ComplexMatrix;
use crate::model::{exact_ground_projector, ModelPoint};
use crate::qgt::{chern_number, extract_qgt, projector_derivative, GridSpec};
use crate::vqa::{prepare_ground_projector_vqa, Mode, OptimizerConfig};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("curvature field incomplete: {0} of {1} points failed")]
    IncompleteField(usize, usize),
    #[error(transparent)]
    Qgt(#[from] crate::qgt::QgtError),
}

pub type Result<T> = std::result::Result<T, SweepError>;

/// Ground-state preparation method for a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vqa,
    Ite,
    Exact,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "vqa" => Ok(Method::Vqa),
            "ite" => Ok(Method::Ite),
            "exact" => Ok(Method::Exact),
            other => Err(format!("unknown method '{other}' (expected vqa, ite, or exact)")),
        }
    }
}

/// Full sweep configuration; serializes losslessly into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    pub m: f64,
    pub grid_n: usize,
    pub delta: f64,
    pub tau: f64,
    /// None = exact expectation values instead of sampled shots.
    pub shots: Option<u64>,
    pub depolarizing_p: f64,
    pub readout_q: f64,
    pub mitigate: bool,
    pub purify: bool,
    pub robust_eps: f64,
    pub base_seed: u64,
    /// 0 = use all available cores.
    pub workers: usize,
}

impl RunConfig {
    pub fn new(method: Method, m: f64) -> Self {
        Self {
            method,
            m,
            grid_n: 15,
            delta: 0.04 * std::f64::consts::PI,
            tau: 8.0,
            shots: Some(100_000),
            depolarizing_p: 0.0,
            readout_q: 0.0,
            mitigate: false,
            purify: true,
            robust_eps: 0.0,
            base_seed: 0,
            workers: 0,
        }
    }

    pub fn exact(m: f64) -> Self {
        let mut c = Self::new(Method::Exact, m);
        c.shots = None;
        c
    }

    pub fn noise(&self) -> NoiseConfig {
        NoiseConfig {
            depolarizing_p: self.depolarizing_p,
            readout_q: self.readout_q,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n == 0 {
            return Err(SweepError::InvalidConfig("grid_n must be positive".into()));
        }
        if !(self.delta > 0.0) {
            return Err(SweepError::InvalidConfig(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !(self.tau > 0.0) {
            return Err(SweepError::InvalidConfig(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.shots == Some(0) {
            return Err(SweepError::InvalidConfig("shots must be positive".into()));
        }
        self.noise()
            .validate()
            .map_err(|e| SweepError::InvalidConfig(e.to_string()))?;
        if self.robust_eps < 0.0 {
            return Err(SweepError::InvalidConfig(format!(
                "robust_eps must be nonnegative, got {}",
                self.robust_eps
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.grid_n, self.delta, self.m)
    }
}

/// splitmix64 finalizer, used to decorrelate per-point seeds.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One grid-point record of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub kx: f64,
    pub ky: f64,
    pub g_xx: f64,
    pub g_xy: f64,
    pub g_yy: f64,
    pub f_xy: f64,
    pub success_fraction: f64,
    /// "ok", or semicolon-separated quality notes / error description.
    pub flags: String,
    pub seed: u64,
}

impl PointRecord {
    pub fn is_ok(&self) -> bool {
        !self.flags.starts_with("error")
    }
}

/// Complete sweep output: records plus the reproducibility manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: RunConfig,
    pub version: String,
    pub wall_time_s: f64,
    pub records: Vec<PointRecord>,
}

fn flags_string(f: &crate::qgt::ExtractionFlags) -> String {
    let mut parts = Vec::new();
    if f.excluded_elements > 0 {
        parts.push(format!("excluded={}", f.excluded_elements));
    }
    if f.trace_fallback {
        parts.push("trace_fallback".to_string());
    }
    if f.max_residue > 1e-6 {
        parts.push(format!("residue={:.2e}", f.max_residue));
    }
    if parts.is_empty() {
        "ok".to_string()
    } else {
        parts.join(";")
    }
}

/// Prepare P_g at one momentum with the configured method. Returns the
/// projector and the post-selection success fraction (1.0 where the notion
/// does not apply).
pub fn prepare_projector(
    cfg: &RunConfig,
    p: ModelPoint,
    seed: u64,
) -> std::result::Result<(ComplexMatrix, f64), String> {
    let mode = match cfg.shots {
        None => Mode::Exact,
        Some(shots) => Mode::Shots {
            shots,
            seed,
            noise: cfg.noise(),
            mitigate: cfg.mitigate,
        },
    };
    match cfg.method {
        Method::Exact => exact_ground_projector(p)
            .map(|proj| (proj, 1.0))
            .map_err(|e| e.to_string()),
        Method::Vqa => {
            let opt = OptimizerConfig {
                seed,
                ..OptimizerConfig::default()
            };
            prepare_ground_projector_vqa(p, opt, mode, cfg.purify)
                .map(|proj| (proj, 1.0))
                .map_err(|e| e.to_string())
        }
        Method::Ite => {
            let run = |initial| {
                prepare_ground_projector_ite(p, cfg.tau, mode, initial, cfg.purify, 1e-6)
            };
            let result = match run(InitialState::Up) {
                Err(IteError::OrthogonalStart) => run(InitialState::Plus),
                other => other,
            };
            result
                .map(|prep| (prep.projector, prep.success_fraction))
                .map_err(|e| e.to_string())
        }
    }
}

fn sweep_point(cfg: &RunConfig, index: usize) -> PointRecord {
    let grid = cfg.grid();
    let i = index / grid.n;
    let j = index % grid.n;
    let p = ModelPoint::new(grid.k(i), grid.k(j), cfg.m);
    let seed = mix_seed(cfg.base_seed, index as u64);
    let mut record = PointRecord {
        kx: p.kx,
        ky: p.ky,
        g_xx: f64::NAN,
        g_xy: f64::NAN,
        g_yy: f64::NAN,
        f_xy: f64::NAN,
        success_fraction: f64::NAN,
        flags: String::new(),
        seed,
    };

    // Three preparations per point (k, k+delta x, k+delta y) with distinct
    // derived seeds; the excited projector is I - P_g.
    let targets = [p, p.shifted(cfg.delta, 0.0), p.shifted(0.0, cfg.delta)];
    let mut projectors = Vec::with_capacity(3);
    let mut min_success = 1.0f64;
    for (t, target) in targets.into_iter().enumerate() {
        match prepare_projector(cfg, target, mix_seed(seed, t as u64)) {
            Ok((proj, frac)) => {
                min_success = min_success.min(frac);
                projectors.push(proj);
            }
            Err(e) => {
                record.flags = format!("error:{e}");
                return record;
            }
        }
    }
    let p_g = &projectors[0];
    let p_e = ComplexMatrix::identity(2).sub(p_g);
    let extracted = projector_derivative(p_g, &projectors[1], cfg.delta)
        .and_then(|dp_x| {
            let dp_y = projector_derivative(p_g, &projectors[2], cfg.delta)?;
            extract_qgt(p_g, &p_e, &dp_x, &dp_y, cfg.robust_eps)
        });
    match extracted {
        Ok(out) => {
            record.g_xx = out.point.g_xx;
            record.g_xy = out.point.g_xy;
            record.g_yy = out.point.g_yy;
            record.f_xy = out.point.f_xy;
            record.success_fraction = min_success;
            record.flags = flags_string(&out.flags);
        }
        Err(e) => record.flags = format!("error:{e}"),
    }
    record
}

/// Run a full grid sweep. Per-point failures land in the record flags;
/// only an invalid config aborts.
pub fn sweep(cfg: &RunConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let start = Instant::now();
    let n_points = cfg.grid().points();
    let run = || -> Vec<PointRecord> {
        (0..n_points)
            .into_par_iter()
            .map(|index| sweep_point(cfg, index))
            .collect()
    };
    let records = if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| SweepError::InvalidConfig(e.to_string()))?;
        pool.install(run)
    } else {
        run()
    };
    Ok(SweepResult {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        records,
    })
}

/// Chern-number report for a completed sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChernReport {
    pub chern: f64,
    pub nearest_integer: i64,
    pub residual: f64,
    pub failed_points: usize,
}

/// Integrate the curvature field of a sweep. Fails if any point errored.
pub fn chern(result: &SweepResult) -> Result<ChernReport> {
    let failed = result.records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        return Err(SweepError::IncompleteField(failed, result.records.len()));
    }
    let field: Vec<f64> = result.records.iter().map(|r| r.f_xy).collect();
    let c = chern_number(&field, &result.config.grid())?;
    let nearest = c.round() as i64;
    Ok(ChernReport {
        chern: c,
        nearest_integer: nearest,
        residual: (c - nearest as f64).abs(),
        failed_points: 0,
    })
}

fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "nan".to_string()
    }
}

/// Fixed-column CSV for the per-point records.
pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::from("kx,ky,g_xx,g_xy,g_yy,F_xy,success_fraction,flags\n");
    for r in &result.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt17(r.kx),
            fmt17(r.ky),
            fmt17(r.g_xx),
            fmt17(r.g_xy),
            fmt17(r.g_yy),
            fmt17(r.f_xy),
            fmt17(r.success_fraction),
            r.flags
        ));
    }
    out
}

/// JSON manifest: config, version, wall time, and per-point seeds.
pub fn to_manifest_json(result: &SweepResult) -> String {
    serde_json::to_string_pretty(result).expect("sweep result serializes")
}

/// One validation suite outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub worst_residual: f64,
    pub detail: String,
}

/// Cross-method validation against the independent oracles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub suites: Vec<SuiteReport>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

/// Run the oracle-equivalence suites in exact mode with seeded points.
pub fn validate(base_seed: u64) -> ValidationReport {
    use crate::model::{bloch_vector, oracle_qgt, GammaModelPoint};
    use crate::nonabelian::{extract_nonabelian, oracle_nonabelian};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    let mut suites = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);

    // Projector extraction vs eigenvector oracle at random gapped points.
    {
        let mut worst = 0.0f64;
        for _ in 0..25 {
            let p = random_gapped_point(&mut rng);
            let delta = 1e-4;
            let p_g = exact_ground_projector(p).unwrap();
            let p_e = ComplexMatrix::identity(2).sub(&p_g);
            let px = exact_ground_projector(p.shifted(delta, 0.0)).unwrap();
            let py = exact_ground_projector(p.shifted(0.0, delta)).unwrap();
            let dp_x = projector_derivative(&p_g, &px, delta).unwrap();
            let dp_y = projector_derivative(&p_g, &py, delta).unwrap();
            let got = extract_qgt(&p_g, &p_e, &dp_x, &dp_y, 0.0).unwrap().point;
            let want = oracle_qgt(p, delta).unwrap();
            worst = worst
                .max((got.g_xx - want.g_xx).abs())
                .max((got.g_xy - want.g_xy).abs())
                .max((got.g_yy - want.g_yy).abs())
                .max((got.f_xy - want.f_xy).abs());
        }
        suites.push(SuiteReport {
            name: "projector-vs-eigenvector-oracle".into(),
            passed: worst < 1e-6,
            worst_residual: worst,
            detail: "25 random gapped points, delta=1e-4, tolerance 1e-6".into(),
        });
    }

    // ITE exact-mode preparation vs exact projector.
    {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let p = random_gapped_point(&mut rng);
            let prep = prepare_ground_projector_ite(
                p,
                8.0,
                Mode::Exact,
                InitialState::Up,
                true,
                1e-6,
            )
            .or_else(|e| match e {
                IteError::OrthogonalStart => prepare_ground_projector_ite(
                    p,
                    8.0,
                    Mode::Exact,
                    InitialState::Plus,
                    true,
                    1e-6,
                ),
                other => Err(other),
            })
            .unwrap();
            let exact = exact_ground_projector(p).unwrap();
            worst = worst.max(prep.projector.sub(&exact).max_abs());
        }
        suites.push(SuiteReport {
            name: "ite-vs-exact".into(),
            passed: worst < 1e-8,
            worst_residual: worst,
            detail: "20 random gapped points, tau=8, tolerance 1e-8".into(),
        });
    }

    // VQA exact-mode energy vs -|d|.
    {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let p = random_gapped_point(&mut rng);
            let d = bloch_vector(p);
            let cfg = OptimizerConfig {
                seed: rng.gen(),
                ..OptimizerConfig::default()
            };
            let (_, e) = crate::vqa::optimize_ground(d, cfg, Mode::Exact).unwrap();
            worst = worst.max((e + d.norm()).abs());
        }
        suites.push(SuiteReport {
            name: "vqa-vs-exact-energy".into(),
            passed: worst < 1e-6,
            worst_residual: worst,
            detail: "100 random Bloch vectors, tolerance 1e-6".into(),
        });
    }

    // Non-Abelian extraction vs the eigenvector oracle.
    {
        let refs = crate::model::default_references();
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let q = GammaModelPoint::new(
                rng.gen_range(0.3..PI - 0.3),
                rng.gen_range(0.3..PI - 0.3),
                1.0,
            );
            let got = extract_nonabelian(q, 1e-4, &refs, 0.0).unwrap();
            let want = oracle_nonabelian(q, 1e-4, &refs).unwrap();
            for ((_, a), (_, b)) in got.blocks().into_iter().zip(want.blocks()) {
                for r in 0..2 {
                    for c in 0..2 {
                        worst = worst.max((a.g[r][c] - b.g[r][c]).norm());
                        worst = worst.max((a.f[r][c] - b.f[r][c]).norm());
                    }
                }
            }
        }
        suites.push(SuiteReport {
            name: "nonabelian-vs-oracle".into(),
            passed: worst < 1e-5,
            worst_residual: worst,
            detail: "10 random Gamma-model points, delta=1e-4, tolerance 1e-5".into(),
        });
    }

    ValidationReport { suites }
}

/// Random momentum and mass with a comfortable spectral gap (|d| > 1.5), so
/// exponential-in-tau suppression e^{-2 tau |d|} is far below the
/// tolerances of the convergence suites (e^{-24} ~ 4e-11 at tau = 8).
pub fn random_gapped_point(rng: &mut impl rand::Rng) -> ModelPoint {
    use std::f64::consts::PI;
    loop {
        let p = ModelPoint::new(
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.25..3.75),
        );
        if crate::model::bloch_vector(p).norm() > 1.5 {
            return p;
        }
    }
}
