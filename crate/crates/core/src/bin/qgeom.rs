//! Command-line front end: grid sweeps, Chern numbers, single-point
//! extraction, degenerate-subspace extraction, and oracle validation.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qgeom::model::{default_references, GammaModelPoint, ModelPoint};
use qgeom::nonabelian::{extract_nonabelian, oracle_nonabelian};
use qgeom::qgt::{extract_qgt, projector_derivative};
use qgeom::sweep::{
    chern, sweep, to_csv, to_manifest_json, validate, Method, RunConfig, SweepResult,
};

#[derive(Parser)]
#[command(
    name = "qgeom",
    version,
    about = "Quantum-geometry extraction for a two-band lattice model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every run-style subcommand; they mirror RunConfig.
#[derive(Args, Clone)]
struct RunFlags {
    /// Preparation method: vqa, ite, or exact.
    #[arg(long, default_value = "exact")]
    method: Method,
    /// Mass parameter of the model.
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Grid points per momentum axis.
    #[arg(long, default_value_t = 15)]
    grid_n: usize,
    /// Finite-difference increment in radians (default 0.04 pi).
    #[arg(long, default_value_t = 0.04 * PI)]
    delta: f64,
    /// Imaginary-time duration for the ite method.
    #[arg(long, default_value_t = 8.0)]
    tau: f64,
    /// Shots per measurement circuit.
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    /// Use exact expectation values instead of sampled shots.
    #[arg(long)]
    exact: bool,
    /// Depolarizing probability per gate per qubit.
    #[arg(long, default_value_t = 0.0)]
    depolarizing: f64,
    /// Readout bit-flip probability.
    #[arg(long, default_value_t = 0.0)]
    readout_q: f64,
    /// Apply readout-error mitigation.
    #[arg(long)]
    mitigate: bool,
    /// Disable Bloch-vector purification of reconstructed projectors.
    #[arg(long)]
    no_purify: bool,
    /// Exclude elements with |(P_g)_ij| below this threshold from the
    /// extraction average (0 = plain averaging).
    #[arg(long, default_value_t = 0.0)]
    robust_eps: f64,
    /// Base RNG seed; per-point seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl RunFlags {
    fn to_config(&self) -> RunConfig {
        let mut cfg = RunConfig::new(self.method, self.m);
        cfg.grid_n = self.grid_n;
        cfg.delta = self.delta;
        cfg.tau = self.tau;
        cfg.shots = if self.exact { None } else { Some(self.shots) };
        cfg.depolarizing_p = self.depolarizing;
        cfg.readout_q = self.readout_q;
        cfg.mitigate = self.mitigate;
        cfg.purify = !self.no_purify;
        cfg.robust_eps = self.robust_eps;
        cfg.base_seed = self.seed;
        cfg.workers = self.workers;
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a full grid sweep and write per-point records.
    Sweep {
        #[command(flatten)]
        flags: RunFlags,
        /// Output CSV path; the manifest lands next to it as <out>.manifest.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep and report the integrated Chern number.
    Chern {
        #[command(flatten)]
        flags: RunFlags,
        /// Optional CSV output path for the underlying sweep.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the geometric tensor at a single momentum.
    Point {
        #[command(flatten)]
        flags: RunFlags,
        /// Momentum k_x in radians.
        #[arg(long, default_value_t = 0.0)]
        kx: f64,
        /// Momentum k_y in radians.
        #[arg(long, default_value_t = 0.0)]
        ky: f64,
    },
    /// Degenerate-subspace extraction on the 4x4 Dirac-matrix model.
    Nonabelian {
        /// Momentum k_mu in radians.
        #[arg(long, default_value_t = PI / 3.0)]
        kmu: f64,
        /// Momentum k_nu in radians.
        #[arg(long, default_value_t = PI / 4.0)]
        knu: f64,
        /// Mass parameter.
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Finite-difference increment.
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        /// Robust-average threshold.
        #[arg(long, default_value_t = 0.0)]
        robust_eps: f64,
    },
    /// Run the oracle-equivalence validation suites.
    Validate {
        /// Base RNG seed for the random test points.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn write_outputs(result: &SweepResult, out: Option<&PathBuf>) -> std::io::Result<()> {
    let csv = to_csv(result);
    match out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            let manifest_path = path.with_extension("manifest.json");
            std::fs::write(&manifest_path, to_manifest_json(result))?;
            eprintln!(
                "wrote {} records to {} (manifest: {})",
                result.records.len(),
                path.display(),
                manifest_path.display()
            );
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep { flags, out } => {
            let result = sweep(&flags.to_config()).map_err(|e| e.to_string())?;
            write_outputs(&result, out.as_ref()).map_err(|e| e.to_string())?;
            let failed = result.records.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                eprintln!("warning: {failed} points failed; see flags column");
            }
            Ok(())
        }
        Command::Chern { flags, out } => {
            let result = sweep(&flags.to_config()).map_err(|e| e.to_string())?;
            if out.is_some() {
                write_outputs(&result, out.as_ref()).map_err(|e| e.to_string())?;
            }
            let report = chern(&result).map_err(|e| e.to_string())?;
            println!(
                "C = {:.6}  nearest integer = {}  residual = {:.3e}",
                report.chern, report.nearest_integer, report.residual
            );
            Ok(())
        }
        Command::Point { flags, kx, ky } => {
            let cfg = flags.to_config();
            cfg.validate().map_err(|e| e.to_string())?;
            let p = ModelPoint::new(kx, ky, cfg.m);
            let prepare = |target: ModelPoint, tag: u64| {
                qgeom::sweep::prepare_projector(&cfg, target, qgeom::sweep::mix_seed(cfg.base_seed, tag))
            };
            let (p_g, frac) = prepare(p, 0)?;
            let (p_gx, _) = prepare(p.shifted(cfg.delta, 0.0), 1)?;
            let (p_gy, _) = prepare(p.shifted(0.0, cfg.delta), 2)?;
            let p_e = qgeom::linalg::ComplexMatrix::identity(2).sub(&p_g);
            let dp_x =
                projector_derivative(&p_g, &p_gx, cfg.delta).map_err(|e| e.to_string())?;
            let dp_y =
                projector_derivative(&p_g, &p_gy, cfg.delta).map_err(|e| e.to_string())?;
            let out = extract_qgt(&p_g, &p_e, &dp_x, &dp_y, cfg.robust_eps)
                .map_err(|e| e.to_string())?;
            println!("kx = {kx:.6}  ky = {ky:.6}  m = {}", cfg.m);
            println!("g_xx = {:.12e}", out.point.g_xx);
            println!("g_xy = {:.12e}", out.point.g_xy);
            println!("g_yy = {:.12e}", out.point.g_yy);
            println!("F_xy = {:.12e}", out.point.f_xy);
            println!("success_fraction = {frac:.6}");
            println!(
                "flags: excluded={} trace_fallback={} max_residue={:.3e}",
                out.flags.excluded_elements, out.flags.trace_fallback, out.flags.max_residue
            );
            Ok(())
        }
        Command::Nonabelian { kmu, knu, m, delta, robust_eps } => {
            let q = GammaModelPoint::new(kmu, knu, m);
            let refs = default_references();
            let got =
                extract_nonabelian(q, delta, &refs, robust_eps).map_err(|e| e.to_string())?;
            let want = oracle_nonabelian(q, delta, &refs).map_err(|e| e.to_string())?;
            println!("k_mu = {kmu:.6}  k_nu = {knu:.6}  m = {m}  delta = {delta:.1e}");
            let mut worst = 0.0f64;
            for ((name, a), (_, b)) in got.blocks().into_iter().zip(want.blocks()) {
                println!("block {name}:");
                for r in 0..2 {
                    for c in 0..2 {
                        let dg = (a.g[r][c] - b.g[r][c]).norm();
                        let df = (a.f[r][c] - b.f[r][c]).norm();
                        worst = worst.max(dg).max(df);
                        println!(
                            "  g[{r}][{c}] = {:+.9e} {:+.9e}i   F[{r}][{c}] = {:+.9e} {:+.9e}i",
                            a.g[r][c].re, a.g[r][c].im, a.f[r][c].re, a.f[r][c].im
                        );
                    }
                }
            }
            println!("max |extracted - oracle| = {worst:.3e}");
            Ok(())
        }
        Command::Validate { seed } => {
            let report = validate(seed);
            for s in &report.suites {
                println!(
                    "{}: {} (worst residual {:.3e}; {})",
                    s.name,
                    if s.passed { "PASS" } else { "FAIL" },
                    s.worst_residual,
                    s.detail
                );
            }
            if report.all_passed() {
                Ok(())
            } else {
                Err("validation failed".to_string())
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
