//! Variational ground-state preparation: a single U3 gate prepares the
//! trial state, the energy objective comes from Pauli expectations, and a
//! Nelder-Mead simplex over (theta, phi) does the classical minimization.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{
    all_up, run_circuit_counts, Circuit, CircuitError, Gate, NoiseConfig,
};
use crate::linalg::ComplexMatrix;
use crate::model::{bloch_vector, BlochVector, ModelPoint};
use crate::tomography::{
    basis_rotation_gates, exact_expectations, expectation_from_counts, expectation_from_probs,
    readout_mitigation, reconstruct_projector, Pauli, PauliExpectations, TomographyError,
};

#[derive(Debug, Error)]
pub enum VqaError {
    #[error("gapless point: |d| = {0:.3e}")]
    Gapless(f64),
    #[error("optimizer did not reach tolerance after {restarts} restarts; best energy {best_energy:.12e} (target {target:.12e}), params ({theta:.6}, {phi:.6})")]
    NoConvergence {
        restarts: usize,
        best_energy: f64,
        target: f64,
        theta: f64,
        phi: f64,
    },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
}

pub type Result<T> = std::result::Result<T, VqaError>;

/// U3 angles of the preparation gate. lambda only contributes a global
/// phase when acting on |up>, so it stays 0 unless set explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PqcParams {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

/// Classical optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub energy_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 400,
            energy_tol: 1e-8,
            restarts: 4,
            seed: 0,
        }
    }
}

/// How expectation values are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Exact,
    Shots {
        shots: u64,
        seed: u64,
        noise: NoiseConfig,
        mitigate: bool,
    },
}

/// The prepared trial state U3(theta, phi, lambda)|up>.
pub fn trial_state(params: PqcParams) -> Vec<Complex64> {
    let c = (params.theta / 2.0).cos();
    let s = (params.theta / 2.0).sin();
    vec![
        Complex64::new(c, 0.0),
        Complex64::from_polar(s, params.phi),
    ]
}

fn preparation_circuit(params: PqcParams, pauli: Pauli) -> Circuit {
    let mut c = Circuit::new(1);
    c.gates.push(Gate::U3 {
        theta: params.theta,
        phi: params.phi,
        lambda: params.lambda,
        target: 0,
    });
    c.gates.extend(basis_rotation_gates(pauli, 0));
    c.measure = vec![0];
    c
}

/// Measure all three Pauli expectations of the trial state, one circuit per
/// operator.
pub fn measure_expectations(params: PqcParams, mode: Mode) -> Result<PauliExpectations> {
    match mode {
        Mode::Exact => Ok(exact_expectations(&trial_state(params))),
        Mode::Shots { shots, seed, noise, mitigate } => {
            let mut values = [0.0f64; 3];
            for (i, pauli) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
                let c = preparation_circuit(params, pauli);
                // Distinct derived seed per measurement basis.
                let counts = run_circuit_counts(
                    &c,
                    &all_up(1),
                    shots,
                    seed.wrapping_add(i as u64),
                    noise,
                )?;
                values[i] = if mitigate && noise.readout_q > 0.0 {
                    let (p0, p1) = readout_mitigation(&counts, noise.readout_q)?;
                    expectation_from_probs(p0, p1)
                } else {
                    expectation_from_counts(&counts)
                };
            }
            Ok(PauliExpectations {
                sx: values[0],
                sy: values[1],
                sz: values[2],
            })
        }
    }
}

/// E = d_x <sx> + d_y <sy> + d_z <sz>. Exact mode uses the closed form
/// E = d_z cos(theta) + sin(theta) (d_x cos(phi) + d_y sin(phi)).
pub fn energy_expectation(params: PqcParams, d: BlochVector, mode: Mode) -> Result<f64> {
    match mode {
        Mode::Exact => Ok(d.dz * params.theta.cos()
            + params.theta.sin() * (d.dx * params.phi.cos() + d.dy * params.phi.sin())),
        Mode::Shots { .. } => {
            let e = measure_expectations(params, mode)?;
            Ok(d.dx * e.sx + d.dy * e.sy + d.dz * e.sz)
        }
    }
}

/// Nelder-Mead over (theta, phi) with seeded random restarts. The exact
/// ground energy -|d| is the convergence target.
pub fn optimize_ground(d: BlochVector, cfg: OptimizerConfig, mode: Mode) -> Result<(PqcParams, f64)> {
    let dn = d.norm();
    if dn <= 1e-12 {
        return Err(VqaError::Gapless(dn));
    }
    let energy = |theta: f64, phi: f64| -> Result<f64> {
        energy_expectation(PqcParams { theta, phi, lambda: 0.0 }, d, mode)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<([f64; 2], f64)> = None;
    // First start is deterministic from the Bloch vector, remaining ones
    // random; simplex can stall at the theta in {0, pi} boundary otherwise.
    // The energy minimum sits at the -d direction on the Bloch sphere.
    let mut starts = vec![[(-d.dz / dn).acos(), (-d.dy).atan2(-d.dx)]];
    for _ in 1..cfg.restarts.max(1) {
        starts.push([
            rng.gen_range(0.1..std::f64::consts::PI - 0.1),
            rng.gen_range(0.0..2.0 * std::f64::consts::PI),
        ]);
    }
    for start in starts {
        let (point, value) = nelder_mead(&energy, start, cfg.max_iters, cfg.energy_tol)?;
        let better = match &best {
            Some((_, bv)) => value < *bv,
            None => true,
        };
        if better {
            best = Some((point, value));
        }
        if let Some((_, bv)) = &best {
            if bv + dn <= cfg.energy_tol {
                break;
            }
        }
    }
    let (point, value) = best.expect("at least one start");
    if value + dn > cfg.energy_tol && matches!(mode, Mode::Exact) {
        return Err(VqaError::NoConvergence {
            restarts: cfg.restarts,
            best_energy: value,
            target: -dn,
            theta: point[0],
            phi: point[1],
        });
    }
    let params = PqcParams {
        theta: point[0].rem_euclid(2.0 * std::f64::consts::PI),
        phi: point[1].rem_euclid(2.0 * std::f64::consts::PI),
        lambda: 0.0,
    };
    Ok((params, value))
}

fn nelder_mead<F>(
    f: &F,
    start: [f64; 2],
    max_iters: usize,
    tol: f64,
) -> Result<([f64; 2], f64)>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    let step = 0.25;
    let mut simplex = vec![
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = Vec::with_capacity(3);
    for p in &simplex {
        values.push(f(p[0], p[1])?);
    }
    for _ in 0..max_iters {
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let (lo, mid, hi) = (order[0], order[1], order[2]);
        if (values[hi] - values[lo]).abs() < tol * 1e-2
            && (simplex[hi][0] - simplex[lo][0]).abs() + (simplex[hi][1] - simplex[lo][1]).abs()
                < 1e-10
        {
            break;
        }
        let centroid = [
            0.5 * (simplex[lo][0] + simplex[mid][0]),
            0.5 * (simplex[lo][1] + simplex[mid][1]),
        ];
        let reflect = [
            centroid[0] + ALPHA * (centroid[0] - simplex[hi][0]),
            centroid[1] + ALPHA * (centroid[1] - simplex[hi][1]),
        ];
        let fr = f(reflect[0], reflect[1])?;
        if fr < values[lo] {
            let expand = [
                centroid[0] + GAMMA * (reflect[0] - centroid[0]),
                centroid[1] + GAMMA * (reflect[1] - centroid[1]),
            ];
            let fe = f(expand[0], expand[1])?;
            if fe < fr {
                simplex[hi] = expand;
                values[hi] = fe;
            } else {
                simplex[hi] = reflect;
                values[hi] = fr;
            }
        } else if fr < values[mid] {
            simplex[hi] = reflect;
            values[hi] = fr;
        } else {
            let contract = [
                centroid[0] + RHO * (simplex[hi][0] - centroid[0]),
                centroid[1] + RHO * (simplex[hi][1] - centroid[1]),
            ];
            let fc = f(contract[0], contract[1])?;
            if fc < values[hi] {
                simplex[hi] = contract;
                values[hi] = fc;
            } else {
                for i in [mid, hi] {
                    simplex[i] = [
                        simplex[lo][0] + SIGMA * (simplex[i][0] - simplex[lo][0]),
                        simplex[lo][1] + SIGMA * (simplex[i][1] - simplex[lo][1]),
                    ];
                    values[i] = f(simplex[i][0], simplex[i][1])?;
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if values[i] < values[best] {
            best = i;
        }
    }
    Ok((simplex[best], values[best]))
}

/// Parameter-shift gradient descent alternative to the simplex.
pub fn optimize_ground_parameter_shift(
    d: BlochVector,
    cfg: OptimizerConfig,
    mode: Mode,
) -> Result<(PqcParams, f64)> {
    let dn = d.norm();
    if dn <= 1e-12 {
        return Err(VqaError::Gapless(dn));
    }
    let energy = |theta: f64, phi: f64| -> Result<f64> {
        energy_expectation(PqcParams { theta, phi, lambda: 0.0 }, d, mode)
    };
    let mut theta = (-d.dz / dn).acos();
    let mut phi = (-d.dy).atan2(-d.dx);
    let shift = std::f64::consts::FRAC_PI_2;
    let mut lr = 0.5;
    let mut e = energy(theta, phi)?;
    for _ in 0..cfg.max_iters {
        let g_theta = 0.5 * (energy(theta + shift, phi)? - energy(theta - shift, phi)?);
        let g_phi = 0.5 * (energy(theta, phi + shift)? - energy(theta, phi - shift)?);
        let (nt, np) = (theta - lr * g_theta, phi - lr * g_phi);
        let ne = energy(nt, np)?;
        if ne < e {
            theta = nt;
            phi = np;
            e = ne;
        } else {
            lr *= 0.5;
            if lr < 1e-10 {
                break;
            }
        }
        if e + dn <= cfg.energy_tol {
            break;
        }
    }
    if e + dn > cfg.energy_tol && matches!(mode, Mode::Exact) {
        return Err(VqaError::NoConvergence {
            restarts: 0,
            best_energy: e,
            target: -dn,
            theta,
            phi,
        });
    }
    Ok((
        PqcParams {
            theta: theta.rem_euclid(2.0 * std::f64::consts::PI),
            phi: phi.rem_euclid(2.0 * std::f64::consts::PI),
            lambda: 0.0,
        },
        e,
    ))
}

/// Full pipeline: optimize, run the three measurement circuits, reconstruct
/// the ground-state projector.
pub fn prepare_ground_projector_vqa(
    p: ModelPoint,
    cfg: OptimizerConfig,
    mode: Mode,
    purify: bool,
) -> Result<ComplexMatrix> {
    let d = bloch_vector(p);
    // Optimization always runs in exact mode first; shot mode only affects
    // the measurement stage.
    let (params, _) = optimize_ground(d, cfg, Mode::Exact)?;
    let e = measure_expectations(params, mode)?;
    Ok(reconstruct_projector(e, purify)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::exact_ground_projector;
    use std::f64::consts::PI;

    #[test]
    fn energy_closed_form_cases() {
        let p = |theta: f64, phi: f64| PqcParams { theta, phi, lambda: 0.0 };
        let e = energy_expectation(p(0.0, 0.0), BlochVector::new(0.0, 0.0, -1.0), Mode::Exact)
            .unwrap();
        assert!((e + 1.0).abs() < 1e-15);
        let e = energy_expectation(p(PI / 2.0, PI), BlochVector::new(1.0, 0.0, 0.0), Mode::Exact)
            .unwrap();
        assert!((e + 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_matches_statevector() {
        let params = PqcParams { theta: 1.1, phi: 2.3, lambda: 0.0 };
        let d = BlochVector::new(0.4, -0.7, 0.2);
        let analytic = energy_expectation(params, d, Mode::Exact).unwrap();
        let e = exact_expectations(&trial_state(params));
        let from_state = d.dx * e.sx + d.dy * e.sy + d.dz * e.sz;
        assert!((analytic - from_state).abs() < 1e-12);
    }

    #[test]
    fn lambda_does_not_change_energy() {
        let d = BlochVector::new(0.3, 0.5, -0.6);
        for lambda in [0.0, 1.0, 4.0] {
            let e0 = exact_expectations(&trial_state(PqcParams {
                theta: 0.9,
                phi: 1.7,
                lambda,
            }));
            let e = d.dx * e0.sx + d.dy * e0.sy + d.dz * e0.sz;
            let base = energy_expectation(
                PqcParams { theta: 0.9, phi: 1.7, lambda: 0.0 },
                d,
                Mode::Exact,
            )
            .unwrap();
            assert!((e - base).abs() < 1e-12);
        }
    }

    #[test]
    fn optimize_simple_axes() {
        let cfg = OptimizerConfig::default();
        let (params, e) =
            optimize_ground(BlochVector::new(0.0, 0.0, -1.0), cfg, Mode::Exact).unwrap();
        assert!((e + 1.0).abs() < 1e-8);
        let t = params.theta.rem_euclid(2.0 * PI);
        assert!(t.min(2.0 * PI - t) < 1e-3, "theta = {t}");
        let (params, e) =
            optimize_ground(BlochVector::new(0.0, 0.0, 1.0), cfg, Mode::Exact).unwrap();
        assert!((e + 1.0).abs() < 1e-8);
        assert!((params.theta - PI).abs() < 1e-3);
    }

    #[test]
    fn optimize_random_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let cfg = OptimizerConfig::default();
        for _ in 0..100 {
            let v: [f64; 3] = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n < 1e-3 {
                continue;
            }
            let d = BlochVector::new(v[0] / n, v[1] / n, v[2] / n);
            let (_, e) = optimize_ground(d, cfg, Mode::Exact).unwrap();
            assert!((e + 1.0).abs() < 1e-6, "residual {}", (e + 1.0).abs());
        }
    }

    #[test]
    fn optimization_deterministic() {
        let d = BlochVector::new(0.2, -0.9, 0.4);
        let cfg = OptimizerConfig::default();
        let a = optimize_ground(d, cfg, Mode::Exact).unwrap();
        let b = optimize_ground(d, cfg, Mode::Exact).unwrap();
        assert_eq!(a.0, b.0);
    }

    #[test]
    fn parameter_shift_converges() {
        let d = BlochVector::new(0.6, 0.3, -0.5);
        let cfg = OptimizerConfig { max_iters: 2000, ..Default::default() };
        let (_, e) = optimize_ground_parameter_shift(d, cfg, Mode::Exact).unwrap();
        assert!((e + d.norm()).abs() < 1e-6);
    }

    #[test]
    fn projector_exact_mode_high_symmetry() {
        let p = prepare_ground_projector_vqa(
            ModelPoint::new(0.0, 0.0, 1.0),
            OptimizerConfig::default(),
            Mode::Exact,
            true,
        )
        .unwrap();
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn projector_matches_oracle() {
        let pt = ModelPoint::new(PI / 2.0, PI / 2.0, 1.0);
        let got = prepare_ground_projector_vqa(pt, OptimizerConfig::default(), Mode::Exact, true)
            .unwrap();
        let want = exact_ground_projector(pt).unwrap();
        assert!(got.sub(&want).max_abs() < 1e-6);
    }

    #[test]
    fn projector_shot_mode_close() {
        let pt = ModelPoint::new(PI / 2.0, PI / 2.0, 1.0);
        let mode = Mode::Shots {
            shots: 100_000,
            seed: 3,
            noise: NoiseConfig::noiseless(),
            mitigate: false,
        };
        let got =
            prepare_ground_projector_vqa(pt, OptimizerConfig::default(), mode, true).unwrap();
        let want = exact_ground_projector(pt).unwrap();
        // Trace distance for 2x2 Hermitian diff = sum of |eigenvalues| / 2.
        let diff = got.sub(&want);
        let (vals, _) = crate::linalg::hermitian_eigensolve(&diff).unwrap();
        let td = 0.5 * vals.iter().map(|v| v.abs()).sum::<f64>();
        assert!(td < 0.02, "trace distance {td}");
    }
}
