//! Property-based invariants over randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use qgeom::circuit::{run_circuit_counts, Circuit, Gate, NoiseConfig};
use qgeom::linalg::ComplexMatrix;
use qgeom::model::{exact_ground_projector, ModelPoint};
use qgeom::qgt::{extract_qgt, projector_derivative};

fn gapped_point() -> impl Strategy<Value = ModelPoint> {
    (0.0..2.0 * PI, 0.0..2.0 * PI, 0.25..3.75f64)
        .prop_map(|(kx, ky, m)| ModelPoint::new(kx, ky, m))
        .prop_filter("needs a spectral gap", |p| {
            qgeom::model::bloch_vector(*p).norm() > 0.2
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Swapping the two momentum directions conjugates the tensor:
    /// the metric components transpose and the curvature flips sign.
    #[test]
    fn direction_swap_flips_curvature(p in gapped_point()) {
        let delta = 1e-4;
        let p_g = exact_ground_projector(p).unwrap();
        let p_e = ComplexMatrix::identity(2).sub(&p_g);
        let px = exact_ground_projector(p.shifted(delta, 0.0)).unwrap();
        let py = exact_ground_projector(p.shifted(0.0, delta)).unwrap();
        let dp_x = projector_derivative(&p_g, &px, delta).unwrap();
        let dp_y = projector_derivative(&p_g, &py, delta).unwrap();
        let fwd = extract_qgt(&p_g, &p_e, &dp_x, &dp_y, 0.0).unwrap().point;
        let rev = extract_qgt(&p_g, &p_e, &dp_y, &dp_x, 0.0).unwrap().point;
        prop_assert!((fwd.g_xx - rev.g_yy).abs() < 1e-10);
        prop_assert!((fwd.g_yy - rev.g_xx).abs() < 1e-10);
        prop_assert!((fwd.g_xy - rev.g_xy).abs() < 1e-10);
        prop_assert!((fwd.f_xy + rev.f_xy).abs() < 1e-10);
    }

    /// Metric diagonals are nonnegative and the determinant inequality
    /// g_xx g_yy - g_xy^2 >= (F_xy / 2)^2 holds for a single band
    /// (up to discretization slack).
    #[test]
    fn metric_positivity(p in gapped_point()) {
        let q = qgeom::model::oracle_qgt(p, 1e-4).unwrap();
        prop_assert!(q.g_xx >= -1e-10);
        prop_assert!(q.g_yy >= -1e-10);
        let det = q.g_xx * q.g_yy - q.g_xy * q.g_xy;
        let bound = 0.25 * q.f_xy * q.f_xy;
        prop_assert!(det >= bound - 1e-6 * (1.0 + bound));
    }

    /// Sampled histograms always account for every shot, with and
    /// without readout noise.
    #[test]
    fn histogram_sums_to_shots(
        theta in 0.0..PI,
        phi in 0.0..2.0 * PI,
        shots in 1u64..5000,
        seed in any::<u64>(),
        q in 0.0..0.4f64,
    ) {
        let mut c = Circuit::new(1);
        c.gates.push(Gate::U3 { theta, phi, lambda: 0.0, target: 0 });
        c.measure = vec![0];
        let initial = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let noise = NoiseConfig { depolarizing_p: 0.0, readout_q: q };
        let counts = run_circuit_counts(&c, &initial, shots, seed, noise).unwrap();
        let total: u64 = counts.histogram.values().sum();
        prop_assert_eq!(total, shots);
        prop_assert!(counts.histogram.keys().all(|k| k == "0" || k == "1"));
    }
}
