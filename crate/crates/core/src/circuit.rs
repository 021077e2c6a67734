//! Gate-level statevector simulation for 1-3 qubit circuits, seeded shot
//! sampling, optional depolarizing and readout noise, and ancilla
//! post-selection.
//!
//! Bit-order convention: the top wire (qubit 0) is the most significant bit
//! of the basis index and the leftmost character of a measured bitstring.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::ComplexMatrix;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("gate targets qubit {0} but circuit has {1} qubits")]
    BadTarget(usize, usize),
    #[error("duplicate measured qubit {0}")]
    DuplicateMeasure(usize),
    #[error("two-qubit gate payload is not unitary (defect {0:.3e})")]
    NonUnitaryPayload(f64),
    #[error("initial state norm {0:.3e} is not 1")]
    BadNorm(f64),
    #[error("shots must be >= 1")]
    ZeroShots,
    #[error("no shots survived post-selection on bit {0}")]
    PostSelectionFailed(usize),
    #[error("readout flip probability {0} is outside [0, 0.5]")]
    BadReadoutProb(f64),
    #[error("depolarizing probability {0} is outside [0, 1]")]
    BadDepolarizingProb(f64),
}

pub type Result<T> = std::result::Result<T, CircuitError>;

/// A single gate in a circuit.
#[derive(Debug, Clone)]
pub enum Gate {
    U3 { theta: f64, phi: f64, lambda: f64, target: usize },
    Rx { theta: f64, target: usize },
    Ry { theta: f64, target: usize },
    /// Arbitrary 4x4 unitary on an ordered qubit pair (first = high bit).
    TwoQ { matrix: ComplexMatrix, targets: (usize, usize) },
    Cnot { control: usize, target: usize },
}

impl Gate {
    fn max_target(&self) -> usize {
        match self {
            Gate::U3 { target, .. } | Gate::Rx { target, .. } | Gate::Ry { target, .. } => *target,
            Gate::TwoQ { targets, .. } => targets.0.max(targets.1),
            Gate::Cnot { control, target } => (*control).max(*target),
        }
    }
}

/// Ordered gate list with the measured-qubit set.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub measure: Vec<usize>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
            measure: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            if g.max_target() >= self.num_qubits {
                return Err(CircuitError::BadTarget(g.max_target(), self.num_qubits));
            }
            if let Gate::TwoQ { matrix, .. } = g {
                let defect = matrix
                    .adjoint()
                    .mul(matrix)
                    .sub(&ComplexMatrix::identity(4))
                    .max_abs();
                if defect > 1e-10 {
                    return Err(CircuitError::NonUnitaryPayload(defect));
                }
            }
        }
        let mut seen = Vec::new();
        for &q in &self.measure {
            if q >= self.num_qubits {
                return Err(CircuitError::BadTarget(q, self.num_qubits));
            }
            if seen.contains(&q) {
                return Err(CircuitError::DuplicateMeasure(q));
            }
            seen.push(q);
        }
        Ok(())
    }
}

/// Measured bitstring histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    pub shots: u64,
    pub histogram: BTreeMap<String, u64>,
    pub seed: u64,
}

impl Counts {
    pub fn get(&self, bits: &str) -> u64 {
        self.histogram.get(bits).copied().unwrap_or(0)
    }
}

/// Per-gate depolarizing and per-bit readout noise strengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub depolarizing_p: f64,
    pub readout_q: f64,
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self {
            depolarizing_p: 0.0,
            readout_q: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.depolarizing_p) {
            return Err(CircuitError::BadDepolarizingProb(self.depolarizing_p));
        }
        if !(0.0..=0.5).contains(&self.readout_q) {
            return Err(CircuitError::BadReadoutProb(self.readout_q));
        }
        Ok(())
    }
}

/// Qiskit-convention general single-qubit rotation.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> ComplexMatrix {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = Complex64::new(c, 0.0);
    m[(0, 1)] = -Complex64::from_polar(s, lambda);
    m[(1, 0)] = Complex64::from_polar(s, phi);
    m[(1, 1)] = Complex64::from_polar(c, phi + lambda);
    m
}

pub fn rx_matrix(theta: f64) -> ComplexMatrix {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = Complex64::new(c, 0.0);
    m[(0, 1)] = Complex64::new(0.0, -s);
    m[(1, 0)] = Complex64::new(0.0, -s);
    m[(1, 1)] = Complex64::new(c, 0.0);
    m
}

pub fn ry_matrix(theta: f64) -> ComplexMatrix {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = Complex64::new(c, 0.0);
    m[(0, 1)] = Complex64::new(-s, 0.0);
    m[(1, 0)] = Complex64::new(s, 0.0);
    m[(1, 1)] = Complex64::new(c, 0.0);
    m
}

/// |up...up> on n qubits.
pub fn all_up(num_qubits: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

fn bit_of(index: usize, qubit: usize, num_qubits: usize) -> usize {
    (index >> (num_qubits - 1 - qubit)) & 1
}

/// Apply a 2x2 matrix to one qubit of the state.
fn apply_1q(state: &mut [Complex64], m: &ComplexMatrix, qubit: usize, num_qubits: usize) {
    let stride = 1 << (num_qubits - 1 - qubit);
    let n = state.len();
    let mut i = 0;
    while i < n {
        if (i / stride) % 2 == 0 {
            let a = state[i];
            let b = state[i + stride];
            state[i] = m[(0, 0)] * a + m[(0, 1)] * b;
            state[i + stride] = m[(1, 0)] * a + m[(1, 1)] * b;
        }
        i += 1;
    }
}

/// Apply a 4x4 matrix to an ordered qubit pair (q_hi is the high bit of the
/// gate's 2-qubit basis).
fn apply_2q(state: &mut [Complex64], m: &ComplexMatrix, q_hi: usize, q_lo: usize, num_qubits: usize) {
    let n = state.len();
    let s_hi = 1 << (num_qubits - 1 - q_hi);
    let s_lo = 1 << (num_qubits - 1 - q_lo);
    for base in 0..n {
        if base & s_hi == 0 && base & s_lo == 0 {
            let idx = [base, base + s_lo, base + s_hi, base + s_hi + s_lo];
            let amps: Vec<Complex64> = idx.iter().map(|&i| state[i]).collect();
            for (r, &i) in idx.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..4 {
                    acc += m[(r, c)] * amps[c];
                }
                state[i] = acc;
            }
        }
    }
}

fn apply_gate(state: &mut [Complex64], g: &Gate, num_qubits: usize) {
    match g {
        Gate::U3 { theta, phi, lambda, target } => {
            apply_1q(state, &u3_matrix(*theta, *phi, *lambda), *target, num_qubits)
        }
        Gate::Rx { theta, target } => apply_1q(state, &rx_matrix(*theta), *target, num_qubits),
        Gate::Ry { theta, target } => apply_1q(state, &ry_matrix(*theta), *target, num_qubits),
        Gate::TwoQ { matrix, targets } => {
            apply_2q(state, matrix, targets.0, targets.1, num_qubits)
        }
        Gate::Cnot { control, target } => {
            let n = state.len();
            let s_c = 1 << (num_qubits - 1 - control);
            let s_t = 1 << (num_qubits - 1 - target);
            for i in 0..n {
                if i & s_c != 0 && i & s_t == 0 {
                    state.swap(i, i | s_t);
                }
            }
        }
    }
}

fn norm(state: &[Complex64]) -> f64 {
    state.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Deterministic, noiseless statevector evolution.
pub fn run_statevector(c: &Circuit, initial: &[Complex64]) -> Result<Vec<Complex64>> {
    c.validate()?;
    let n = norm(initial);
    if (n - 1.0).abs() > 1e-10 {
        return Err(CircuitError::BadNorm(n));
    }
    let mut state = initial.to_vec();
    for g in &c.gates {
        apply_gate(&mut state, g, c.num_qubits);
    }
    Ok(state)
}

/// Born probabilities of the measured bits, marginalized over unmeasured
/// qubits. Outcome index packs measured bits in listed order, first listed
/// qubit as the most significant bit.
pub fn born_probabilities(state: &[Complex64], measure: &[usize], num_qubits: usize) -> Vec<f64> {
    let n_out = 1 << measure.len();
    let mut probs = vec![0.0f64; n_out];
    for (idx, amp) in state.iter().enumerate() {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let mut out = 0usize;
        for &q in measure {
            out = (out << 1) | bit_of(idx, q, num_qubits);
        }
        probs[out] += p;
    }
    probs
}

fn outcome_to_bits(out: usize, width: usize) -> String {
    (0..width)
        .map(|i| if (out >> (width - 1 - i)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Multinomial shot sampling from a fixed statevector, with optional
/// per-bit readout flips. Depolarizing noise lives in
/// [`run_circuit_counts`], which owns the gate sequence.
pub fn sample_counts(
    state: &[Complex64],
    measure: &[usize],
    num_qubits: usize,
    shots: u64,
    seed: u64,
    noise: NoiseConfig,
) -> Result<Counts> {
    if shots == 0 {
        return Err(CircuitError::ZeroShots);
    }
    noise.validate()?;
    let probs = born_probabilities(state, measure, num_qubits);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = measure.len();
    let mut histogram: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let out = sample_outcome(&probs, &mut rng);
        let out = apply_readout_flips(out, width, noise.readout_q, &mut rng);
        *histogram.entry(outcome_to_bits(out, width)).or_insert(0) += 1;
    }
    Ok(Counts { shots, histogram, seed })
}

fn sample_outcome(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn apply_readout_flips(out: usize, width: usize, q: f64, rng: &mut ChaCha8Rng) -> usize {
    if q == 0.0 {
        return out;
    }
    let mut flipped = out;
    for b in 0..width {
        if rng.gen::<f64>() < q {
            flipped ^= 1 << b;
        }
    }
    flipped
}

/// Run a circuit and sample counts. With depolarizing noise enabled each
/// shot runs its own trajectory with stochastic Pauli insertions after
/// every gate on every affected qubit.
pub fn run_circuit_counts(
    c: &Circuit,
    initial: &[Complex64],
    shots: u64,
    seed: u64,
    noise: NoiseConfig,
) -> Result<Counts> {
    if shots == 0 {
        return Err(CircuitError::ZeroShots);
    }
    noise.validate()?;
    if noise.depolarizing_p == 0.0 {
        let state = run_statevector(c, initial)?;
        return sample_counts(&state, &c.measure, c.num_qubits, shots, seed, noise);
    }
    c.validate()?;
    let n = norm(initial);
    if (n - 1.0).abs() > 1e-10 {
        return Err(CircuitError::BadNorm(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = c.measure.len();
    let mut histogram: BTreeMap<String, u64> = BTreeMap::new();
    let paulis = [crate::linalg::sigma_x(), crate::linalg::sigma_y(), crate::linalg::sigma_z()];
    for _ in 0..shots {
        let mut state = initial.to_vec();
        for g in &c.gates {
            apply_gate(&mut state, g, c.num_qubits);
            let affected: Vec<usize> = match g {
                Gate::U3 { target, .. } | Gate::Rx { target, .. } | Gate::Ry { target, .. } => {
                    vec![*target]
                }
                Gate::TwoQ { targets, .. } => vec![targets.0, targets.1],
                Gate::Cnot { control, target } => vec![*control, *target],
            };
            for q in affected {
                if rng.gen::<f64>() < noise.depolarizing_p {
                    let which = rng.gen_range(0..3);
                    apply_1q(&mut state, &paulis[which], q, c.num_qubits);
                }
            }
        }
        let probs = born_probabilities(&state, &c.measure, c.num_qubits);
        let out = sample_outcome(&probs, &mut rng);
        let out = apply_readout_flips(out, width, noise.readout_q, &mut rng);
        *histogram.entry(outcome_to_bits(out, width)).or_insert(0) += 1;
    }
    Ok(Counts { shots, histogram, seed })
}

/// Keep shots whose bit at `ancilla_pos` (0 = leftmost character) equals
/// `required`, strip that character, and report the surviving fraction.
pub fn post_select(c: &Counts, ancilla_pos: usize, required: u8) -> Result<(Counts, f64)> {
    let want = if required == 0 { '0' } else { '1' };
    let mut histogram: BTreeMap<String, u64> = BTreeMap::new();
    let mut kept = 0u64;
    for (bits, &count) in &c.histogram {
        let ch = bits.chars().nth(ancilla_pos).expect("ancilla position in range");
        if ch == want {
            kept += count;
            let stripped: String = bits
                .chars()
                .enumerate()
                .filter(|&(i, _)| i != ancilla_pos)
                .map(|(_, ch)| ch)
                .collect();
            *histogram.entry(stripped).or_insert(0) += count;
        }
    }
    if kept == 0 {
        return Err(CircuitError::PostSelectionFailed(ancilla_pos));
    }
    let fraction = kept as f64 / c.shots as f64;
    Ok((
        Counts {
            shots: kept,
            histogram,
            seed: c.seed,
        },
        fraction,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn u3_special_values() {
        let id = u3_matrix(0.0, 0.0, 0.0);
        assert!(id.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-15);
        let x = u3_matrix(PI, 0.0, PI);
        assert!(x.sub(&crate::linalg::sigma_x()).max_abs() < 1e-15);
        assert!(u3_matrix(0.3, 1.1, 2.2).is_unitary(1e-12));
        // U3(pi/2,0,0)|up> = (1,1)/sqrt(2).
        let h = u3_matrix(PI / 2.0, 0.0, 0.0);
        let v = h.apply(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let s = 1.0 / 2.0f64.sqrt();
        assert!((v[0].re - s).abs() < 1e-15);
        assert!((v[1].re - s).abs() < 1e-15);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(2);
        let out = run_statevector(&c, &all_up(2)).unwrap();
        assert!((out[0].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn x_gate_flips() {
        let mut c = Circuit::new(1);
        c.gates.push(Gate::U3 { theta: PI, phi: 0.0, lambda: PI, target: 0 });
        let out = run_statevector(&c, &all_up(1)).unwrap();
        assert!(out[0].norm() < 1e-15);
        assert!((out[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cnot_and_bit_order() {
        // X on qubit 0 then CNOT(0 -> 1): |11>, index 3.
        let mut c = Circuit::new(2);
        c.gates.push(Gate::U3 { theta: PI, phi: 0.0, lambda: PI, target: 0 });
        c.gates.push(Gate::Cnot { control: 0, target: 1 });
        let out = run_statevector(&c, &all_up(2)).unwrap();
        assert!((out[3].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_preserved_random_gates() {
        let mut c = Circuit::new(3);
        c.gates.push(Gate::U3 { theta: 0.7, phi: 1.1, lambda: 0.3, target: 0 });
        c.gates.push(Gate::Ry { theta: 1.9, target: 1 });
        c.gates.push(Gate::Cnot { control: 0, target: 2 });
        c.gates.push(Gate::Rx { theta: 2.3, target: 2 });
        let out = run_statevector(&c, &all_up(3)).unwrap();
        assert!((norm(&out) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn malformed_circuit_rejected() {
        let mut c = Circuit::new(1);
        c.gates.push(Gate::Rx { theta: 0.1, target: 3 });
        assert!(matches!(
            run_statevector(&c, &all_up(1)),
            Err(CircuitError::BadTarget(3, 1))
        ));
    }

    #[test]
    fn deterministic_counts_all_up() {
        let state = all_up(1);
        let counts = sample_counts(&state, &[0], 1, 100_000, 42, NoiseConfig::noiseless()).unwrap();
        assert_eq!(counts.get("0"), 100_000);
    }

    #[test]
    fn plus_state_frequency() {
        let s = 1.0 / 2.0f64.sqrt();
        let state = vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)];
        let counts = sample_counts(&state, &[0], 1, 100_000, 7, NoiseConfig::noiseless()).unwrap();
        let f = counts.get("0") as f64 / 100_000.0;
        // 6 sigma ~ 0.0095 for p = 0.5.
        assert!((f - 0.5).abs() < 0.01, "f = {f}");
    }

    #[test]
    fn readout_noise_rate() {
        let state = all_up(1);
        let noise = NoiseConfig { depolarizing_p: 0.0, readout_q: 0.1 };
        let counts = sample_counts(&state, &[0], 1, 100_000, 11, noise).unwrap();
        let f = counts.get("1") as f64 / 100_000.0;
        assert!((f - 0.1).abs() < 0.006, "f = {f}");
    }

    #[test]
    fn sampling_reproducible() {
        let s = 1.0 / 2.0f64.sqrt();
        let state = vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)];
        let a = sample_counts(&state, &[0], 1, 10_000, 99, NoiseConfig::noiseless()).unwrap();
        let b = sample_counts(&state, &[0], 1, 10_000, 99, NoiseConfig::noiseless()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn depolarizing_trajectories_reproducible_and_noisy() {
        let mut c = Circuit::new(1);
        c.gates.push(Gate::Ry { theta: 0.0, target: 0 });
        c.measure = vec![0];
        let noise = NoiseConfig { depolarizing_p: 0.2, readout_q: 0.0 };
        let a = run_circuit_counts(&c, &all_up(1), 10_000, 5, noise).unwrap();
        let b = run_circuit_counts(&c, &all_up(1), 10_000, 5, noise).unwrap();
        assert_eq!(a, b);
        // Depolarizing on |up>: X or Y flips with prob 2/3 * 0.2.
        let f = a.get("1") as f64 / 10_000.0;
        assert!((f - 0.2 * 2.0 / 3.0).abs() < 0.02, "f = {f}");
    }

    #[test]
    fn post_select_basic() {
        let mut histogram = BTreeMap::new();
        histogram.insert("00".to_string(), 400);
        histogram.insert("01".to_string(), 100);
        histogram.insert("10".to_string(), 300);
        histogram.insert("11".to_string(), 200);
        let counts = Counts { shots: 1000, histogram, seed: 0 };
        let (kept, frac) = post_select(&counts, 0, 0).unwrap();
        assert_eq!(kept.get("0"), 400);
        assert_eq!(kept.get("1"), 100);
        assert_eq!(kept.shots, 500);
        assert!((frac - 0.5).abs() < 1e-15);
    }

    #[test]
    fn post_select_all_rejected() {
        let mut histogram = BTreeMap::new();
        histogram.insert("10".to_string(), 10);
        histogram.insert("11".to_string(), 10);
        let counts = Counts { shots: 20, histogram, seed: 0 };
        assert!(matches!(
            post_select(&counts, 0, 0),
            Err(CircuitError::PostSelectionFailed(0))
        ));
    }

    #[test]
    fn zero_shots_rejected() {
        let state = all_up(1);
        assert!(matches!(
            sample_counts(&state, &[0], 1, 0, 0, NoiseConfig::noiseless()),
            Err(CircuitError::ZeroShots)
        ));
    }
}
