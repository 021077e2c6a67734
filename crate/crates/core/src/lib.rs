//! Quantum-circuit ground-state preparation and quantum-geometry extraction
//! for two-band lattice models, with a non-Abelian extension for degenerate
//! band pairs.
//!
//! Modules, roughly bottom-up:
//! - [`linalg`]: dense complex matrices, Hermitian eigensolves, QR, PSD roots.
//! - [`model`]: the two-band lattice Hamiltonian, exact eigenstates, and
//!   independent finite-difference oracles for the geometric tensor.
//! - [`circuit`]: statevector simulation, shot sampling, noise channels,
//!   and ancilla post-selection.
//! - [`tomography`]: single-qubit Pauli tomography and projector
//!   reconstruction with purification and readout mitigation.
//! - [`vqa`]: variational ground-state preparation with a single U3 ansatz.
//! - [`ite`]: imaginary-time evolution embedded in an enlarged unitary.
//! - [`qgt`]: metric/curvature extraction from projectors and Chern
//!   integration.
//! - [`nonabelian`]: the matrix-valued tensor over twofold-degenerate
//!   subspaces.
//! - [`sweep`]: grid orchestration, serialization, and validation suites.

pub mod circuit;
pub mod ite;
pub mod linalg;
pub mod model;
pub mod nonabelian;
pub mod qgt;
pub mod sweep;
pub mod tomography;
pub mod vqa;
