//! Kernel and operator sources bundled with the crate: the worked examples
//! used by tests, the acceptance suite, the CLI and the benchmarks.

pub const BELL: &str = include_str!("../kernels/bell.qk");
/// Kernels `a`..`d` with `d -> {b, c}` and `c -> a`.
pub const DAG: &str = include_str!("../kernels/dag.qk");
pub const CCNOT: &str = include_str!("../kernels/ccnot.qk");
/// `ucc1` (compute/action) and `kernel`, which controls it.
pub const UCC1: &str = include_str!("../kernels/ucc1.qk");
pub const GROVER: &str = include_str!("../kernels/grover.qk");
pub const DEUTERON_ANSATZ: &str = include_str!("../kernels/deuteron.qk");
pub const TROTTER: &str = include_str!("../kernels/trotter.qk");
/// Three-qubit repetition-code correction with one ancilla.
pub const QEC: &str = include_str!("../kernels/qec.qk");

/// Two-qubit deuteron Hamiltonian in Pauli form.
pub const DEUTERON_H: &str = include_str!("../kernels/deuteron.op");
/// The same Hamiltonian written with fermionic ladder operators.
pub const DEUTERON_FERMION_H: &str = include_str!("../kernels/deuteron_fermion.op");
/// Four-qubit molecular hydrogen Hamiltonian.
pub const H2: &str = include_str!("../kernels/h2.op");

/// Every bundled kernel file with a short name.
pub const KERNEL_FILES: [(&str, &str); 8] = [
    ("bell", BELL),
    ("dag", DAG),
    ("ccnot", CCNOT),
    ("ucc1", UCC1),
    ("grover", GROVER),
    ("deuteron", DEUTERON_ANSATZ),
    ("trotter", TROTTER),
    ("qec", QEC),
];
