use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("operator is not Hermitian (max imaginary coefficient {0:.3e})")]
    NotHermitian(f64),
    #[error("QUBO matrix is not symmetric (max asymmetry {0:.3e})")]
    AsymmetricQubo(f64),
    #[error("problem size {0} exceeds limit {1}")]
    SizeLimit(usize, usize),
    #[error("partition depth {eta} too deep for {n_qubits} qubits")]
    PartitionTooDeep { eta: u32, n_qubits: usize },
    #[error("shots must be >= 1")]
    ZeroShots,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("Markov chain is not row-stochastic (row {row} sums to {sum})")]
    NotStochastic { row: usize, sum: f64 },
    #[error("Markov chain violates detailed balance (residual {0:.3e})")]
    NotReversible(f64),
    #[error("electron count {n_electrons} exceeds {n_spin_orbitals} spin-orbitals")]
    TooManyElectrons {
        n_electrons: usize,
        n_spin_orbitals: usize,
    },
    #[error("pool generator {0} fails the G^3 = -G precondition")]
    BadGgaGenerator(usize),
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
