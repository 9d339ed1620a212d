use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("seeding vector has zero norm")]
    ZeroSeed,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator fails the hermiticity spot-check (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("operator is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("Verblunsky coefficient {index} left the unit disk: |alpha| = {modulus}")]
    OutsideUnitDisk { index: usize, modulus: f64 },
    #[error("empty coefficient sequence")]
    EmptySequence,
    #[error("sequence is not closed: last |alpha| = {modulus}, expected 1")]
    NotClosed { modulus: f64 },
    #[error("moment matrix is singular at order {order}")]
    SingularMoments { order: usize },
    #[error("coefficient {index} is not real (imaginary part {imag:.3e})")]
    ComplexCoefficient { index: usize, imag: f64 },
    #[error("eigenphase at the branch cut (phase {phase})")]
    BranchAmbiguity { phase: f64 },
    #[error(
        "modified inner product is not positive definite (min eigenvalue {min_eigenvalue:.3e})"
    )]
    IndefiniteWeight { min_eigenvalue: f64 },
    #[error("symmetry does not commute with the evolution (deviation {deviation:.3e})")]
    SymmetryViolated { deviation: f64 },
    #[error("odd site count {0}; an even number of sites is required")]
    OddSiteCount(usize),
    #[error("Krylov dimension {krylov_dim} does not fit into {qubits} qubits")]
    CircuitTooSmall { krylov_dim: usize, qubits: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
