use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("qubit count {0} outside supported range 1..=12")]
    BadQubitCount(usize),
    #[error("not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("state norm is {0}, expected 1")]
    NotNormalized(f64),
    #[error("target purity {target} unreachable: feasible range is ({lo:.6}, {hi:.6}]")]
    UnreachablePurity { target: f64, lo: f64, hi: f64 },
    #[error("degenerate input: residual norm {0:.3e} after orthogonal projection")]
    DegenerateInput(f64),
    #[error("resonant drive (nu = 0) admits no inverse map")]
    SingularParameter,
    #[error("drive amplitude must be positive (got {0})")]
    BadAmplitude(f64),
    #[error("harmonic overflow: |coefficient| {0:.3e} beyond supported order {1}")]
    HarmonicOverflow(f64, i32),
    #[error("outcome probabilities sum to {0}, expected 1")]
    BadProbabilities(f64),
    #[error("probability entry {value:.3e} at outcome {index} below tolerance")]
    NegativeProbability { index: usize, value: f64 },
    #[error("experiment needs at least two unitaries (got {0})")]
    TooFewUnitaries(usize),
    #[error("need at least two matrices for the pair sum (got {0})")]
    TooFewMatrices(usize),
    #[error("empty run log")]
    EmptyLog,
    #[error("degenerate frequency set: combination {0:?} gives zero")]
    DegenerateFrequencies(Vec<i8>),
    #[error("frequency combination is zero for a-b != i-j: configuration not invertible")]
    NonInvertibleFrequencies,
    #[error("regression grid too degenerate (condition number {0:.3e})")]
    GridTooDegenerate(f64),
    #[error("exact contraction limited to N <= {limit} (got N = {got})")]
    ContractionTooLarge { limit: usize, got: usize },
    #[error("singular linear system")]
    SingularSystem,
    #[error("quadrature failed to converge (estimated error {0:.3e})")]
    QuadratureDiverged(f64),
    #[error("qubit index {0} out of range for {1} qubits")]
    QubitIndexOutOfRange(usize, usize),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 for validation problems, 2 for
    /// runtime or numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::BadQubitCount(_)
            | Error::BadAmplitude(_)
            | Error::UnreachablePurity { .. }
            | Error::TooFewUnitaries(_)
            | Error::QubitIndexOutOfRange(..)
            | Error::DimensionMismatch { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
