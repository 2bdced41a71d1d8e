use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("non-manifold edge ({0}, {1}) used by {2} triangle(s)")]
    NonManifoldEdge(usize, usize, usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("zero pivot at row {0} after dropping")]
    SingularPivot(usize),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitRange { index: usize, n: usize },
    #[error("gate controls overlap targets")]
    ControlOverlap,
    #[error("HHL postselection failed after {0} attempts")]
    Postselection(usize),
    #[error("eigenvalue {0} outside the phase-estimation range")]
    PhaseWrap(f64),
    #[error("exterior step {step}: inner solver failed: {source}")]
    InnerSolve {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
