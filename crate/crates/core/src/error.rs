use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("map is not loxodromic (|q| = {modulus:.3e} is not below 1 - 1e-9)")]
    NotLoxodromic { modulus: f64 },
    #[error("fixed points coincide or are too close ({0})")]
    DegenerateFixedPoints(String),
    #[error("map fixes infinity; isometric circle undefined")]
    FixesInfinity,
    #[error("letter {letter} out of range for rank {rank}")]
    BadLetter { letter: i32, rank: usize },
    #[error("word is not cyclically reduced")]
    NotCyclicallyReduced,
    #[error("fundamental circles overlap (margin {margin:.3e})")]
    CirclesOverlap { margin: f64 },
    #[error("no valid radius found for the concentric circle pair")]
    NoValidRadius,
    #[error("fundamental circles are required for this operation")]
    CirclesRequired,
    #[error("operation requires genus at least 2, got {0}")]
    GenusTooSmall(usize),
    #[error("evaluation point within {distance:.3e} of a pole")]
    PoleTooClose { distance: f64 },
    #[error("quadrature did not converge after {nodes} nodes (last change {change:.3e})")]
    NoConvergence { nodes: usize, change: f64 },
    #[error("pairing matrix is singular (condition number {condition:.3e})")]
    SingularPairing { condition: f64 },
    #[error("fit failed: {0}")]
    FitFailed(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("exact division failed: {0}")]
    NotDivisible(String),
    #[error("invalid group spec: {0}")]
    InvalidSpec(String),
}
