use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root finder did not converge for degree {degree} polynomial (residual {residual:e})")]
    RootsNotConverged {
        degree: usize,
        residual: f64,
        best: Vec<Complex64>,
    },

    #[error("f has a repeated factor (discriminant vanishes identically)")]
    RepeatedFactor,

    #[error("curve is not generic: {0}")]
    NotGeneric(String),

    #[error("no generic perturbation found with |eps| <= {budget:e} after {tried} trials: {last_failure}")]
    PerturbationExhausted {
        budget: f64,
        tried: usize,
        last_failure: String,
    },

    #[error("branch points {a} and {b} closer than separation floor {floor:e}")]
    Degenerate {
        a: Complex64,
        b: Complex64,
        floor: f64,
    },

    #[error("path comes within {distance:e} of branch point {point}, below clearance floor {floor:e}")]
    ClearanceViolation {
        point: Complex64,
        distance: f64,
        floor: f64,
    },

    #[error("path too close to B or to B+ tangency: step underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("root matching ambiguous near t = {t}")]
    MatchingAmbiguity { t: f64 },

    #[error("adjacent crossings could not be separated near t = {t}")]
    SimultaneousCrossing { t: f64 },

    #[error("lollipop circles of radius {radius} collide; maximum feasible radius is {max_feasible}")]
    InfeasibleRadius { radius: f64, max_feasible: f64 },

    #[error("circle around target {target} produced {count} crossings, expected exactly 1")]
    CircleEventCount { target: usize, count: usize },

    #[error("circle around target {target} produced a negative crossing (sign convention violated)")]
    NegativeCircleSign { target: usize },

    #[error("return arc for target {target} does not undo the outgoing arc: out `{out}`, back `{back}`")]
    ArcMismatch {
        target: usize,
        out: String,
        back: String,
    },

    #[error("B+ graph is unreliable near {point} (flagged or excluded cell)")]
    GraphUnreliable { point: Complex64 },

    #[error("no verified loop for generator s{k}; candidate words: {words:?}")]
    TemplatesExhausted { k: usize, words: Vec<String> },

    #[error("verification mismatch: expected `{expected}`, monodromy gave `{got}`")]
    VerificationMismatch { expected: String, got: String },
}

impl Error {
    /// Errors caused by malformed or out-of-contract input, as opposed to
    /// numerical failures during a computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::RepeatedFactor
                | Error::InfeasibleRadius { .. }
                | Error::ClearanceViolation { .. }
        )
    }
}
