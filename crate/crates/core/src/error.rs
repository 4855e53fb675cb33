use thiserror::Error;

/// Which kind of polyline an invalid-geometry error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopKind {
    Outer,
    Hole,
    Slit,
}

impl std::fmt::Display for LoopKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LoopKind::Outer => "outer loop",
            LoopKind::Hole => "hole loop",
            LoopKind::Slit => "slit",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry in {kind} {index}: {reason}")]
    InvalidGeometry {
        kind: LoopKind,
        index: usize,
        reason: String,
    },

    #[error("resolution too coarse: h = {h} is not below the narrowest feature clearance {clearance}")]
    ResolutionTooCoarse { h: f64, clearance: f64 },

    #[error("mask has no inside nodes")]
    EmptyMask,

    #[error("point set is empty")]
    EmptySet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {})", residual_history.last().copied().unwrap_or(f64::NAN))]
    NonConvergence {
        iterations: usize,
        residual_history: Vec<f64>,
    },

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("trial function vanishes identically")]
    ZeroTrial,

    #[error("no feasible point found within a budget of {budget} evaluations")]
    NoFeasiblePoint {
        budget: usize,
        history: Vec<crate::optimizer::Evaluation>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
