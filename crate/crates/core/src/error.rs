use thiserror::Error;

/// Errors raised by the disc-geometry, evaluation, and measure routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {re} + {im}i lies outside the open unit disc")]
    OutsideDisc { re: f64, im: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tail budget exceeded: truncation error bound {bound:e} > allowance {budget:e}")]
    TailBudgetExceeded { bound: f64, budget: f64 },

    #[error("boundary derivative term overflows: zero {index} sits on the ray of the boundary point")]
    ZeroOnRay { index: usize },

    #[error("ill-conditioned evaluation within {distance:e} of the singular point")]
    IllConditioned { distance: f64 },

    #[error("refinement depth limit {limit} reached")]
    DepthLimit { limit: u32 },

    #[error("supremum attained at the largest level {lambda_max:e}; extend the level grid")]
    RangeTooNarrow { lambda_max: f64 },

    #[error("angular quadrature stalled at {points} points (relative change {change:e})")]
    QuadratureStall { points: usize, change: f64 },

    #[error("examined depth {depth} cannot distinguish the zero-sequence class")]
    InconclusiveDepth { depth: usize },

    #[error("function evaluation failed: {0}")]
    Evaluation(String),

    #[error("zero-sequence file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
