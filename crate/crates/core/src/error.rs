use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("truncation window too small: clamp-point deviation {deviation:e} exceeds {limit:e}")]
    WindowTooSmall { deviation: f64, limit: f64 },

    #[error("periodic minimizer is degenerate (smallest Hessian eigenvalue {eigenvalue:e}); no isolated minimizers exist")]
    DegenerateMinimizer { eigenvalue: f64 },

    #[error("complementary interval around xi = {xi} could not be bracketed")]
    UnresolvedGap { xi: f64 },

    #[error("orbit left the lift bound {bound:e} after {steps} steps")]
    Overflow { steps: usize, bound: f64 },

    #[error("dimension {0} is not supported")]
    Unsupported(usize),

    #[error("bump support half-width {half_width} does not fit in one period")]
    SupportTooWide { half_width: f64 },

    #[error("trigonometric degree {degree} exceeds the coefficient cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },

    #[error("grid of {points} points along axis {axis} is too coarse for order {order} (need {required})")]
    GridTooCoarse {
        axis: usize,
        points: usize,
        order: usize,
        required: usize,
    },

    #[error("ball of radius {radius} does not fit inside the negative orthant cell")]
    BallDoesNotFit { radius: f64 },

    #[error("field mean {mean:e} is not zero; the Poisson problem has no periodic solution")]
    NonzeroMean { mean: f64 },

    #[error("circle map lift is not strictly increasing (min slope {min_slope})")]
    NotMonotone { min_slope: f64 },

    #[error("adaptive quadrature failed: error estimate {estimate:e} above tolerance {tolerance:e}")]
    QuadratureFailure { estimate: f64, tolerance: f64 },

    #[error("target {target} is outside the invertible bracket")]
    OutOfBracket { target: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
