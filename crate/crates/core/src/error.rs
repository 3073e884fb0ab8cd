use thiserror::Error;

/// Errors raised by the flow computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("field is singular at ({x}, {y})")]
    SingularPoint { x: f64, y: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("start point ({x}, {y}) lies inside the core exclusion radius {core_radius}")]
    InvalidStart { x: f64, y: f64, core_radius: f64 },

    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error(
        "no separatrix branch returned to the saddle: closest approach {closest_approach:e} \
         exceeds tolerance {tolerance:e}"
    )]
    HomoclinicNotClosed {
        closest_approach: f64,
        tolerance: f64,
    },
}

pub type Result<T> = std::result::Result<T, FlowError>;
