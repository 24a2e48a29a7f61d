use thiserror::Error;

/// A complex point as `(re, im)` carried by diagnostics.
pub type Point = (f64, f64);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("evaluation error at ({}, {}): {reason}", .point.0, .point.1)]
    Evaluation { point: Point, reason: String },

    #[error("zero suspected on contour at ({}, {})", .point.0, .point.1)]
    ZeroOnContour { point: Point },

    #[error("no convergence: {0}")]
    Nonconvergence(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("map inversion failed at ({}, {}): {reason}", .point.0, .point.1)]
    MapInversion { point: Point, reason: String },

    #[error("ill-conditioned polynomial basis: {0}")]
    Conditioning(String),

    #[error("degree limit {max_degree} reached; best fit error {best_error:e} (target {target:e})")]
    DegreeExceeded {
        max_degree: usize,
        best_error: f64,
        target: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
