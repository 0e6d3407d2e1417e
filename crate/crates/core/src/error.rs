use thiserror::Error;

/// Errors produced anywhere in the level-lines pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("point ({x}, {y}) lies outside the image domain")]
    Domain { x: f64, y: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("level {level} is critical; nudge it before extracting level lines")]
    CriticalLevel { level: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("level lines {a} and {b} cross")]
    Crossing { a: u32, b: u32 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("flow did not reach t = {target} after {steps} steps (stopped at t = {partial_time})")]
    Timeout {
        steps: usize,
        target: f64,
        partial_time: f64,
        /// Vertices of the last polygon reached, as `(x, y)` pairs.
        partial_vertices: Vec<(f64, f64)>,
    },

    #[error("{} curve(s) failed to evolve; first: curve {}: {}", .0.len(), .0[0].0, .0[0].1)]
    Family(Vec<(usize, Error)>),

    #[error("{stage}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn format(offset: usize, message: impl Into<String>) -> Self {
        Error::Format { offset, message: message.into() }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Process exit code for the command-line driver.
    ///
    /// 2 format, 3 geometry, 4 numerical, 5 timeout, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Format { .. } | Error::Io(_) => 2,
            Error::Domain { .. } | Error::Geometry(_) | Error::Crossing { .. } => 3,
            Error::Numerical(_) | Error::CriticalLevel { .. } => 4,
            Error::Timeout { .. } => 5,
            Error::Parameter(_) => 1,
            Error::Family(errs) => errs.first().map_or(1, |(_, e)| e.exit_code()),
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
