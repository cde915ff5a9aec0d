use std::io;

/// Errors produced by the simulator and its numerical kernels.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A rank-deficient or ill-conditioned channel draw. Measure-zero under
    /// the Gaussian channel law; callers redraw.
    #[error("degenerate channel draw")]
    DegenerateChannel,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("argument {z} outside the domain of Lambert W branch {branch}")]
    LambertDomain { branch: i32, z: f64 },
    #[error("K = {k} is below the validity range of the Lambert threshold")]
    TooFewUsers { k: u64 },
    #[error("bit budget {0} cannot be split evenly between two vectors")]
    OddBitSplit(u32),
    #[error("bit count {0} overflows the 64-bit FLOP counter")]
    BitsOverflow(u32),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownExperiment(_) | Error::Config(_) => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
