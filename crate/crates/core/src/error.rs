use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the profiling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unreadable file {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },
    #[error("unsupported bit depth in {path}: {depth}")]
    UnsupportedBitDepth { path: PathBuf, depth: String },
    #[error("zero-area image")]
    ZeroAreaImage,
    #[error("image buffer has {got} values, expected {expected}")]
    ImageSizeMismatch { expected: usize, got: usize },
    #[error("degenerate histogram: image has a single intensity")]
    DegenerateHistogram,
    #[error("no particle found")]
    NoParticle,
    #[error("contour degenerate")]
    ContourDegenerate,
    #[error("centroid exterior: centroid pixel is not foreground")]
    CentroidExterior,
    #[error("harmonic out of range: {requested} (limit {limit})")]
    HarmonicOutOfRange { requested: usize, limit: usize },
    #[error("profile must be normalized")]
    ProfileNotNormalized,
    #[error("degenerate first harmonic")]
    DegenerateFirstHarmonic,
    #[error("invalid (n,m) = ({n},{m})")]
    InvalidZernikeIndex { n: usize, m: i64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("rank-deficient input: requested {requested} components, rank is {rank}")]
    RankDeficient { requested: usize, rank: usize },
    #[error("degenerate component")]
    DegenerateComponent,
    #[error("zero centroid separation")]
    ZeroCentroidSeparation,
    #[error("zero within-cluster dispersion")]
    ZeroWithinDispersion,
    #[error("grid mismatch: expected {expected} points, got {got}")]
    GridMismatch { expected: usize, got: usize },
    #[error("exemplar set too large: {n} items exceeds budget {budget}")]
    ExemplarSetTooLarge { n: usize, budget: usize },
    #[error("invalid fractions: N_k = {n_k} exceeds N_r = {n_r}")]
    InvalidFractions { n_r: usize, n_k: usize },
    #[error("no input images in {0}")]
    NoInputImages(PathBuf),
    #[error("too few particles: {got} (need at least {need})")]
    TooFewParticles { got: usize, need: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code: 2 config, 3 input, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            Config(_) | InvalidArgument(_) | InvalidFractions { .. } | Json(_) => 2,
            UnreadableFile { .. }
            | UnsupportedBitDepth { .. }
            | ZeroAreaImage
            | ImageSizeMismatch { .. }
            | NoInputImages(_)
            | TooFewParticles { .. }
            | NoParticle
            | Io(_) => 3,
            _ => 4,
        }
    }
}
