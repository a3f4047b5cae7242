//! Crate-wide error type and result alias.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write output {path}: {source}")]
    CannotWriteOutput {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Wraps an error with the file it came from.
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    /// Wraps an error with the file and line it came from.
    #[error("{path}:{line}: {source}")]
    AtLine {
        path: PathBuf,
        line: usize,
        #[source]
        source: Box<Error>,
    },

    /// Wraps an error with the extrapolation window that triggered it.
    #[error("sweep failed at ew={ew}: {source}")]
    AtWindow {
        ew: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid pgm: {0}")]
    MalformedPgm(String),

    #[error("non-contiguous sequence: missing frame index {missing} in {dir}")]
    NonContiguousSequence { dir: PathBuf, missing: usize },

    #[error("inconsistent frame size: got {got_w}x{got_h}, expected {want_w}x{want_h}")]
    InconsistentFrameSize {
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },

    #[error("empty sequence: no frame_*.pgm files in {dir}")]
    EmptySequence { dir: PathBuf },

    #[error("degenerate box: width and height must be positive (got {w}x{h})")]
    DegenerateBox { w: u32, h: u32 },

    #[error("index out of range: frame {index} not below frame count {count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("invalid score: {0} outside [0,1]")]
    InvalidScore(f64),

    #[error("malformed line: {0}")]
    MalformedLine(String),

    #[error("degenerate polygon: points are collinear")]
    DegeneratePolygon,

    #[error("displacement out of bounds: block at ({x},{y}) displaced by ({dx},{dy})")]
    DisplacementOutOfBounds { x: u32, y: u32, dx: i32, dy: i32 },

    #[error("frame size mismatch: {prev_w}x{prev_h} vs {curr_w}x{curr_h}")]
    FrameSizeMismatch {
        prev_w: u32,
        prev_h: u32,
        curr_w: u32,
        curr_h: u32,
    },

    #[error("frame too small: {w}x{h} cannot hold one {block}x{block} block")]
    FrameTooSmall { w: u32, h: u32, block: u32 },

    #[error(
        "oracle/sequence length mismatch: oracle covers {oracle} frames, sequence has {frames}"
    )]
    OracleLengthMismatch { oracle: usize, frames: usize },

    #[error("frame mismatch: prediction set is for frame {pred}, truth set for frame {truth}")]
    FrameMismatch { pred: usize, truth: usize },

    #[error("track length mismatch: {result} result frames vs {truth} truth frames")]
    TrackLengthMismatch { result: usize, truth: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Strips context wrappers and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::InFile { source, .. }
            | Error::AtLine { source, .. }
            | Error::AtWindow { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code: 2 for I/O failures, 1 for validation errors.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Io { .. } | Error::CannotWriteOutput { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Error {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn at_line(self, path: impl Into<PathBuf>, line: usize) -> Error {
        Error::AtLine {
            path: path.into(),
            line,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_window(self, ew: usize) -> Error {
        Error::AtWindow {
            ew,
            source: Box::new(self),
        }
    }
}
