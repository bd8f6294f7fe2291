use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty sequence")]
    EmptySequence,

    #[error("{axis} band upper limit {high} exceeds Nyquist limit {nyquist}")]
    BandExceedsNyquist {
        axis: &'static str,
        high: f64,
        nyquist: f64,
    },

    #[error("frequency band selects no spectral bins for the given resolution")]
    EmptyBand,

    #[error("malformed field file header: {0}")]
    MalformedHeader(String),

    #[error("frame {frame} has dimensions {got_w}x{got_h}, expected {expected_w}x{expected_h}")]
    FrameDimensionMismatch {
        frame: usize,
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },

    #[error("clipped fraction {fraction:.4} exceeds threshold {threshold:.4}")]
    ClipThresholdExceeded { fraction: f64, threshold: f64 },

    #[error("reflectance compensation requested but no reflectance map supplied")]
    MissingReflectance,

    #[error("degenerate psychometric data: {0}")]
    DegenerateData(String),

    #[error("invalid stimulus level {0} cm")]
    InvalidLevel(f64),

    #[error("segment length is not an integer number of frames at {fps} fps")]
    NonIntegerSegment { fps: f64 },

    #[error("frame {index}: {source}")]
    AtFrame {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("image error at {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn at_frame(index: usize) -> impl FnOnce(Error) -> Error {
        move |e| Error::AtFrame {
            index,
            source: Box::new(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(expected: (usize, usize), got: (usize, usize)) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            expected_w: expected.0,
            expected_h: expected.1,
            got_w: got.0,
            got_h: got.1,
        });
    }
    Ok(())
}
