use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    EmptyRaster,
    DataLength { expected: usize, actual: usize },
    NonFinite { index: usize },
    SampleOutOfRange { index: usize, value: f64 },
    NonPositiveDepth { index: usize, value: f64 },
    DepthAboveCap { index: usize, value: f64, cap: f64 },
    InvalidCamera(&'static str),
    InvalidWindow(usize),
    DimensionMismatch { expected: (usize, usize), actual: (usize, usize) },
    InvalidThreshold(f64),
    TooFewBins(usize),
    NegativeRadius(f64),
    InvalidTruncation(f64),
    NoValidPixels,
    EmptyScores,
    NegativeLoss { term: &'static str, value: f64 },
    TooFewSamples(usize),
    ZeroVariance,
    InvalidBandwidth(f64),
    InvalidGrid,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyRaster => f.write_str("raster width and height must both be at least 1"),
            Error::DataLength { expected, actual } => {
                write!(f, "raster data has {actual} samples, expected {expected}")
            }
            Error::NonFinite { index } => write!(f, "sample {index} is not finite"),
            Error::SampleOutOfRange { index, value } => {
                write!(f, "sample {index} = {value} lies outside [0, 1]")
            }
            Error::NonPositiveDepth { index, value } => {
                write!(f, "depth at pixel {index} is {value}, depths must be > 0")
            }
            Error::DepthAboveCap { index, value, cap } => {
                write!(f, "depth at pixel {index} is {value} m, above the {cap} m cap")
            }
            Error::InvalidCamera(what) => write!(f, "invalid camera parameters: {what}"),
            Error::InvalidWindow(w) => {
                write!(f, "window size {w} is invalid, the window must be an odd integer >= 1")
            }
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {}x{}, got {}x{}", expected.0, expected.1, actual.0, actual.1)
            }
            Error::InvalidThreshold(t) => write!(f, "threshold {t} outside [0, 1)"),
            Error::TooFewBins(n) => write!(f, "{n} bins requested, at least 2 are required"),
            Error::NegativeRadius(r) => write!(f, "blur radius {r} is negative"),
            Error::InvalidTruncation(t) => write!(f, "kernel truncation {t} must be > 0"),
            Error::NoValidPixels => f.write_str("no valid pixels to aggregate over"),
            Error::EmptyScores => f.write_str("at least one discriminator score is required"),
            Error::NegativeLoss { term, value } => write!(f, "loss term {term} = {value} is negative"),
            Error::TooFewSamples(n) => write!(f, "{n} samples given, at least 2 are required"),
            Error::ZeroVariance => f.write_str("samples have zero variance"),
            Error::InvalidBandwidth(h) => write!(f, "bandwidth {h} must be finite and > 0"),
            Error::InvalidGrid => f.write_str("evaluation grid must be nonempty, finite and strictly increasing"),
        }
    }
}

impl core::error::Error for Error {}
