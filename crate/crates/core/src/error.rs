use crate::circular::Axis;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite angle {value} at position {index}")]
    InvalidAngle { index: usize, value: f64 },

    #[error("tied {axis} values at rows {indices:?}")]
    TiesPresent { axis: Axis, indices: Vec<usize> },

    #[error("sample size {n} is too small (need at least {min})")]
    SampleTooSmall { n: usize, min: usize },

    #[error("x and y have different lengths ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },

    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("{axis} cut at {cut} coincides with observation {index}")]
    CutOnDatum { axis: Axis, cut: f64, index: usize },

    #[error("exact enumeration requested for n = {n}, limit is {max}")]
    EnumerationTooLarge { n: usize, max: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
