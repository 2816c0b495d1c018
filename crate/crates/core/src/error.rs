use std::fmt;

use thiserror::Error;

/// Width and height of a raster, used in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    pub width: u32,
    pub height: u32,
}

impl fmt::Display for Dimensions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot decode image: {0}")]
    UndecodableImage(String),

    #[error("pixel ({x}, {y}) has value {value:#08x} with bits {unknown:#08x} matching no class")]
    UnknownBits { x: u32, y: u32, value: u32, unknown: u32 },

    #[error("ground truth pixel ({x}, {y}) carries no label")]
    EmptyGroundTruthPixel { x: u32, y: u32 },

    #[error("dimension mismatch: ground truth is {ground_truth}, prediction is {prediction}")]
    DimensionMismatch {
        ground_truth: Dimensions,
        prediction: Dimensions,
    },

    #[error("invalid class registry: {0}")]
    InvalidRegistry(String),

    #[error("invalid label image: {0}")]
    InvalidImage(String),

    #[error("{values} values do not align with {classes} class frequencies")]
    MisalignedClasses { values: usize, classes: usize },

    #[error("invalid palette: {0}")]
    InvalidPalette(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
