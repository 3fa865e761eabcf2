//! Fire-pixel detection in still images with colour conversion matrices.
//!
//! * [`training`] builds a 40×40 feature matrix from a sample image and runs
//!   a particle swarm search for the 3×3 matrix that best preserves the
//!   fire/background K-medoids split ([`clustering`]).
//! * [`pipeline`] holds the two detectors: a linear one (gamma, one matrix,
//!   Otsu) and a two-stage one with a white-pixel rescue path.
//! * [`evaluation`] scores masks against ground truth (FPR, FNR, F-score).
//! * [`cli`] wires these into the `flamelens` binary.

pub mod cli;
pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod imaging;
pub mod pipeline;
pub mod training;

pub use error::{Error, Result};
pub use imaging::{BinaryMask, ConvertedImage, GrayImage, RgbImage};
pub use pipeline::{detect_linear, detect_nonlinear, Method, PipelineConfig};
pub use training::{ConversionMatrix, PsoConfig};
