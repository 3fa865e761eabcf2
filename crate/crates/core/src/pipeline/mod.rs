//! Fire-pixel detectors built from per-channel gamma, a conversion matrix
//! and Otsu binarization.
//!
//! * [`detect_linear`]: one enhance/convert/threshold pass with the
//!   colour-differentiating matrix.
//! * [`detect_nonlinear`]: a first pass with the flame-highlighting matrix
//!   selects candidates, a second pass on the masked image prunes them, and
//!   pixels the first pass turned white are kept regardless.

pub mod morphology;
pub mod otsu;

use serde::{Deserialize, Serialize};

pub use morphology::morph_close;
pub use otsu::{otsu_threshold, OtsuResult};

use crate::error::{Error, Result};
use crate::imaging::{clamp_to_gray, BinaryMask, ConvertedImage, RgbImage};
use crate::training::ConversionMatrix;

/// Per-channel exponents: `(r, g, b) -> (r^red, g^green, b^blue)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaExponents {
    pub red: f64,
    pub green: f64,
    pub blue: f64,
}

impl GammaExponents {
    /// Exponents of the first (candidate) stage.
    pub const STAGE1: GammaExponents = GammaExponents {
        red: 1.5,
        green: 0.7,
        blue: 0.9,
    };

    /// Exponents of the second stage and of the linear detector.
    pub const STAGE2: GammaExponents = GammaExponents {
        red: 4.0,
        green: 0.9,
        blue: 2.0,
    };

    pub fn new(red: f64, green: f64, blue: f64) -> Result<Self> {
        let g = Self { red, green, blue };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.red, self.green, self.blue]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
        {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("gamma exponents must be positive: {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub stage1_matrix: ConversionMatrix,
    /// Also the single matrix of the linear detector.
    pub stage2_matrix: ConversionMatrix,
    pub stage1_gamma: GammaExponents,
    /// Also the gamma of the linear detector.
    pub stage2_gamma: GammaExponents,
    pub white_threshold: f64,
    /// Closing radius applied to the final mask; `None` disables it.
    pub morph_close: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stage1_matrix: ConversionMatrix::FLAME_HIGHLIGHT,
            stage2_matrix: ConversionMatrix::COLOUR_DIFFERENTIATING,
            stage1_gamma: GammaExponents::STAGE1,
            stage2_gamma: GammaExponents::STAGE2,
            white_threshold: 0.8,
            morph_close: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.stage1_gamma.validate()?;
        self.stage2_gamma.validate()?;
        if !(self.white_threshold > 0.0 && self.white_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "white_threshold must be in (0, 1], got {}",
                self.white_threshold
            )));
        }
        if self.morph_close == Some(0) {
            return Err(Error::InvalidConfig("closing radius must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which detector to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Nonlinear,
}

impl Method {
    pub fn detect(self, img: &RgbImage, cfg: &PipelineConfig) -> BinaryMask {
        match self {
            Method::Linear => detect_linear(img, cfg),
            Method::Nonlinear => detect_nonlinear(img, cfg),
        }
    }
}

pub fn contrast_enhance(img: &RgbImage, g: &GammaExponents) -> RgbImage {
    let exps = [g.red, g.green, g.blue];
    RgbImage::from_fn(img.width(), img.height(), |x, y| {
        let px = img.pixel(x, y);
        std::array::from_fn(|c| px[c].powf(exps[c]))
    })
}

pub fn convert_image(img: &RgbImage, w: &ConversionMatrix) -> ConvertedImage {
    let data = img.pixels().iter().map(|p| w.apply(p)).collect();
    ConvertedImage::new(img.width(), img.height(), data).expect("same dimensions")
}

/// Pixels whose converted channels all reach `tau` after clamping to `[0, 1]`.
pub fn white_rescue(converted: &ConvertedImage, tau: f64) -> BinaryMask {
    let data = converted
        .pixels()
        .iter()
        .map(|px| px.iter().all(|v| v.clamp(0.0, 1.0) >= tau))
        .collect();
    BinaryMask::new(converted.width(), converted.height(), data).expect("same dimensions")
}

/// Enhance, convert, reduce to gray and binarize.
fn threshold_pass(img: &RgbImage, gamma: &GammaExponents, w: &ConversionMatrix) -> (ConvertedImage, OtsuResult) {
    let converted = convert_image(&contrast_enhance(img, gamma), w);
    let otsu = otsu_threshold(&clamp_to_gray(&converted));
    (converted, otsu)
}

fn finish(mask: BinaryMask, cfg: &PipelineConfig) -> BinaryMask {
    match cfg.morph_close {
        Some(r) if r > 0 => morph_close(&mask, r),
        _ => mask,
    }
}

pub fn detect_linear(img: &RgbImage, cfg: &PipelineConfig) -> BinaryMask {
    let (_, otsu) = threshold_pass(img, &cfg.stage2_gamma, &cfg.stage2_matrix);
    finish(otsu.mask, cfg)
}

/// Intermediate masks of the two-stage detector.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearStages {
    /// Otsu mask of the first pass.
    pub stage1: BinaryMask,
    /// First-pass pixels converted to white, restricted to `stage1`.
    pub rescue: BinaryMask,
    /// Otsu mask of the second pass, restricted to `stage1`.
    pub stage2: BinaryMask,
    /// `stage2 ∪ rescue`, before optional closing.
    pub combined: BinaryMask,
    /// `combined` after optional closing.
    pub result: BinaryMask,
}

pub fn nonlinear_stages(img: &RgbImage, cfg: &PipelineConfig) -> NonlinearStages {
    let (converted1, otsu1) = threshold_pass(img, &cfg.stage1_gamma, &cfg.stage1_matrix);
    let stage1 = otsu1.mask;
    let rescue = white_rescue(&converted1, cfg.white_threshold)
        .intersection(&stage1)
        .expect("same dimensions");

    let candidates = img.masked(&stage1).expect("same dimensions");
    let (_, otsu2) = threshold_pass(&candidates, &cfg.stage2_gamma, &cfg.stage2_matrix);
    let stage2 = otsu2.mask.intersection(&stage1).expect("same dimensions");

    let combined = stage2.union(&rescue).expect("same dimensions");
    let result = finish(combined.clone(), cfg);
    NonlinearStages {
        stage1,
        rescue,
        stage2,
        combined,
        result,
    }
}

pub fn detect_nonlinear(img: &RgbImage, cfg: &PipelineConfig) -> BinaryMask {
    nonlinear_stages(img, cfg).result
}
