use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, Rgb, RgbImage};

pub const GRID_SIDE: usize = 40;
/// Pixels per class; each half of the grid is 20×40.
pub const HALF: usize = GRID_SIDE * GRID_SIDE / 2;

/// 40×40 training grid: fire samples in rows 0–19, background in rows 20–39.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pixels: Vec<Rgb>,
}

impl FeatureMatrix {
    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn at(&self, row: usize, col: usize) -> Rgb {
        self.pixels[row * GRID_SIDE + col]
    }

    pub fn is_fire(index: usize) -> bool {
        index < HALF
    }

    pub fn fire(&self) -> &[Rgb] {
        &self.pixels[..HALF]
    }

    pub fn background(&self) -> &[Rgb] {
        &self.pixels[HALF..]
    }
}

/// Lays out fire samples then background samples in row-major order.
pub fn build_feature_matrix(fire: &[Rgb], background: &[Rgb]) -> Result<FeatureMatrix> {
    for (what, px) in [("fire", fire), ("background", background)] {
        if px.len() != HALF {
            return Err(Error::WrongCount {
                what,
                expected: HALF,
                got: px.len(),
            });
        }
    }
    let pixels: Vec<Rgb> = fire.iter().chain(background).copied().collect();
    for (index, px) in pixels.iter().enumerate() {
        if let Some(&value) = px.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutOfRangeChannel { index, value });
        }
    }
    Ok(FeatureMatrix { pixels })
}

/// Axis-aligned pixel rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl std::str::FromStr for Rect {
    type Err = String;

    /// Parses `x,y,w,h`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("invalid rectangle `{s}`: {e}"))?;
        match parts[..] {
            [x, y, width, height] if width > 0 && height > 0 => Ok(Rect {
                x,
                y,
                width,
                height,
            }),
            [_, _, _, _] => Err(format!("rectangle `{s}` has zero area")),
            _ => Err(format!("rectangle `{s}` must be x,y,w,h")),
        }
    }
}

/// Where training pixels for one class come from.
#[derive(Clone, Debug)]
pub enum Region {
    Rect(Rect),
    Mask(BinaryMask),
}

impl Region {
    /// Pixels inside the region in row-major order.
    pub fn collect(&self, image: &RgbImage) -> Result<Vec<Rgb>> {
        match self {
            Region::Rect(r) => {
                if r.x + r.width > image.width() || r.y + r.height > image.height() {
                    return Err(Error::InvalidConfig(format!(
                        "region {},{},{},{} exceeds {}x{} image",
                        r.x,
                        r.y,
                        r.width,
                        r.height,
                        image.width(),
                        image.height()
                    )));
                }
                let mut out = Vec::with_capacity(r.width * r.height);
                for y in r.y..r.y + r.height {
                    for x in r.x..r.x + r.width {
                        out.push(image.pixel(x, y));
                    }
                }
                Ok(out)
            }
            Region::Mask(m) => {
                crate::imaging::ensure_same_dims(image.dimensions(), m.dimensions())?;
                Ok(image
                    .pixels()
                    .iter()
                    .zip(m.data())
                    .filter(|(_, &hit)| hit)
                    .map(|(&px, _)| px)
                    .collect())
            }
        }
    }
}

/// Picks exactly `count` samples by even stride (`i * len / count`).
pub fn subsample_by_stride(pixels: &[Rgb], count: usize) -> Result<Vec<Rgb>> {
    if pixels.len() < count {
        return Err(Error::WrongCount {
            what: "region",
            expected: count,
            got: pixels.len(),
        });
    }
    Ok((0..count).map(|i| pixels[i * pixels.len() / count]).collect())
}

/// Builds a feature matrix from two regions of one sample image.
pub fn feature_from_regions(image: &RgbImage, fire: &Region, background: &Region) -> Result<FeatureMatrix> {
    let f = subsample_by_stride(&fire.collect(image)?, HALF)?;
    let b = subsample_by_stride(&background.collect(image)?, HALF)?;
    build_feature_matrix(&f, &b)
}
