//! Raster types shared by the trainer, the detectors and the evaluator.
//!
//! Colour images carry normalized channels in `[0, 1]`; 8-bit sources are
//! divided by 255 on decode. Converted images (the output of a conversion
//! matrix) are unbounded and are only reduced to a bounded gray image when a
//! scalar intensity is needed for thresholding.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageEncoder};

use crate::error::{Error, Result};

/// One RGB triple.
pub type Rgb = [f64; 3];

/// Encoded formats accepted by [`decode_image`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Png,
    Jpeg,
}

impl ImageFormat {
    /// Sniffs the magic bytes of an encoded buffer.
    pub fn detect(bytes: &[u8]) -> Result<Self> {
        match image::guess_format(bytes) {
            Ok(image::ImageFormat::Png) => Ok(ImageFormat::Png),
            Ok(image::ImageFormat::Jpeg) => Ok(ImageFormat::Jpeg),
            Ok(other) => Err(Error::UnsupportedFormat(format!("{other:?}"))),
            Err(_) => Err(Error::MalformedImage("unrecognised image signature".into())),
        }
    }

    fn as_image_format(self) -> image::ImageFormat {
        match self {
            ImageFormat::Png => image::ImageFormat::Png,
            ImageFormat::Jpeg => image::ImageFormat::Jpeg,
        }
    }
}

/// Row-major raster of RGB triples, each channel in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<Rgb>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<Rgb>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BufferSize {
                width,
                height,
                got: data.len(),
            });
        }
        for (index, px) in data.iter().enumerate() {
            for &value in px {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::OutOfRangeChannel { index, value });
                }
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Uniform image. Channels are clamped into `[0, 1]`.
    pub fn filled(width: usize, height: usize, colour: Rgb) -> Self {
        Self {
            width,
            height,
            data: vec![clamp_rgb(colour); width * height],
        }
    }

    /// Builds an image from a per-pixel generator `f(x, y)`; output is clamped.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(clamp_rgb(f(x, y)));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.data[y * self.width + x]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, colour: Rgb) {
        self.data[y * self.width + x] = clamp_rgb(colour);
    }

    /// Keeps pixels where `mask` is set and paints the rest black.
    pub fn masked(&self, mask: &BinaryMask) -> Result<Self> {
        ensure_same_dims(self.dimensions(), mask.dimensions())?;
        let data = self
            .data
            .iter()
            .zip(mask.data())
            .map(|(&px, &keep)| if keep { px } else { [0.0; 3] })
            .collect();
        Ok(Self {
            width: self.width,
            height: self.height,
            data,
        })
    }

    /// Quantizes to 8 bits per channel (round to nearest).
    pub fn to_rgb8(&self) -> image::RgbImage {
        let raw = self
            .data
            .iter()
            .flat_map(|px| px.iter().map(|&v| to_u8(v)))
            .collect();
        image::RgbImage::from_raw(self.width as u32, self.height as u32, raw)
            .expect("buffer length matches dimensions")
    }
}

/// Result of multiplying every pixel by a conversion matrix. Values are
/// unbounded and may be negative.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvertedImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl ConvertedImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BufferSize {
                width,
                height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }
}

/// Single-channel intensity raster in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    /// Values are clamped into `[0, 1]`.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BufferSize {
                width,
                height,
                got: data.len(),
            });
        }
        let data = data.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// Per-pixel fire decision, `true` = fire.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BufferSize {
                width,
                height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    /// Number of fire pixels.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    /// `true` when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dimensions() == other.dimensions()
            && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        ensure_same_dims(self.dimensions(), other.dimensions())?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

pub(crate) fn ensure_same_dims(left: (usize, usize), right: (usize, usize)) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::dims(left, right))
    }
}

fn clamp_rgb(px: Rgb) -> Rgb {
    px.map(|v| v.clamp(0.0, 1.0))
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Decodes a PNG or JPEG buffer into a normalized RGB image.
///
/// Alpha is dropped and grayscale sources are replicated to three channels.
pub fn decode_image(bytes: &[u8], format: ImageFormat) -> Result<RgbImage> {
    let decoded = image::load_from_memory_with_format(bytes, format.as_image_format())
        .map_err(|e| Error::MalformedImage(e.to_string()))?;
    Ok(from_dynamic(decoded))
}

/// Like [`decode_image`] but detects the format from the buffer contents.
pub fn decode_image_auto(bytes: &[u8]) -> Result<RgbImage> {
    decode_image(bytes, ImageFormat::detect(bytes)?)
}

pub fn load_image(path: &Path) -> Result<RgbImage> {
    decode_image_auto(&read_file(path)?)
}

fn from_dynamic(img: DynamicImage) -> RgbImage {
    let rgb = img.to_rgb8();
    let (width, height) = (rgb.width() as usize, rgb.height() as usize);
    let data = rgb
        .pixels()
        .map(|p| p.0.map(|c| f64::from(c) / 255.0))
        .collect();
    RgbImage {
        width,
        height,
        data,
    }
}

/// Encodes a mask as an 8-bit single-channel PNG (fire = 255).
pub fn encode_mask(mask: &BinaryMask) -> Result<Vec<u8>> {
    let raw: Vec<u8> = mask.data.iter().map(|&b| if b { 255 } else { 0 }).collect();
    encode_png(&raw, mask.width, mask.height, image::ExtendedColorType::L8)
}

/// Decodes a mask PNG; any pixel brighter than 127 counts as fire.
pub fn decode_mask(bytes: &[u8]) -> Result<BinaryMask> {
    let format = ImageFormat::detect(bytes)?;
    let decoded = image::load_from_memory_with_format(bytes, format.as_image_format())
        .map_err(|e| Error::MalformedImage(e.to_string()))?;
    let luma = decoded.to_luma8();
    Ok(BinaryMask {
        width: luma.width() as usize,
        height: luma.height() as usize,
        data: luma.pixels().map(|p| p.0[0] > 127).collect(),
    })
}

pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    decode_mask(&read_file(path)?)
}

/// Encodes an image as an 8-bit RGB PNG.
pub fn encode_rgb(img: &RgbImage) -> Result<Vec<u8>> {
    let rgb8 = img.to_rgb8();
    encode_png(rgb8.as_raw(), img.width, img.height, image::ExtendedColorType::Rgb8)
}

fn encode_png(
    raw: &[u8],
    width: usize,
    height: usize,
    colour: image::ExtendedColorType,
) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(raw, width as u32, height as u32, colour)
        .map_err(|e| Error::EncodeFailure(e.to_string()))?;
    Ok(out.into_inner())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

/// Replaces masked pixels with `highlight`.
pub fn overlay(image: &RgbImage, mask: &BinaryMask, highlight: Rgb) -> Result<RgbImage> {
    ensure_same_dims(image.dimensions(), mask.dimensions())?;
    let highlight = clamp_rgb(highlight);
    let data = image
        .data
        .iter()
        .zip(&mask.data)
        .map(|(&px, &hit)| if hit { highlight } else { px })
        .collect();
    Ok(RgbImage {
        width: image.width,
        height: image.height,
        data,
    })
}

/// Scalar intensity of a converted image: each channel clamped to `[0, 1]`,
/// then averaged.
pub fn clamp_to_gray(converted: &ConvertedImage) -> GrayImage {
    let data = converted
        .data
        .iter()
        .map(|px| px.iter().map(|v| v.clamp(0.0, 1.0)).sum::<f64>() / 3.0)
        .collect();
    GrayImage {
        width: converted.width,
        height: converted.height,
        data,
    }
}
