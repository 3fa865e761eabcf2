#![allow(dead_code)]

use std::path::Path;

use flamelens::imaging::{encode_mask, encode_rgb, Rgb};
use flamelens::training::feature::{build_feature_matrix, FeatureMatrix, HALF};
use flamelens::{BinaryMask, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ORANGE: Rgb = [1.0, 0.55, 0.1];
pub const DARK_GRAY: Rgb = [0.2, 0.2, 0.2];
pub const FLAME_ORANGE: Rgb = [1.0, 0.5, 0.0];
pub const DARK_RED: Rgb = [0.5, 0.1, 0.1];
/// First-stage conversion turns this white; the second stage drops it.
pub const RESCUED: Rgb = [0.6, 0.4, 0.0];

/// 16×16 orange block at (24, 24) on a 64×64 dark-gray field.
pub fn orange_block() -> (RgbImage, BinaryMask) {
    let inside = |x: usize, y: usize| (24..40).contains(&x) && (24..40).contains(&y);
    let img = RgbImage::from_fn(64, 64, |x, y| if inside(x, y) { ORANGE } else { DARK_GRAY });
    (img, BinaryMask::from_fn(64, 64, inside))
}

/// Orange block plus a block of the rescued colour at (40, 40).
pub fn rescue_scene() -> RgbImage {
    RgbImage::from_fn(64, 64, |x, y| {
        if (8..24).contains(&x) && (8..24).contains(&y) {
            ORANGE
        } else if (40..56).contains(&x) && (40..56).contains(&y) {
            RESCUED
        } else {
            DARK_GRAY
        }
    })
}

pub fn constant_halves() -> FeatureMatrix {
    build_feature_matrix(&[FLAME_ORANGE; HALF], &[DARK_RED; HALF]).unwrap()
}

/// Both halves with every channel jittered by up to ±0.05.
pub fn jittered_halves(seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jitter = |c: Rgb| c.map(|v: f64| (v + rng.gen_range(-0.05..=0.05)).clamp(0.0, 1.0));
    let fire: Vec<Rgb> = (0..HALF).map(|_| jitter(FLAME_ORANGE)).collect();
    let bg: Vec<Rgb> = (0..HALF).map(|_| jitter(DARK_RED)).collect();
    build_feature_matrix(&fire, &bg).unwrap()
}

/// 80×40 training image: jittered flame colour left, dark red right.
pub fn training_image() -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    RgbImage::from_fn(80, 40, |x, _| {
        let base = if x < 40 { FLAME_ORANGE } else { DARK_RED };
        base.map(|v| v + rng.gen_range(-0.04..=0.04))
    })
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> RgbImage {
    RgbImage::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()])
}

pub fn write_png(path: &Path, img: &RgbImage) {
    std::fs::write(path, encode_rgb(img).unwrap()).unwrap();
}

pub fn write_mask(path: &Path, mask: &BinaryMask) {
    std::fs::write(path, encode_mask(mask).unwrap()).unwrap();
}
