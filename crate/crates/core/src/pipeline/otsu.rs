//! Otsu binarization over a 256-bin histogram.
//!
//! Bin `k` holds gray values in `(k/256, (k+1)/256]`, with `0.0` in bin 0.
//! Splitting at boundary `t` (1..=255) puts bins `>= t` in the bright class,
//! which is exactly `gray > t/256`. Class statistics are accumulated in
//! integers so equal variances compare equal; ties keep the lowest boundary.

use crate::imaging::{BinaryMask, GrayImage};

pub const BINS: usize = 256;

/// Histogram bin of a gray value in `[0, 1]`.
#[inline]
pub fn bin_of(v: f64) -> usize {
    // Scaling by a power of two is exact, so `bin_of(v) >= t` iff `v > t/256`.
    ((v * BINS as f64).ceil() as usize).saturating_sub(1).min(BINS - 1)
}

/// Gray value at boundary `t`: pixels strictly above it are foreground.
#[inline]
pub fn boundary_value(t: usize) -> f64 {
    t as f64 / BINS as f64
}

/// Between-class variance (up to the constant factor `1/N^2`) for a split
/// with `n0` pixels summing to bin total `s0` below and `n1`, `s1` above.
#[inline]
pub fn between_class_variance(n0: u64, s0: u64, n1: u64, s1: u64) -> f64 {
    if n0 == 0 || n1 == 0 {
        return 0.0;
    }
    let (w0, w1) = (n0 as f64, n1 as f64);
    let diff = s0 as f64 / w0 - s1 as f64 / w1;
    w0 * w1 * diff * diff
}

#[derive(Clone, Debug, PartialEq)]
pub struct OtsuResult {
    /// Foreground is `gray > threshold`. `1.0` when no split exists.
    pub threshold: f64,
    /// Winning boundary, `None` for images with a single occupied bin.
    pub boundary: Option<usize>,
    pub mask: BinaryMask,
}

pub fn otsu_threshold(gray: &GrayImage) -> OtsuResult {
    let values = gray.values();
    let mut hist = [0u64; BINS];
    for &v in values {
        hist[bin_of(v)] += 1;
    }
    let total_n: u64 = hist.iter().sum();
    let total_s: u64 = hist.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();

    let mut best: Option<(usize, f64)> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for t in 1..BINS {
        n0 += hist[t - 1];
        s0 += (t as u64 - 1) * hist[t - 1];
        let var = between_class_variance(n0, s0, total_n - n0, total_s - s0);
        if var > best.map_or(0.0, |(_, v)| v) {
            best = Some((t, var));
        }
    }

    let (w, h) = gray.dimensions();
    match best {
        Some((t, _)) => {
            let threshold = boundary_value(t);
            let mask = values.iter().map(|&v| v > threshold).collect();
            OtsuResult {
                threshold,
                boundary: Some(t),
                mask: BinaryMask::new(w, h, mask).expect("same dimensions"),
            }
        }
        None => OtsuResult {
            threshold: 1.0,
            boundary: None,
            mask: BinaryMask::filled(w, h, false),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Scores every boundary straight from the pixels, no histogram.
    fn exhaustive(values: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for t in 1..BINS {
            let cut = boundary_value(t);
            let (mut n0, mut s0, mut n1, mut s1) = (0u64, 0u64, 0u64, 0u64);
            for &v in values {
                let level = bin_of(v) as u64;
                if v > cut {
                    n1 += 1;
                    s1 += level;
                } else {
                    n0 += 1;
                    s0 += level;
                }
            }
            let var = between_class_variance(n0, s0, n1, s1);
            if var > 0.0 && best.is_none_or(|(_, b)| var > b) {
                best = Some((t, var));
            }
        }
        best.map(|(t, _)| t)
    }

    #[test]
    fn bimodal_split() {
        let g = GrayImage::new(4, 1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let r = otsu_threshold(&g);
        assert_eq!(r.mask.data(), &[false, false, true, true]);
        // Every boundary separates the modes equally well; the lowest wins.
        assert_eq!(r.boundary, Some(1));
    }

    #[test]
    fn constant_image_is_empty() {
        for v in [0.0, 0.37, 1.0] {
            let r = otsu_threshold(&GrayImage::new(5, 5, vec![v; 25]).unwrap());
            assert_eq!(r.mask.count(), 0);
            assert_eq!(r.boundary, None);
        }
    }

    #[test]
    fn bin_edges() {
        assert_eq!(bin_of(0.0), 0);
        assert_eq!(bin_of(1.0 / 256.0), 0);
        assert_eq!(bin_of(1.0 / 256.0 + 1e-12), 1);
        assert_eq!(bin_of(1.0), 255);
        for t in 1..BINS {
            let edge = boundary_value(t);
            assert!(bin_of(edge) < t);
            assert!(bin_of(f64::from_bits(edge.to_bits() + 1)) >= t);
        }
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..20 {
            let values: Vec<f64> = if trial % 2 == 0 {
                (0..64 * 64).map(|_| rng.gen()).collect()
            } else {
                // Coarse levels exercise ties and exact bin edges.
                (0..64 * 64).map(|_| rng.gen_range(0..=8) as f64 / 8.0).collect()
            };
            let g = GrayImage::new(64, 64, values.clone()).unwrap();
            let r = otsu_threshold(&g);
            assert_eq!(r.boundary, exhaustive(&values));
            let t = boundary_value(r.boundary.unwrap());
            assert!(values.iter().zip(r.mask.data()).all(|(&v, &m)| m == (v > t)));
        }
    }
}
