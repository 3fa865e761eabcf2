//! Binary closing with a square structuring element.
//!
//! Windows are clipped at the image border (out-of-bounds pixels are
//! ignored), so closing never shrinks a mask and an all-true mask stays
//! all-true. A square window is separable into a row pass and a column pass.

use crate::imaging::BinaryMask;

pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    window_pass(mask, radius, true)
}

pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    window_pass(mask, radius, false)
}

/// Dilation followed by erosion, element side `2 * radius + 1`.
pub fn morph_close(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    erode(&dilate(mask, radius), radius)
}

/// `any == true` takes the window OR (dilation), otherwise the AND.
fn window_pass(mask: &BinaryMask, radius: usize, any: bool) -> BinaryMask {
    let (w, h) = mask.dimensions();
    let src = mask.data();
    let mut rows = vec![false; w * h];
    for y in 0..h {
        let line = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let (lo, hi) = (x.saturating_sub(radius), (x + radius).min(w - 1));
            rows[y * w + x] = reduce(line[lo..=hi].iter().copied(), any);
        }
    }
    let mut out = vec![false; w * h];
    for y in 0..h {
        let (lo, hi) = (y.saturating_sub(radius), (y + radius).min(h - 1));
        for x in 0..w {
            out[y * w + x] = reduce((lo..=hi).map(|yy| rows[yy * w + x]), any);
        }
    }
    BinaryMask::new(w, h, out).expect("same dimensions")
}

fn reduce(mut it: impl Iterator<Item = bool>, any: bool) -> bool {
    if any {
        it.any(|b| b)
    } else {
        it.all(|b| b)
    }
}
