pub mod eval;
pub mod fit;
pub mod gradcheck;
pub mod render;
pub mod sweep;
pub mod synth;

use patchpoly::RasterMask;

/// Pad a mask with background on the bottom/right edges to the next multiple
/// of the patch side. Returns the original when it already fits.
pub fn pad_to_multiple(mask: &RasterMask, side: usize) -> RasterMask {
    let pad_h = mask.h().div_ceil(side) * side;
    let pad_w = mask.w().div_ceil(side) * side;
    if pad_h == mask.h() && pad_w == mask.w() {
        return mask.clone();
    }
    let mut out = RasterMask::zeros(pad_h, pad_w);
    for i in 0..mask.h() {
        for j in 0..mask.w() {
            out.set(i, j, mask.get(i, j));
        }
    }
    out
}

/// Shortest-roundtrip decimal formatting; locale independent.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
