//! Deterministic analytic binary masks used as fitting targets and fixtures.

use crate::error::{Error, Result};
use crate::field::RasterMask;

/// A parameterized shape. Pixel (row i, col j) is tested at integer
/// coordinates against real-valued centers and radii.
#[derive(Debug, Clone, PartialEq)]
pub enum SynthShape {
    Disk { cy: f64, cx: f64, r: f64 },
    Rect { row0: usize, col0: usize, height: usize, width: usize },
    Ring { cy: f64, cx: f64, r_in: f64, r_out: f64 },
    /// Disk minus a shifted cutting disk.
    Crescent { cy: f64, cx: f64, r: f64, cut_cy: f64, cut_cx: f64, cut_r: f64 },
    /// Two disjoint disks; the canonical multi-contour case.
    TwoBlobs { cy1: f64, cx1: f64, r1: f64, cy2: f64, cx2: f64, r2: f64 },
}

impl SynthShape {
    /// Default parameterization of a named shape for an h×w canvas.
    pub fn named(name: &str, h: usize, w: usize) -> Result<SynthShape> {
        let (hf, wf) = (h as f64, w as f64);
        let m = hf.min(wf);
        let (cy, cx) = ((hf - 1.0) / 2.0, (wf - 1.0) / 2.0);
        let shape = match name {
            "disk" => SynthShape::Disk { cy, cx, r: 0.375 * m },
            "rect" => SynthShape::Rect {
                row0: h / 4,
                col0: w / 4,
                height: h / 2,
                width: w / 2,
            },
            "ring" => SynthShape::Ring {
                cy,
                cx,
                r_in: 0.1875 * m,
                r_out: 0.375 * m,
            },
            "crescent" => SynthShape::Crescent {
                cy,
                cx,
                r: 0.375 * m,
                cut_cy: cy,
                cut_cx: cx + 0.3 * m,
                cut_r: 0.375 * m,
            },
            "two_blobs" => SynthShape::TwoBlobs {
                cy1: cy,
                cx1: cx - 0.3125 * m,
                r1: 0.15625 * m,
                cy2: cy,
                cx2: cx + 0.3125 * m,
                r2: 0.15625 * m,
            },
            other => {
                return Err(Error::invalid(format!(
                    "unknown shape '{other}' (expected disk, rect, ring, crescent or two_blobs)"
                )))
            }
        };
        Ok(shape)
    }

    fn validate(&self, h: usize, w: usize) -> Result<()> {
        let in_bounds = |cy: f64, cx: f64| cy >= 0.0 && cy < h as f64 && cx >= 0.0 && cx < w as f64;
        match *self {
            SynthShape::Disk { cy, cx, r } => {
                if r <= 0.0 || !in_bounds(cy, cx) {
                    return Err(Error::invalid("disk center out of bounds or radius not positive"));
                }
            }
            SynthShape::Rect { row0, col0, height, width } => {
                if height == 0 || width == 0 || row0 + height > h || col0 + width > w {
                    return Err(Error::invalid("rect out of bounds or empty"));
                }
            }
            SynthShape::Ring { cy, cx, r_in, r_out } => {
                if r_in < 0.0 || r_out <= r_in.max(0.0) || r_out <= 0.0 || !in_bounds(cy, cx) {
                    return Err(Error::invalid("ring radii must satisfy 0 <= r_in < r_out"));
                }
            }
            SynthShape::Crescent { cy, cx, r, cut_r, .. } => {
                if r <= 0.0 || cut_r <= 0.0 || !in_bounds(cy, cx) {
                    return Err(Error::invalid("crescent radii must be positive and center in bounds"));
                }
            }
            SynthShape::TwoBlobs { cy1, cx1, r1, cy2, cx2, r2 } => {
                if r1 <= 0.0 || r2 <= 0.0 || !in_bounds(cy1, cx1) || !in_bounds(cy2, cx2) {
                    return Err(Error::invalid("blob centers out of bounds or radii not positive"));
                }
                let gap = ((cy1 - cy2).powi(2) + (cx1 - cx2).powi(2)).sqrt();
                if gap <= r1 + r2 {
                    return Err(Error::invalid("two_blobs disks must be disjoint"));
                }
            }
        }
        Ok(())
    }

    fn contains(&self, i: usize, j: usize) -> bool {
        let (y, x) = (i as f64, j as f64);
        let d2 = |cy: f64, cx: f64| (y - cy).powi(2) + (x - cx).powi(2);
        match *self {
            SynthShape::Disk { cy, cx, r } => d2(cy, cx) <= r * r,
            SynthShape::Rect { row0, col0, height, width } => {
                i >= row0 && i < row0 + height && j >= col0 && j < col0 + width
            }
            SynthShape::Ring { cy, cx, r_in, r_out } => {
                let d = d2(cy, cx);
                d >= r_in * r_in && d <= r_out * r_out
            }
            SynthShape::Crescent { cy, cx, r, cut_cy, cut_cx, cut_r } => {
                d2(cy, cx) <= r * r && d2(cut_cy, cut_cx) > cut_r * cut_r
            }
            SynthShape::TwoBlobs { cy1, cx1, r1, cy2, cx2, r2 } => {
                d2(cy1, cx1) <= r1 * r1 || d2(cy2, cx2) <= r2 * r2
            }
        }
    }
}

/// Rasterize a shape onto an h×w binary mask.
pub fn synth(shape: &SynthShape, h: usize, w: usize) -> Result<RasterMask> {
    if h == 0 || w == 0 {
        return Err(Error::invalid("mask dimensions must be positive"));
    }
    shape.validate(h, w)?;
    let mut mask = RasterMask::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            if shape.contains(i, j) {
                mask.set(i, j, 1.0);
            }
        }
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::occlusion_distance;

    #[test]
    fn disk_area_matches_the_analytic_value() {
        let m = synth(&SynthShape::named("disk", 64, 64).unwrap(), 64, 64).unwrap();
        let area = m.count_ones() as f64;
        let exact = std::f64::consts::PI * 24.0 * 24.0;
        assert!((area - exact).abs() / exact < 0.02, "area {area} vs {exact}");
    }

    #[test]
    fn two_blobs_have_the_expected_gap() {
        let m = synth(&SynthShape::named("two_blobs", 64, 64).unwrap(), 64, 64).unwrap();
        let d = occlusion_distance(&m);
        assert!((d - 20.0).abs() <= 1.5, "occlusion distance {d}");
    }

    #[test]
    fn degenerate_ring_is_a_disk() {
        let disk = synth(&SynthShape::Disk { cy: 31.5, cx: 31.5, r: 24.0 }, 64, 64).unwrap();
        let ring = synth(
            &SynthShape::Ring { cy: 31.5, cx: 31.5, r_in: 0.0, r_out: 24.0 },
            64,
            64,
        )
        .unwrap();
        assert_eq!(disk.values(), ring.values());
    }

    #[test]
    fn unknown_or_invalid_shapes_are_rejected() {
        assert!(SynthShape::named("blob", 64, 64).is_err());
        assert!(synth(&SynthShape::Disk { cy: 100.0, cx: 0.0, r: 3.0 }, 64, 64).is_err());
        assert!(synth(
            &SynthShape::TwoBlobs { cy1: 10.0, cx1: 10.0, r1: 8.0, cy2: 10.0, cx2: 20.0, r2: 8.0 },
            64,
            64
        )
        .is_err());
    }

    #[test]
    fn named_shapes_cover_the_canvas_sensibly() {
        for name in ["disk", "rect", "ring", "crescent", "two_blobs"] {
            let m = synth(&SynthShape::named(name, 64, 64).unwrap(), 64, 64).unwrap();
            let ones = m.count_ones();
            assert!(ones > 0, "{name} is empty");
            assert!(ones < 64 * 64, "{name} fills everything");
        }
    }
}
