//! Differentiable rasterization of patch polygons.
//!
//! A polygon is rendered into an s×s patch by evaluating, at every pixel
//! center, the logistic of its signed distance to the polygon region:
//!
//!   v(p) = sigmoid(gamma * d(p))
//!
//! where d is positive inside the triangle-union fill of the polygon,
//! negative outside, and |d| is the distance to the nearest polygon side.
//! The value varies smoothly with the vertex coordinates, and as
//! gamma -> infinity it converges to the exact union-coverage indicator at
//! every non-boundary pixel center. A supersampling oracle computes exact
//! fractional pixel coverage for verification.

use crate::error::{Error, Result};
use crate::geometry::{
    point_in_triangle, segment_distance_with_grad, PatchPolygon, Triangulation, Vertex,
};

/// An s×s grid of values in [0, 1], row-major. Pixel (row i, col j) has its
/// center at normalized coordinates x = (2j+1)/s - 1, y = (2i+1)/s - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchRaster {
    side: usize,
    values: Vec<f64>,
}

impl PatchRaster {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.side + col]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Normalized coordinates of the center of pixel (row, col) on a side×side grid.
pub fn pixel_center(row: usize, col: usize, side: usize) -> Vertex {
    Vertex::new(
        (2 * col + 1) as f64 / side as f64 - 1.0,
        (2 * row + 1) as f64 / side as f64 - 1.0,
    )
}

/// Soft rasterizer parameters. `gamma` is the logistic sharpness in units of
/// inverse normalized patch length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftRasterConfig {
    pub gamma: f64,
    pub patch_side: usize,
}

impl SoftRasterConfig {
    pub fn new(gamma: f64, patch_side: usize) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(format!("gamma must be finite and positive, got {gamma}")));
        }
        if patch_side == 0 {
            return Err(Error::invalid("patch side must be at least 1"));
        }
        Ok(SoftRasterConfig { gamma, patch_side })
    }
}

impl Default for SoftRasterConfig {
    fn default() -> Self {
        SoftRasterConfig { gamma: 40.0, patch_side: 8 }
    }
}

/// Numerically stable logistic function.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Signed distance from a point to the polygon region: positive inside the
/// union of the triangulation's triangles, negative outside; the magnitude is
/// the distance to the nearest polygon side. For a fully collapsed polygon
/// every side degenerates to a point and the result is never positive.
pub fn polygon_signed_distance(p: Vertex, poly: &PatchPolygon, tri: &Triangulation) -> f64 {
    let verts = poly.vertices();
    let k = verts.len();
    let mut dist = f64::INFINITY;
    for i in 0..k {
        let (a, b) = poly.side(i);
        let d = crate::geometry::point_segment_distance(p, a, b);
        if d < dist {
            dist = d;
        }
    }
    if region_contains(p, verts, tri) {
        dist
    } else {
        -dist
    }
}

fn region_contains(p: Vertex, verts: &[Vertex], tri: &Triangulation) -> bool {
    tri.triangles()
        .iter()
        .any(|t| point_in_triangle(p, verts[t[0]], verts[t[1]], verts[t[2]]))
}

/// Signed distance plus the derivative of the achieving side. Ties pick the
/// lowest side index, so the gradient of one achieving feature is used.
struct SignedDistanceGrad {
    d: f64,
    side: usize,
    grad_a: (f64, f64),
    grad_b: (f64, f64),
}

fn signed_distance_with_grad(p: Vertex, poly: &PatchPolygon, tri: &Triangulation) -> SignedDistanceGrad {
    let verts = poly.vertices();
    let k = verts.len();
    let mut best = None;
    let mut best_side = 0;
    for i in 0..k {
        let (a, b) = poly.side(i);
        let sd = segment_distance_with_grad(p, a, b);
        // Strict comparison: the lowest achieving side index wins ties.
        if best.map_or(true, |prev: crate::geometry::SegmentDistance| sd.dist < prev.dist) {
            best = Some(sd);
            best_side = i;
        }
    }
    let sd = best.expect("polygon has at least 3 sides");
    let sign = if region_contains(p, verts, tri) { 1.0 } else { -1.0 };
    SignedDistanceGrad {
        d: sign * sd.dist,
        side: best_side,
        grad_a: (sign * sd.grad_a.0, sign * sd.grad_a.1),
        grad_b: (sign * sd.grad_b.0, sign * sd.grad_b.1),
    }
}

fn check_k(poly: &PatchPolygon, tri: &Triangulation) -> Result<()> {
    if poly.k() != tri.k() {
        return Err(Error::invalid(format!(
            "polygon has {} vertices but triangulation expects {}",
            poly.k(),
            tri.k()
        )));
    }
    Ok(())
}

/// Render the polygon as a soft patch at the configured side length.
pub fn render_patch_soft(
    poly: &PatchPolygon,
    tri: &Triangulation,
    cfg: &SoftRasterConfig,
) -> Result<PatchRaster> {
    render_patch_any_resolution(poly, tri, cfg.patch_side, cfg)
}

/// Same soft rendering with an arbitrary output side length; polygons are
/// resolution independent.
pub fn render_patch_any_resolution(
    poly: &PatchPolygon,
    tri: &Triangulation,
    out_side: usize,
    cfg: &SoftRasterConfig,
) -> Result<PatchRaster> {
    check_k(poly, tri)?;
    if out_side == 0 {
        return Err(Error::invalid("output side must be at least 1"));
    }
    let mut values = Vec::with_capacity(out_side * out_side);
    for i in 0..out_side {
        for j in 0..out_side {
            let d = polygon_signed_distance(pixel_center(i, j, out_side), poly, tri);
            values.push(sigmoid(cfg.gamma * d));
        }
    }
    Ok(PatchRaster { side: out_side, values })
}

/// Exact fractional coverage by stratified midpoint supersampling with
/// rate×rate subsamples per pixel. Verification oracle; not differentiable.
pub fn render_patch_exact(
    poly: &PatchPolygon,
    tri: &Triangulation,
    side: usize,
    rate: usize,
) -> Result<PatchRaster> {
    check_k(poly, tri)?;
    if side == 0 || rate == 0 {
        return Err(Error::invalid("side and rate must be at least 1"));
    }
    let verts = poly.vertices();
    let pixel = 2.0 / side as f64;
    let step = pixel / rate as f64;
    let mut values = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            let x0 = 2.0 * j as f64 / side as f64 - 1.0;
            let y0 = 2.0 * i as f64 / side as f64 - 1.0;
            let mut hits = 0usize;
            for u in 0..rate {
                for w in 0..rate {
                    let p = Vertex::new(
                        x0 + (w as f64 + 0.5) * step,
                        y0 + (u as f64 + 0.5) * step,
                    );
                    if region_contains(p, verts, tri) {
                        hits += 1;
                    }
                }
            }
            values.push(hits as f64 / (rate * rate) as f64);
        }
    }
    Ok(PatchRaster { side, values })
}

/// Gradient of <upstream, v> with respect to the polygon's vertex
/// coordinates, computed analytically through the logistic and the signed
/// distance. Returns one (d/dx, d/dy) pair per vertex.
pub fn render_patch_grad(
    poly: &PatchPolygon,
    tri: &Triangulation,
    cfg: &SoftRasterConfig,
    upstream: &[f64],
) -> Result<Vec<(f64, f64)>> {
    check_k(poly, tri)?;
    let side = cfg.patch_side;
    if upstream.len() != side * side {
        return Err(Error::invalid(format!(
            "upstream has {} values, expected {}",
            upstream.len(),
            side * side
        )));
    }
    let k = poly.k();
    let mut grads = vec![(0.0, 0.0); k];
    for i in 0..side {
        for j in 0..side {
            let w = upstream[i * side + j];
            if w == 0.0 {
                continue;
            }
            let sd = signed_distance_with_grad(pixel_center(i, j, side), poly, tri);
            let s = sigmoid(cfg.gamma * sd.d);
            let coeff = w * cfg.gamma * s * sigmoid(-cfg.gamma * sd.d);
            let a = sd.side;
            let b = (sd.side + 1) % k;
            grads[a].0 += coeff * sd.grad_a.0;
            grads[a].1 += coeff * sd.grad_a.1;
            grads[b].0 += coeff * sd.grad_b.0;
            grads[b].1 += coeff * sd.grad_b.1;
        }
    }
    Ok(grads)
}
