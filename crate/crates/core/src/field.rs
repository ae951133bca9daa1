//! The patch-grid polygon field: per-patch vertex parameters plus gating
//! logits, and the pipeline that turns them into a full-resolution mask.
//!
//! The forward pass decodes raw parameters (tanh for vertex coordinates,
//! sigmoid for gates), renders every patch, places the patches into their
//! grid positions, nearest-neighbor upsamples the gate map, and multiplies
//! the two maps elementwise. The gated product is the output mask; the
//! intermediate maps stay observable because the loss consumes them.

use crate::error::{Error, Result};
use crate::geometry::{PatchPolygon, Triangulation, Vertex};
use crate::raster::{render_patch_any_resolution, sigmoid, PatchRaster, SoftRasterConfig};

/// A full-resolution real-valued image with values in [0, 1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    h: usize,
    w: usize,
    values: Vec<f64>,
}

impl RasterMask {
    pub fn zeros(h: usize, w: usize) -> Self {
        RasterMask { h, w, values: vec![0.0; h * w] }
    }

    pub fn from_values(h: usize, w: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != h * w {
            return Err(Error::invalid(format!(
                "mask size {}x{} needs {} values, got {}",
                h,
                w,
                h * w,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::invalid(format!("mask value {bad} outside [0, 1]")));
        }
        Ok(RasterMask { h, w, values })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.w + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.w + col] = v;
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1.0).count()
    }

    pub fn same_shape(&self, other: &RasterMask) -> bool {
        self.h == other.h && self.w == other.w
    }

    pub(crate) fn shape_check(&self, other: &RasterMask, what: &str) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::invalid(format!(
                "{what}: shape mismatch {}x{} vs {}x{}",
                self.h, self.w, other.h, other.w
            )));
        }
        Ok(())
    }
}

/// Per-patch gate probabilities on the (H/s)×(W/s) grid, values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LowResMap {
    grid_h: usize,
    grid_w: usize,
    values: Vec<f64>,
}

impl LowResMap {
    pub fn from_values(grid_h: usize, grid_w: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid_h * grid_w {
            return Err(Error::invalid(format!(
                "gate map {}x{} needs {} values, got {}",
                grid_h,
                grid_w,
                grid_h * grid_w,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::invalid(format!("gate value {bad} outside [0, 1]")));
        }
        Ok(LowResMap { grid_h, grid_w, values })
    }

    pub fn grid_h(&self) -> usize {
        self.grid_h
    }

    pub fn grid_w(&self) -> usize {
        self.grid_w
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, gi: usize, gj: usize) -> f64 {
        self.values[gi * self.grid_w + gj]
    }
}

/// Raw (pre-activation) parameters of the whole patch grid: 2k values per
/// patch polygon plus one gate logit per patch — the direct stand-in for a
/// network's output head.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonField {
    pub grid_h: usize,
    pub grid_w: usize,
    pub k: usize,
    pub patch_side: usize,
    /// grid_h × grid_w × k × 2 raw reals; tanh maps them into (-1, 1).
    pub vertex_params: Vec<f64>,
    /// grid_h × grid_w raw reals; sigmoid maps them into (0, 1).
    pub gate_logits: Vec<f64>,
}

impl PolygonField {
    pub fn zeros(grid_h: usize, grid_w: usize, k: usize, patch_side: usize) -> Result<Self> {
        if grid_h == 0 || grid_w == 0 {
            return Err(Error::invalid("field grid must be at least 1x1"));
        }
        if k < 3 {
            return Err(Error::invalid(format!("field needs k >= 3, got {k}")));
        }
        if patch_side == 0 {
            return Err(Error::invalid("patch side must be at least 1"));
        }
        Ok(PolygonField {
            grid_h,
            grid_w,
            k,
            patch_side,
            vertex_params: vec![0.0; grid_h * grid_w * k * 2],
            gate_logits: vec![0.0; grid_h * grid_w],
        })
    }

    pub fn image_h(&self) -> usize {
        self.grid_h * self.patch_side
    }

    pub fn image_w(&self) -> usize {
        self.grid_w * self.patch_side
    }

    pub fn num_patches(&self) -> usize {
        self.grid_h * self.grid_w
    }

    /// Flat index of vertex parameter (patch gi, gj; vertex v; coord 0=x 1=y).
    pub fn vp_index(&self, gi: usize, gj: usize, v: usize, coord: usize) -> usize {
        ((gi * self.grid_w + gj) * self.k + v) * 2 + coord
    }

    pub fn gate_index(&self, gi: usize, gj: usize) -> usize {
        gi * self.grid_w + gj
    }

    pub fn set_vertex_param(&mut self, gi: usize, gj: usize, v: usize, coord: usize, value: f64) {
        let idx = self.vp_index(gi, gj, v, coord);
        self.vertex_params[idx] = value;
    }

    pub fn set_gate_logit(&mut self, gi: usize, gj: usize, value: f64) {
        let idx = self.gate_index(gi, gj);
        self.gate_logits[idx] = value;
    }
}

/// Decoded field: one polygon per patch and the gate probability map.
#[derive(Debug, Clone)]
pub struct DecodedField {
    pub grid_h: usize,
    pub grid_w: usize,
    pub k: usize,
    pub patch_side: usize,
    /// Row-major patch polygons.
    pub polygons: Vec<PatchPolygon>,
    pub gates: LowResMap,
}

/// Apply tanh to the vertex parameters and sigmoid to the gate logits.
pub fn decode(field: &PolygonField) -> DecodedField {
    let mut polygons = Vec::with_capacity(field.num_patches());
    for gi in 0..field.grid_h {
        for gj in 0..field.grid_w {
            let verts = (0..field.k)
                .map(|v| {
                    Vertex::new(
                        field.vertex_params[field.vp_index(gi, gj, v, 0)].tanh(),
                        field.vertex_params[field.vp_index(gi, gj, v, 1)].tanh(),
                    )
                })
                .collect();
            polygons.push(PatchPolygon::new(verts).expect("k >= 3"));
        }
    }
    let gates = field.gate_logits.iter().map(|&l| sigmoid(l)).collect();
    DecodedField {
        grid_h: field.grid_h,
        grid_w: field.grid_w,
        k: field.k,
        patch_side: field.patch_side,
        polygons,
        gates: LowResMap::from_values(field.grid_h, field.grid_w, gates).expect("sigmoid range"),
    }
}

/// Place patch rasters into their grid positions; patch (a, b) occupies rows
/// [a*s, (a+1)*s) and columns [b*s, (b+1)*s).
pub fn aggregate(patches: &[PatchRaster], grid_h: usize, grid_w: usize) -> Result<RasterMask> {
    if patches.len() != grid_h * grid_w {
        return Err(Error::invalid(format!(
            "expected {} patches for a {}x{} grid, got {}",
            grid_h * grid_w,
            grid_h,
            grid_w,
            patches.len()
        )));
    }
    let side = patches[0].side();
    if patches.iter().any(|p| p.side() != side) {
        return Err(Error::invalid("patches have inconsistent side lengths"));
    }
    let mut mask = RasterMask::zeros(grid_h * side, grid_w * side);
    for a in 0..grid_h {
        for b in 0..grid_w {
            let patch = &patches[a * grid_w + b];
            for i in 0..side {
                for j in 0..side {
                    mask.set(a * side + i, b * side + j, patch.get(i, j));
                }
            }
        }
    }
    Ok(mask)
}

/// Replicate each low-resolution cell over its s×s pixel block.
pub fn upsample_nearest(m: &LowResMap, factor: usize) -> RasterMask {
    assert!(factor >= 1, "upsampling factor must be at least 1");
    let mut mask = RasterMask::zeros(m.grid_h() * factor, m.grid_w() * factor);
    for gi in 0..m.grid_h() {
        for gj in 0..m.grid_w() {
            let v = m.get(gi, gj);
            for i in 0..factor {
                for j in 0..factor {
                    mask.set(gi * factor + i, gj * factor + j, v);
                }
            }
        }
    }
    mask
}

/// Elementwise product of the upsampled gate map and the polygon raster.
pub fn gate(up_m: &RasterMask, r_p: &RasterMask) -> Result<RasterMask> {
    up_m.shape_check(r_p, "gate")?;
    let values = up_m
        .values()
        .iter()
        .zip(r_p.values())
        .map(|(a, b)| a * b)
        .collect();
    Ok(RasterMask {
        h: up_m.h(),
        w: up_m.w(),
        values,
    })
}

/// All three maps produced by a forward pass. The loss needs the upsampled
/// gate map and the gated output; the raw polygon raster is kept for
/// inspection and ungated rendering.
#[derive(Debug, Clone)]
pub struct ForwardMaps {
    pub m_o: RasterMask,
    pub up_m: RasterMask,
    pub r_p: RasterMask,
}

/// Render a decoded field at an arbitrary per-patch resolution.
pub fn forward_decoded(
    decoded: &DecodedField,
    tri: &Triangulation,
    gamma: f64,
    out_side: usize,
) -> Result<ForwardMaps> {
    if tri.k() != decoded.k {
        return Err(Error::invalid(format!(
            "triangulation k={} does not match field k={}",
            tri.k(),
            decoded.k
        )));
    }
    let cfg = SoftRasterConfig::new(gamma, out_side)?;
    let patches: Vec<PatchRaster> = decoded
        .polygons
        .iter()
        .map(|poly| render_patch_any_resolution(poly, tri, out_side, &cfg))
        .collect::<Result<_>>()?;
    let r_p = aggregate(&patches, decoded.grid_h, decoded.grid_w)?;
    let up_m = upsample_nearest(&decoded.gates, out_side);
    let m_o = gate(&up_m, &r_p)?;
    Ok(ForwardMaps { m_o, up_m, r_p })
}

/// Full forward pass: decode, render every patch, aggregate, upsample, gate.
pub fn forward(field: &PolygonField, tri: &Triangulation, cfg: &SoftRasterConfig) -> Result<ForwardMaps> {
    if cfg.patch_side != field.patch_side {
        return Err(Error::invalid(format!(
            "raster config patch side {} does not match field patch side {}",
            cfg.patch_side, field.patch_side
        )));
    }
    forward_decoded(&decode(field), tri, cfg.gamma, field.patch_side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::regular_polygon_triangulation;

    #[test]
    fn decode_zero_params() {
        let field = PolygonField::zeros(2, 3, 4, 8).unwrap();
        let d = decode(&field);
        assert_eq!(d.polygons.len(), 6);
        for poly in &d.polygons {
            for v in poly.vertices() {
                assert_eq!((v.x, v.y), (0.0, 0.0));
            }
        }
        assert!(d.gates.values().iter().all(|&g| g == 0.5));
    }

    #[test]
    fn decode_inverts_atanh() {
        let mut field = PolygonField::zeros(1, 1, 4, 8).unwrap();
        field.vertex_params[0] = 0.9f64.atanh();
        let d = decode(&field);
        assert!((d.polygons[0].vertices()[0].x - 0.9).abs() < 1e-12);
    }

    #[test]
    fn decode_saturates_gates() {
        let mut field = PolygonField::zeros(1, 1, 4, 8).unwrap();
        field.gate_logits[0] = 20.0;
        let d = decode(&field);
        assert!(d.gates.get(0, 0) > 1.0 - 1e-8);
    }

    #[test]
    fn aggregate_places_blocks() {
        let tri = regular_polygon_triangulation(4).unwrap();
        let full = PatchPolygon::new(vec![
            Vertex::new(-1.0, -1.0),
            Vertex::new(1.0, -1.0),
            Vertex::new(1.0, 1.0),
            Vertex::new(-1.0, 1.0),
        ])
        .unwrap();
        let empty = PatchPolygon::new(vec![Vertex::new(0.0, 0.0); 4]).unwrap();
        let ones = crate::raster::render_patch_exact(&full, &tri, 4, 1).unwrap();
        let zeros = crate::raster::render_patch_exact(&empty, &tri, 4, 1).unwrap();
        let mask = aggregate(&[ones.clone(), zeros.clone(), zeros, ones], 2, 2).unwrap();
        assert_eq!((mask.h(), mask.w()), (8, 8));
        for i in 0..8 {
            for j in 0..8 {
                let expect = if (i < 4) == (j < 4) { 1.0 } else { 0.0 };
                assert_eq!(mask.get(i, j), expect, "({i},{j})");
            }
        }
    }

    #[test]
    fn aggregate_rejects_wrong_count() {
        let tri = regular_polygon_triangulation(4).unwrap();
        let poly = PatchPolygon::new(vec![Vertex::new(0.0, 0.0); 4]).unwrap();
        let p = crate::raster::render_patch_exact(&poly, &tri, 4, 1).unwrap();
        assert!(aggregate(&[p], 2, 2).is_err());
    }

    #[test]
    fn upsample_replicates_blocks() {
        let m = LowResMap::from_values(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let up = upsample_nearest(&m, 2);
        let expect = [
            [0.0, 0.0, 1.0, 1.0],
            [0.0, 0.0, 1.0, 1.0],
            [1.0, 1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(up.get(i, j), expect[i][j]);
            }
        }
        // factor 1 is the identity
        let id = upsample_nearest(&m, 1);
        assert_eq!(id.values(), m.values());
    }

    #[test]
    fn gate_examples() {
        let zeros = RasterMask::zeros(2, 2);
        let mut ones = RasterMask::zeros(2, 2);
        let mut r_p = RasterMask::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                ones.set(i, j, 1.0);
                r_p.set(i, j, 0.8);
            }
        }
        assert!(gate(&zeros, &r_p).unwrap().values().iter().all(|&v| v == 0.0));
        assert_eq!(gate(&ones, &r_p).unwrap().values(), r_p.values());
        let mut half = RasterMask::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                half.set(i, j, 0.5);
            }
        }
        assert!(gate(&half, &r_p)
            .unwrap()
            .values()
            .iter()
            .all(|&v| (v - 0.4).abs() < 1e-15));
        assert!(gate(&zeros, &RasterMask::zeros(3, 2)).is_err());
    }

    #[test]
    fn forward_zero_area_everywhere_is_dark() {
        let field = PolygonField::zeros(2, 2, 4, 8).unwrap();
        let tri = regular_polygon_triangulation(4).unwrap();
        let maps = forward(&field, &tri, &SoftRasterConfig::default()).unwrap();
        // Every pixel center is at least 0.1767 from the collapsed polygon at
        // the patch origin, so the raster (and the gated product) stay small.
        assert!(maps.m_o.values().iter().all(|&v| v <= 0.01));
    }

    #[test]
    fn forward_full_cover_saturated_gates() {
        let mut field = PolygonField::zeros(2, 2, 4, 8).unwrap();
        set_full_cover(&mut field, 20.0);
        let tri = regular_polygon_triangulation(4).unwrap();
        let maps = forward(&field, &tri, &SoftRasterConfig::default()).unwrap();
        assert!(maps.m_o.values().iter().all(|&v| v >= 0.99));
    }

    #[test]
    fn forward_half_gates_scale_the_raster() {
        let mut field = PolygonField::zeros(2, 2, 4, 8).unwrap();
        set_full_cover(&mut field, 0.0);
        let tri = regular_polygon_triangulation(4).unwrap();
        let maps = forward(&field, &tri, &SoftRasterConfig::default()).unwrap();
        for (mo, rp) in maps.m_o.values().iter().zip(maps.r_p.values()) {
            assert!((mo - 0.5 * rp).abs() < 1e-15);
        }
    }

    /// Vertex parameters for a near-full-cover square in every patch.
    fn set_full_cover(field: &mut PolygonField, gate_logit: f64) {
        assert_eq!(field.k, 4);
        let c = 0.999f64.atanh();
        let corners = [(-c, -c), (c, -c), (c, c), (-c, c)];
        for gi in 0..field.grid_h {
            for gj in 0..field.grid_w {
                for (v, (x, y)) in corners.iter().enumerate() {
                    field.set_vertex_param(gi, gj, v, 0, *x);
                    field.set_vertex_param(gi, gj, v, 1, *y);
                }
                field.set_gate_logit(gi, gj, gate_logit);
            }
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let mut field = PolygonField::zeros(2, 2, 5, 8).unwrap();
        for (i, p) in field.vertex_params.iter_mut().enumerate() {
            *p = (i as f64 * 0.37).sin();
        }
        for (i, l) in field.gate_logits.iter_mut().enumerate() {
            *l = (i as f64 * 0.7).cos();
        }
        let tri = regular_polygon_triangulation(5).unwrap();
        let a = forward(&field, &tri, &SoftRasterConfig::default()).unwrap();
        let b = forward(&field, &tri, &SoftRasterConfig::default()).unwrap();
        assert_eq!(a.m_o.values(), b.m_o.values());
        assert_eq!(a.up_m.values(), b.up_m.values());
        assert_eq!(a.r_p.values(), b.r_p.values());
    }

    #[test]
    fn gate_never_exceeds_either_input() {
        let mut up = RasterMask::zeros(3, 3);
        let mut rp = RasterMask::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                up.set(i, j, (i as f64 / 3.0 + 0.1).min(1.0));
                rp.set(i, j, (j as f64 / 3.0 + 0.2).min(1.0));
            }
        }
        let g = gate(&up, &rp).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(g.get(i, j) <= up.get(i, j).min(rp.get(i, j)));
            }
        }
    }
}
