//! Direct first-order fitting of a polygon field to a ground-truth mask.
//!
//! There is no network here: the per-patch parameters themselves are the
//! optimization variables. Each step evaluates the analytic gradients of the
//! total loss and applies an adaptive-moment update; the raster sharpness is
//! annealed linearly over the run so early iterations see wide, soft
//! gradients and late iterations see near-binary patches.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{ForwardMaps, PolygonField, RasterMask};
use crate::geometry::{PatchPolygon, Triangulation};
use crate::loss::evaluate_with_gradients;
use crate::metrics;
use crate::raster::SoftRasterConfig;

/// Hyperparameters of a fit run. All fields have working defaults; the
/// values are reproducible from the seed alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub iters: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Raster sharpness at iteration 0.
    pub gamma_start: f64,
    /// Raster sharpness at the final iteration.
    pub gamma_end: f64,
    pub seed: u64,
    /// Radius of the regular polygon every patch is initialized to.
    pub init_radius: f64,
    /// Half-width of the uniform jitter added to the raw vertex parameters.
    pub init_jitter: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            iters: 400,
            lr: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            gamma_start: 10.0,
            gamma_end: 40.0,
            seed: 0,
            init_radius: 0.9,
            init_jitter: 0.05,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::invalid(format!("learning rate must be positive, got {}", self.lr)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::invalid(format!("{name} must be in [0, 1), got {b}")));
            }
        }
        if !(self.gamma_start > 0.0 && self.gamma_end >= self.gamma_start) {
            return Err(Error::invalid(format!(
                "gamma schedule must satisfy 0 < start <= end, got {} -> {}",
                self.gamma_start, self.gamma_end
            )));
        }
        if !(self.init_radius > 0.0 && self.init_radius <= 1.0) {
            return Err(Error::invalid(format!(
                "init radius must be in (0, 1], got {}",
                self.init_radius
            )));
        }
        if self.init_jitter < 0.0 {
            return Err(Error::invalid(format!(
                "init jitter must be non-negative, got {}",
                self.init_jitter
            )));
        }
        Ok(())
    }

    /// Linearly annealed sharpness at iteration `i` of `iters`.
    pub fn gamma_at(&self, i: usize, iters: usize) -> f64 {
        if iters == 0 {
            return self.gamma_end;
        }
        self.gamma_start + (self.gamma_end - self.gamma_start) * i as f64 / iters as f64
    }
}

/// One row of the optimization trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub bce: f64,
    pub dice: f64,
    pub total: f64,
    /// IoU of the binarized output against the target at this iteration.
    pub iou: f64,
}

/// Everything a fit run produces: the per-iteration trace (iters + 1 records
/// including initialization), the final field, its forward maps at the final
/// sharpness, and the wall-clock duration.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub trace: Vec<TraceRecord>,
    pub field: PolygonField,
    pub final_maps: ForwardMaps,
    pub duration: Duration,
}

/// Initial field: every patch holds the same regular k-gon of
/// `cfg.init_radius` (mapped through atanh to raw parameters) plus seeded
/// uniform jitter; gate logits start at zero.
pub fn init_field(
    grid_h: usize,
    grid_w: usize,
    k: usize,
    patch_side: usize,
    cfg: &FitConfig,
) -> Result<PolygonField> {
    cfg.validate()?;
    let mut field = PolygonField::zeros(grid_h, grid_w, k, patch_side)?;
    let base = PatchPolygon::regular(k, cfg.init_radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for gi in 0..grid_h {
        for gj in 0..grid_w {
            for (v, vert) in base.vertices().iter().enumerate() {
                for (coord, value) in [(0, vert.x), (1, vert.y)] {
                    let jitter = if cfg.init_jitter > 0.0 {
                        rng.gen_range(-cfg.init_jitter..=cfg.init_jitter)
                    } else {
                        0.0
                    };
                    let idx = field.vp_index(gi, gj, v, coord);
                    field.vertex_params[idx] = value.atanh() + jitter;
                }
            }
        }
    }
    Ok(field)
}

/// Pixelwise threshold: values >= threshold map to 1, the rest to 0.
pub fn binarize(m: &RasterMask, threshold: f64) -> RasterMask {
    let values = m
        .values()
        .iter()
        .map(|&v| if v >= threshold { 1.0 } else { 0.0 })
        .collect();
    RasterMask::from_values(m.h(), m.w(), values).expect("binary values")
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam { m: vec![0.0; n], v: vec![0.0; n] }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], cfg: &FitConfig, t: usize) {
        let bias1 = 1.0 - cfg.beta1.powi(t as i32);
        let bias2 = 1.0 - cfg.beta2.powi(t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * g;
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g * g;
            let m_hat = self.m[i] / bias1;
            let v_hat = self.v[i] / bias2;
            params[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
}

/// Fit a polygon field to a binary target mask by adaptive-moment gradient
/// descent on the total loss.
pub fn fit(
    y: &RasterMask,
    k: usize,
    patch_side: usize,
    tri: &Triangulation,
    cfg: &FitConfig,
) -> Result<FitReport> {
    cfg.validate()?;
    if tri.k() != k {
        return Err(Error::invalid(format!(
            "triangulation k={} does not match requested k={}",
            tri.k(),
            k
        )));
    }
    if patch_side == 0 || y.h() % patch_side != 0 || y.w() % patch_side != 0 {
        return Err(Error::invalid(format!(
            "mask size {}x{} is not a multiple of patch side {}",
            y.h(),
            y.w(),
            patch_side
        )));
    }
    let started = Instant::now();
    let grid_h = y.h() / patch_side;
    let grid_w = y.w() / patch_side;
    let mut field = init_field(grid_h, grid_w, k, patch_side, cfg)?;

    let mut adam_vertices = Adam::new(field.vertex_params.len());
    let mut adam_gates = Adam::new(field.gate_logits.len());
    let mut trace = Vec::with_capacity(cfg.iters + 1);

    for i in 0..cfg.iters {
        let raster = SoftRasterConfig::new(cfg.gamma_at(i, cfg.iters), patch_side)?;
        let eval = evaluate_with_gradients(&field, tri, &raster, y)?;
        if !eval.breakdown.total.is_finite() {
            return Err(Error::NonFiniteLoss { iteration: i });
        }
        trace.push(record(i, &eval.breakdown, &eval.maps, y)?);
        adam_vertices.step(&mut field.vertex_params, &eval.gradients.vertex_params, cfg, i + 1);
        adam_gates.step(&mut field.gate_logits, &eval.gradients.gate_logits, cfg, i + 1);
    }

    let raster = SoftRasterConfig::new(cfg.gamma_end, patch_side)?;
    let eval = evaluate_with_gradients(&field, tri, &raster, y)?;
    if !eval.breakdown.total.is_finite() {
        return Err(Error::NonFiniteLoss { iteration: cfg.iters });
    }
    trace.push(record(cfg.iters, &eval.breakdown, &eval.maps, y)?);

    Ok(FitReport {
        trace,
        field,
        final_maps: eval.maps,
        duration: started.elapsed(),
    })
}

fn record(
    iteration: usize,
    breakdown: &crate::loss::LossBreakdown,
    maps: &ForwardMaps,
    y: &RasterMask,
) -> Result<TraceRecord> {
    let iou = metrics::iou(y, &binarize(&maps.m_o, 0.5))?;
    Ok(TraceRecord {
        iteration,
        bce: breakdown.bce,
        dice: breakdown.dice,
        total: breakdown.total,
        iou,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::decode;
    use crate::geometry::regular_polygon_triangulation;
    use crate::metrics::iou;
    use crate::synth::{synth, SynthShape};

    #[test]
    fn init_decodes_to_regular_polygon() {
        let cfg = FitConfig { init_jitter: 0.0, ..Default::default() };
        let field = init_field(2, 2, 4, 8, &cfg).unwrap();
        let d = decode(&field);
        for poly in &d.polygons {
            for (v, vert) in poly.vertices().iter().enumerate() {
                let angle = (2 * v + 1) as f64 * std::f64::consts::PI / 4.0;
                assert!((vert.x - 0.9 * angle.cos()).abs() < 1e-9);
                assert!((vert.y - 0.9 * angle.sin()).abs() < 1e-9);
            }
        }
        assert!(d.gates.values().iter().all(|&g| g == 0.5));
    }

    #[test]
    fn init_is_seed_deterministic() {
        let cfg = FitConfig::default();
        let a = init_field(3, 2, 5, 8, &cfg).unwrap();
        let b = init_field(3, 2, 5, 8, &cfg).unwrap();
        assert_eq!(a, b);
        let other = init_field(3, 2, 5, 8, &FitConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn binarize_threshold_is_inclusive() {
        let m = RasterMask::from_values(1, 3, vec![0.4999, 0.5, 1.0]).unwrap();
        let b = binarize(&m, 0.5);
        assert_eq!(b.values(), &[0.0, 1.0, 1.0]);
        assert_eq!(binarize(&b, 0.5).values(), b.values()); // idempotent on binary input
    }

    #[test]
    fn fit_rejects_ragged_dims() {
        let y = RasterMask::zeros(20, 16);
        let tri = regular_polygon_triangulation(4).unwrap();
        assert!(fit(&y, 4, 8, &tri, &FitConfig::default()).is_err());
    }

    #[test]
    fn fit_all_zeros_collapses_gates() {
        let y = RasterMask::zeros(32, 32);
        let tri = regular_polygon_triangulation(4).unwrap();
        let cfg = FitConfig { iters: 200, ..Default::default() };
        let report = fit(&y, 4, 8, &tri, &cfg).unwrap();
        assert_eq!(report.trace.len(), 201);
        assert!(report.final_maps.m_o.mean() <= 0.01, "mean {}", report.final_maps.m_o.mean());
    }

    #[test]
    fn fit_all_ones_reaches_full_iou() {
        let y = RasterMask::from_values(32, 32, vec![1.0; 32 * 32]).unwrap();
        let tri = regular_polygon_triangulation(4).unwrap();
        let cfg = FitConfig { iters: 200, ..Default::default() };
        let report = fit(&y, 4, 8, &tri, &cfg).unwrap();
        let final_iou = iou(&y, &binarize(&report.final_maps.m_o, 0.5)).unwrap();
        assert_eq!(final_iou, 1.0);
    }

    #[test]
    fn fit_disk_beats_the_gate_map_alone() {
        let y = synth(&SynthShape::named("disk", 64, 64).unwrap(), 64, 64).unwrap();
        let tri = regular_polygon_triangulation(5).unwrap();
        let report = fit(&y, 5, 8, &tri, &FitConfig::default()).unwrap();
        let iou_out = iou(&y, &binarize(&report.final_maps.m_o, 0.5)).unwrap();
        let iou_gates = iou(&y, &binarize(&report.final_maps.up_m, 0.5)).unwrap();
        assert!(iou_out >= 0.95, "output IoU {iou_out}");
        assert!(iou_out > iou_gates, "output {iou_out} vs gates {iou_gates}");
    }

    #[test]
    fn fit_disk_suppresses_outside_gates() {
        let y = synth(&SynthShape::named("disk", 64, 64).unwrap(), 64, 64).unwrap();
        let tri = regular_polygon_triangulation(5).unwrap();
        let report = fit(&y, 5, 8, &tri, &FitConfig::default()).unwrap();
        let gates = decode(&report.field).gates;
        for gi in 0..8 {
            for gj in 0..8 {
                let mut block_fg = 0.0;
                for i in 0..8 {
                    for j in 0..8 {
                        block_fg += y.get(gi * 8 + i, gj * 8 + j);
                    }
                }
                if block_fg == 0.0 {
                    assert!(
                        gates.get(gi, gj) <= 0.1,
                        "outside patch ({gi},{gj}) gate {}",
                        gates.get(gi, gj)
                    );
                }
            }
        }
    }

    #[test]
    fn fit_is_bitwise_deterministic() {
        let y = synth(&SynthShape::named("two_blobs", 32, 32).unwrap(), 32, 32).unwrap();
        let tri = regular_polygon_triangulation(4).unwrap();
        let cfg = FitConfig { iters: 50, ..Default::default() };
        let a = fit(&y, 4, 8, &tri, &cfg).unwrap();
        let b = fit(&y, 4, 8, &tri, &cfg).unwrap();
        let bits = |f: &PolygonField| -> Vec<u64> {
            f.vertex_params
                .iter()
                .chain(&f.gate_logits)
                .map(|x| x.to_bits())
                .collect()
        };
        assert_eq!(bits(&a.field), bits(&b.field));
        for (ra, rb) in a.trace.iter().zip(&b.trace) {
            assert_eq!(ra.total.to_bits(), rb.total.to_bits());
        }
    }

    #[test]
    fn loss_decreases_on_acceptance_shapes() {
        let tri = regular_polygon_triangulation(5).unwrap();
        for name in ["disk", "rect", "ring", "crescent", "two_blobs"] {
            let y = synth(&SynthShape::named(name, 64, 64).unwrap(), 64, 64).unwrap();
            let report = fit(&y, 5, 8, &tri, &FitConfig::default()).unwrap();
            let first = report.trace.first().unwrap().total;
            let last = report.trace.last().unwrap().total;
            assert!(last <= first, "{name}: {first} -> {last}");
            // Smoothed over a 50-iteration window the loss is non-increasing.
            let window = 50;
            let totals: Vec<f64> = report.trace.iter().map(|r| r.total).collect();
            let smooth: Vec<f64> = totals
                .windows(window)
                .map(|w| w.iter().sum::<f64>() / window as f64)
                .collect();
            for pair in smooth.windows(2) {
                assert!(
                    pair[1] <= pair[0] + 1e-9,
                    "{name}: smoothed loss rose {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn refinement_improves_on_acceptance_shapes() {
        let tri = regular_polygon_triangulation(5).unwrap();
        for name in ["disk", "rect", "ring", "crescent", "two_blobs"] {
            let y = synth(&SynthShape::named(name, 64, 64).unwrap(), 64, 64).unwrap();
            let report = fit(&y, 5, 8, &tri, &FitConfig::default()).unwrap();
            let iou_out = iou(&y, &binarize(&report.final_maps.m_o, 0.5)).unwrap();
            let iou_gates = iou(&y, &binarize(&report.final_maps.up_m, 0.5)).unwrap();
            assert!(iou_out >= iou_gates, "{name}: output {iou_out} vs gates {iou_gates}");
        }
    }
}
