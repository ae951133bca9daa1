//! Finite-difference verification of the analytic loss gradients.
//!
//! The numeric side is built from forward evaluations of the total loss only,
//! so it stays independent of the analytic backward path it checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{forward, PolygonField, RasterMask};
use crate::geometry::{regular_polygon_triangulation, Triangulation};
use crate::loss::{loss_gradients, total_loss, FieldGradients};
use crate::raster::SoftRasterConfig;

/// Central finite differences of the total loss over every raw parameter.
pub fn finite_diff_gradients(
    field: &PolygonField,
    tri: &Triangulation,
    cfg: &SoftRasterConfig,
    y: &RasterMask,
    h: f64,
) -> Result<FieldGradients> {
    let mut probe = field.clone();
    let eval = |f: &PolygonField| -> Result<f64> {
        let maps = forward(f, tri, cfg)?;
        Ok(total_loss(&maps.up_m, &maps.m_o, y)?.total)
    };
    let mut vertex_params = vec![0.0; field.vertex_params.len()];
    for i in 0..field.vertex_params.len() {
        let orig = field.vertex_params[i];
        probe.vertex_params[i] = orig + h;
        let up = eval(&probe)?;
        probe.vertex_params[i] = orig - h;
        let down = eval(&probe)?;
        probe.vertex_params[i] = orig;
        vertex_params[i] = (up - down) / (2.0 * h);
    }
    let mut gate_logits = vec![0.0; field.gate_logits.len()];
    for i in 0..field.gate_logits.len() {
        let orig = field.gate_logits[i];
        probe.gate_logits[i] = orig + h;
        let up = eval(&probe)?;
        probe.gate_logits[i] = orig - h;
        let down = eval(&probe)?;
        probe.gate_logits[i] = orig;
        gate_logits[i] = (up - down) / (2.0 * h);
    }
    Ok(FieldGradients { vertex_params, gate_logits })
}

/// Settings for a gradient-check run over random small instances.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckConfig {
    pub seeds: usize,
    pub tol: f64,
    /// Central-difference step on the raw parameters.
    pub h: f64,
    /// Raster sharpness used for the checked instances.
    pub gamma: f64,
    /// Parameters with |analytic| below this are skipped.
    pub min_magnitude: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            seeds: 20,
            tol: 1e-3,
            h: 1e-4,
            gamma: 20.0,
            min_magnitude: 1e-8,
        }
    }
}

/// The parameter with the largest relative disagreement.
#[derive(Debug, Clone)]
pub struct WorstParameter {
    pub seed: u64,
    /// Flat parameter index: vertex parameters first, then gate logits.
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub seeds: usize,
    pub params_checked: usize,
    pub params_skipped: usize,
    pub worst: Option<WorstParameter>,
}

impl GradCheckReport {
    pub fn worst_rel_error(&self) -> f64 {
        self.worst.as_ref().map_or(0.0, |w| w.rel_error)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.worst_rel_error() <= tol
    }
}

/// Random fit-style instance: 16×16 target, 2×2 patch grid, k alternating
/// between 4 and 5 with the seed. Patch polygons are random convex shapes, so
/// the rendered value is continuous in every parameter and the central
/// difference at a finite step is a faithful probe of the derivative.
fn random_instance(seed: u64) -> Result<(PolygonField, Triangulation, RasterMask)> {
    let k = if seed % 2 == 0 { 4 } else { 5 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(1));
    let mut field = PolygonField::zeros(2, 2, k, 8)?;
    for gi in 0..2 {
        for gj in 0..2 {
            let poly = crate::geometry::random_convex_polygon(k, &mut rng);
            for (v, vert) in poly.vertices().iter().enumerate() {
                field.set_vertex_param(gi, gj, v, 0, vert.x.atanh());
                field.set_vertex_param(gi, gj, v, 1, vert.y.atanh());
            }
            let logit: f64 = rng.gen_range(-2.0..2.0);
            field.set_gate_logit(gi, gj, logit);
        }
    }
    let y = RasterMask::from_values(
        16,
        16,
        (0..256).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect(),
    )?;
    let tri = regular_polygon_triangulation(k)?;
    Ok((field, tri, y))
}

/// Compare analytic and finite-difference gradients over random instances.
pub fn run(cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    if cfg.seeds == 0 {
        return Err(Error::invalid("gradient check needs at least one seed"));
    }
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut worst: Option<WorstParameter> = None;
    for seed in 0..cfg.seeds as u64 {
        let (field, tri, y) = random_instance(seed)?;
        let raster = SoftRasterConfig::new(cfg.gamma, field.patch_side)?;
        let analytic = loss_gradients(&field, &tri, &raster, &y)?;
        let numeric = finite_diff_gradients(&field, &tri, &raster, &y, cfg.h)?;
        let pairs = analytic
            .vertex_params
            .iter()
            .chain(&analytic.gate_logits)
            .zip(numeric.vertex_params.iter().chain(&numeric.gate_logits));
        for (index, (a, f)) in pairs.enumerate() {
            if a.abs() < cfg.min_magnitude {
                skipped += 1;
                continue;
            }
            checked += 1;
            let rel = (a - f).abs() / a.abs().max(f.abs());
            if worst.as_ref().map_or(true, |w| rel > w.rel_error) {
                worst = Some(WorstParameter {
                    seed,
                    index,
                    analytic: *a,
                    numeric: *f,
                    rel_error: rel,
                });
            }
        }
    }
    Ok(GradCheckReport {
        seeds: cfg.seeds,
        params_checked: checked,
        params_skipped: skipped,
        worst,
    })
}
