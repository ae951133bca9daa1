//! Soft dice and binary cross-entropy losses, their unweighted sum, and the
//! analytic gradient of the total with respect to the raw field parameters.
//!
//! The BCE term reads the upsampled gate map, the dice term reads the gated
//! output mask. Gradients chain through the elementwise gating product, the
//! nearest-neighbor upsampling (block sums), the soft rasterizer, and the
//! tanh/sigmoid parameter maps.

use crate::error::{Error, Result};
use crate::field::{decode, forward_decoded, ForwardMaps, PolygonField, RasterMask};
use crate::geometry::Triangulation;
use crate::raster::{render_patch_grad, SoftRasterConfig};

/// Clamp applied to predictions before the logs in the cross-entropy.
pub const BCE_EPS: f64 = 1e-7;

/// The two loss terms and their unweighted sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub bce: f64,
    pub dice: f64,
    pub total: f64,
}

/// Soft dice loss 1 - (2TP + 1) / (2TP + FN + FP + 1) with soft counts.
/// Always in [0, 1).
pub fn dice_loss(y: &RasterMask, y_hat: &RasterMask) -> Result<f64> {
    y.shape_check(y_hat, "dice_loss")?;
    let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    for (t, p) in y.values().iter().zip(y_hat.values()) {
        tp += t * p;
        fp += (1.0 - t) * p;
        fn_ += t * (1.0 - p);
    }
    Ok(1.0 - (2.0 * tp + 1.0) / (2.0 * tp + fn_ + fp + 1.0))
}

/// Mean binary cross-entropy with predictions clamped to [eps, 1 - eps].
pub fn bce_loss(y: &RasterMask, y_hat: &RasterMask) -> Result<f64> {
    y.shape_check(y_hat, "bce_loss")?;
    let n = y.values().len() as f64;
    let mut acc = 0.0;
    for (t, p) in y.values().iter().zip(y_hat.values()) {
        let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
        acc -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
    }
    Ok(acc / n)
}

/// Combined objective: BCE on the upsampled gate map plus dice on the gated
/// output, unweighted.
pub fn total_loss(up_m: &RasterMask, m_o: &RasterMask, y: &RasterMask) -> Result<LossBreakdown> {
    let bce = bce_loss(y, up_m)?;
    let dice = dice_loss(y, m_o)?;
    Ok(LossBreakdown { bce, dice, total: bce + dice })
}

/// Gradients of the total loss with respect to the raw field parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGradients {
    pub vertex_params: Vec<f64>,
    pub gate_logits: Vec<f64>,
}

/// A forward pass bundled with its loss value and parameter gradients.
#[derive(Debug, Clone)]
pub struct LossEvaluation {
    pub breakdown: LossBreakdown,
    pub maps: ForwardMaps,
    pub gradients: FieldGradients,
}

/// Run the forward pass and backpropagate the total loss to the raw vertex
/// parameters and gate logits.
pub fn evaluate_with_gradients(
    field: &PolygonField,
    tri: &Triangulation,
    cfg: &SoftRasterConfig,
    y: &RasterMask,
) -> Result<LossEvaluation> {
    if cfg.patch_side != field.patch_side {
        return Err(Error::invalid(format!(
            "raster config patch side {} does not match field patch side {}",
            cfg.patch_side, field.patch_side
        )));
    }
    let decoded = decode(field);
    let maps = forward_decoded(&decoded, tri, cfg.gamma, field.patch_side)?;
    y.shape_check(&maps.m_o, "loss target")?;
    let breakdown = total_loss(&maps.up_m, &maps.m_o, y)?;

    let n = y.values().len() as f64;
    // Dice pieces: numerator N = 2TP + 1, denominator D = sum(y) + sum(y_hat) + 1.
    let mut tp = 0.0;
    let mut sum_y = 0.0;
    let mut sum_p = 0.0;
    for (t, p) in y.values().iter().zip(maps.m_o.values()) {
        tp += t * p;
        sum_y += t;
        sum_p += p;
    }
    let num = 2.0 * tp + 1.0;
    let den = sum_y + sum_p + 1.0;

    let s = field.patch_side;
    let mut vertex_grads = vec![0.0; field.vertex_params.len()];
    let mut gate_grads = vec![0.0; field.gate_logits.len()];
    let mut upstream = vec![0.0; s * s];

    for gi in 0..field.grid_h {
        for gj in 0..field.grid_w {
            let gate = decoded.gates.get(gi, gj);
            let mut block_gate_grad = 0.0;
            for i in 0..s {
                for j in 0..s {
                    let row = gi * s + i;
                    let col = gj * s + j;
                    let t = y.get(row, col);
                    let r_p = maps.r_p.get(row, col);
                    // d(dice)/d(m_o)
                    let g_mo = (num - 2.0 * t * den) / (den * den);
                    // d(bce)/d(up_m); zero where the clamp is active.
                    let up = maps.up_m.get(row, col);
                    let g_bce = if up > BCE_EPS && up < 1.0 - BCE_EPS {
                        (up - t) / (up * (1.0 - up) * n)
                    } else {
                        0.0
                    };
                    upstream[i * s + j] = g_mo * gate;
                    block_gate_grad += g_bce + g_mo * r_p;
                }
            }
            // Through the sigmoid to the raw logit.
            gate_grads[field.gate_index(gi, gj)] = block_gate_grad * gate * (1.0 - gate);

            let poly = &decoded.polygons[gi * field.grid_w + gj];
            let vgrads = render_patch_grad(poly, tri, cfg, &upstream)?;
            for (v, (gx, gy)) in vgrads.iter().enumerate() {
                // Through tanh: d(coord)/d(param) = 1 - coord^2.
                let vx = poly.vertices()[v].x;
                let vy = poly.vertices()[v].y;
                vertex_grads[field.vp_index(gi, gj, v, 0)] = gx * (1.0 - vx * vx);
                vertex_grads[field.vp_index(gi, gj, v, 1)] = gy * (1.0 - vy * vy);
            }
        }
    }

    Ok(LossEvaluation {
        breakdown,
        maps,
        gradients: FieldGradients {
            vertex_params: vertex_grads,
            gate_logits: gate_grads,
        },
    })
}

/// Gradient record of the total loss for the given field and target.
pub fn loss_gradients(
    field: &PolygonField,
    tri: &Triangulation,
    cfg: &SoftRasterConfig,
    y: &RasterMask,
) -> Result<FieldGradients> {
    Ok(evaluate_with_gradients(field, tri, cfg, y)?.gradients)
}
