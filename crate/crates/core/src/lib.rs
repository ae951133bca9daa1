//! Patch-wise polygon segmentation.
//!
//! An image is divided into s×s patches; each patch owns a k-vertex polygon
//! in normalized local coordinates plus a scalar object-presence probability.
//! A differentiable soft rasterizer turns every polygon into a local patch
//! image, the patches are aggregated into a full-resolution map, and the
//! upsampled probability map gates that map elementwise into the output
//! segmentation. The whole pipeline is differentiable, so a polygon field can
//! be fitted directly to a ground-truth mask with an adaptive-moment
//! optimizer, and the fitted field can be re-rendered at any resolution.
//!
//! Modules:
//! - [`geometry`]: polygon/triangle primitives and the fixed fan triangulation
//! - [`raster`]: the soft rasterizer, its analytic gradient, and a
//!   supersampling coverage oracle
//! - [`field`]: the patch grid, aggregation, upsampling, gating
//! - [`loss`]: soft dice + BCE and the backward pass to raw parameters
//! - [`fit`]: direct optimization of a field against a target mask
//! - [`gradcheck`]: finite-difference verification of the gradients
//! - [`metrics`]: IoU, Dice/F1, weighted coverage, boundary F-score,
//!   occlusion distance, stratification
//! - [`synth`]: analytic binary test shapes
//! - [`io`]: PGM masks and the plain-text field format

pub mod error;
pub mod field;
pub mod fit;
pub mod geometry;
pub mod gradcheck;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod raster;
pub mod synth;

pub use error::{Error, Result};
pub use field::{
    aggregate, decode, forward, forward_decoded, gate, upsample_nearest, DecodedField, ForwardMaps,
    LowResMap, PolygonField, RasterMask,
};
pub use fit::{binarize, fit, init_field, FitConfig, FitReport, TraceRecord};
pub use geometry::{
    point_in_triangle, point_segment_distance, random_convex_polygon,
    regular_polygon_triangulation, triangle_signed_distance, PatchPolygon, Triangulation, Vertex,
};
pub use loss::{bce_loss, dice_loss, loss_gradients, total_loss, FieldGradients, LossBreakdown};
pub use metrics::{
    dice_f1, evaluate, extract_contours, fbound, iou, occlusion_distance, stratify_by_occlusion,
    wcov, Contour, MetricReport,
};
pub use raster::{
    polygon_signed_distance, render_patch_any_resolution, render_patch_exact, render_patch_grad,
    render_patch_soft, PatchRaster, SoftRasterConfig,
};
pub use synth::{synth, SynthShape};
