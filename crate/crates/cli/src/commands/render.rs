use anyhow::Result;

use patchpoly::{forward_decoded, regular_polygon_triangulation, Error, SoftRasterConfig};

use crate::args::RenderArgs;

pub fn run(args: &RenderArgs) -> Result<u8> {
    if !(args.scale.is_finite() && args.scale > 0.0) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {}", args.scale)).into());
    }
    let field = patchpoly::io::read_field(&args.field)?;
    let out_side = (args.scale * field.patch_side as f64).round() as usize;
    if out_side == 0 {
        return Err(Error::InvalidArgument(format!(
            "scale {} collapses the {}-pixel patches to zero size",
            args.scale, field.patch_side
        ))
        .into());
    }
    let tri = regular_polygon_triangulation(field.k)?;
    let maps = forward_decoded(&field, &tri, SoftRasterConfig::default().gamma, out_side)?;
    let mask = if args.no_gate { &maps.r_p } else { &maps.m_o };
    patchpoly::io::write_mask(&args.out, mask)?;
    Ok(0)
}
