use anyhow::Result;

use patchpoly::synth::{synth, SynthShape};

use crate::args::SynthArgs;

pub fn run(args: &SynthArgs) -> Result<u8> {
    let mut shape = SynthShape::named(&args.shape, args.height, args.width)?;
    if let Some(r) = args.radius {
        apply_radius(&mut shape, r);
    }
    if let Some(sep) = args.separation {
        if let SynthShape::TwoBlobs { cx1, cx2, .. } = &mut shape {
            let mid = (*cx1 + *cx2) / 2.0;
            *cx1 = mid - sep / 2.0;
            *cx2 = mid + sep / 2.0;
        }
    }
    let mask = synth(&shape, args.height, args.width)?;
    patchpoly::io::write_mask(&args.out, &mask)?;
    Ok(0)
}

fn apply_radius(shape: &mut SynthShape, r: f64) {
    match shape {
        SynthShape::Disk { r: radius, .. } => *radius = r,
        SynthShape::Ring { r_out, r_in, .. } => {
            *r_out = r;
            *r_in = r / 2.0;
        }
        SynthShape::Crescent { r: radius, cut_r, .. } => {
            *radius = r;
            *cut_r = r;
        }
        SynthShape::TwoBlobs { r1, r2, .. } => {
            *r1 = r;
            *r2 = r;
        }
        SynthShape::Rect { .. } => {}
    }
}
