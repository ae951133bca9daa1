use std::fmt::Write as _;

use anyhow::{Context, Result};

use patchpoly::{decode, fit, regular_polygon_triangulation, FitConfig};

use crate::args::FitArgs;
use crate::commands::{fmt_f64, pad_to_multiple};

pub fn run(args: &FitArgs) -> Result<u8> {
    let gt = patchpoly::io::read_mask_binary(&args.gt)?;
    let padded = pad_to_multiple(&gt, args.patch);
    let was_padded = padded.h() != gt.h() || padded.w() != gt.w();

    let tri = regular_polygon_triangulation(args.k)?;
    let cfg = FitConfig {
        iters: args.iters,
        lr: args.lr,
        gamma_start: args.gamma_start,
        gamma_end: args.gamma_end,
        seed: args.seed,
        ..FitConfig::default()
    };
    let report = fit(&padded, args.k, args.patch, &tri, &cfg)?;

    if let Some(path) = &args.out_mask {
        patchpoly::io::write_mask(path, &report.final_maps.m_o)?;
    }
    if let Some(path) = &args.out_field {
        patchpoly::io::write_field(path, &decode(&report.field))?;
    }
    if let Some(path) = &args.out_trace {
        let mut csv = String::new();
        if was_padded {
            writeln!(
                csv,
                "# gt {}x{} padded to {}x{} (patch {})",
                gt.h(),
                gt.w(),
                padded.h(),
                padded.w(),
                args.patch
            )?;
        }
        csv.push_str("iteration,bce,dice,total,iou\n");
        for r in &report.trace {
            writeln!(
                csv,
                "{},{},{},{},{}",
                r.iteration,
                fmt_f64(r.bce),
                fmt_f64(r.dice),
                fmt_f64(r.total),
                fmt_f64(r.iou)
            )?;
        }
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(0)
}
