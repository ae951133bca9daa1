use anyhow::Result;

use patchpoly::{binarize, evaluate, Error};

use crate::args::EvalArgs;
use crate::commands::fmt_f64;

pub fn run(args: &EvalArgs) -> Result<u8> {
    if !(args.threshold > 0.0 && args.threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be in (0, 1), got {}",
            args.threshold
        ))
        .into());
    }
    let gt = patchpoly::io::read_mask_binary(&args.gt)?;
    let pred_soft = patchpoly::io::read_mask(&args.pred)?;
    if !gt.same_shape(&pred_soft) {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: ground truth {}x{}, prediction {}x{}",
            gt.h(),
            gt.w(),
            pred_soft.h(),
            pred_soft.w()
        ))
        .into());
    }
    let pred = binarize(&pred_soft, args.threshold);
    let report = evaluate(&gt, &pred)?;

    let mut csv = String::from("iou,dice,f1,wcov,fbound,occlusion_d\n");
    csv.push_str(&format!(
        "{},{},{},{},{},{}\n",
        fmt_f64(report.iou),
        fmt_f64(report.dice),
        fmt_f64(report.f1),
        fmt_f64(report.wcov),
        fmt_f64(report.fbound),
        fmt_f64(report.occlusion_d),
    ));
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}
