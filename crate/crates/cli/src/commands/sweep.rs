use std::fmt::Write as _;

use anyhow::Result;

use patchpoly::{fit, regular_polygon_triangulation, FitConfig};

use crate::args::SweepArgs;
use crate::commands::{fmt_f64, pad_to_multiple};

fn dedup_sorted(list: &[usize], what: &str) -> Vec<usize> {
    let mut sorted = list.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != list.len() {
        eprintln!("warning: duplicate {what} values ignored");
    }
    sorted
}

pub fn run(args: &SweepArgs) -> Result<u8> {
    let gt = patchpoly::io::read_mask_binary(&args.gt)?;
    let k_list = dedup_sorted(&args.k_list, "k");
    let s_list = dedup_sorted(&args.s_list, "patch-side");

    let mut csv = String::from("k,s,iou,dice,seconds\n");
    for &k in &k_list {
        for &s in &s_list {
            let cell = run_cell(&gt, k, s, args);
            match cell {
                Ok((iou, dice, secs)) => {
                    writeln!(csv, "{k},{s},{},{},{}", fmt_f64(iou), fmt_f64(dice), fmt_f64(secs))?;
                }
                Err(err) => {
                    eprintln!("warning: k={k} s={s} failed: {err:#}");
                    writeln!(csv, "{k},{s},NaN,NaN,NaN")?;
                }
            }
        }
    }
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn run_cell(
    gt: &patchpoly::RasterMask,
    k: usize,
    s: usize,
    args: &SweepArgs,
) -> Result<(f64, f64, f64)> {
    let padded = pad_to_multiple(gt, s);
    let tri = regular_polygon_triangulation(k)?;
    let cfg = FitConfig {
        iters: args.iters,
        seed: args.seed,
        ..FitConfig::default()
    };
    let report = fit(&padded, k, s, &tri, &cfg)?;
    let last = report.trace.last().expect("trace is never empty");
    Ok((last.iou, last.dice, report.duration.as_secs_f64()))
}
