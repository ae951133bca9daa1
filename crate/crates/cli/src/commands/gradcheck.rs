use anyhow::Result;

use patchpoly::gradcheck::{run as run_check, GradCheckConfig};

use crate::args::GradcheckArgs;

pub fn run(args: &GradcheckArgs) -> Result<u8> {
    let cfg = GradCheckConfig {
        seeds: args.seeds,
        tol: args.tol,
        ..GradCheckConfig::default()
    };
    let report = run_check(&cfg)?;
    println!(
        "checked {} parameters over {} seeds ({} below the 1e-8 magnitude floor skipped)",
        report.params_checked, report.seeds, report.params_skipped
    );
    match &report.worst {
        Some(w) => println!(
            "worst relative error {:.3e} at seed {} parameter {} (analytic {:.6e}, finite-difference {:.6e})",
            w.rel_error, w.seed, w.index, w.analytic, w.numeric
        ),
        None => println!("no parameters above the magnitude floor"),
    }
    if report.passed(args.tol) {
        println!("gradient check passed at tolerance {:.1e}", args.tol);
        Ok(0)
    } else {
        println!("gradient check FAILED at tolerance {:.1e}", args.tol);
        Ok(1)
    }
}
