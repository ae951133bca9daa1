mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit codes: 0 success, 1 check failure, 2 usage, 3 I/O, 4 numeric.
fn classify(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<patchpoly::Error>() {
        Some(patchpoly::Error::InvalidArgument(_)) | Some(patchpoly::Error::UndefinedMetric(_)) => 2,
        Some(patchpoly::Error::Format { .. }) | Some(patchpoly::Error::Io { .. }) => 3,
        Some(patchpoly::Error::NonFiniteLoss { .. }) => 4,
        None => {
            if err.downcast_ref::<std::io::Error>().is_some() {
                3
            } else {
                2
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => commands::synth::run(&a),
        Command::Fit(a) => commands::fit::run(&a),
        Command::Render(a) => commands::render::run(&a),
        Command::Eval(a) => commands::eval::run(&a),
        Command::Sweep(a) => commands::sweep::run(&a),
        Command::Gradcheck(a) => commands::gradcheck::run(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}
