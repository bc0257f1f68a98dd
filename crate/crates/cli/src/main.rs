mod args;
mod commands;
mod files;
mod manifest;

use std::process::ExitCode;

use clap::Parser;
use zeeman_core::Error;

use crate::args::Cli;
use crate::files::InvalidInput;

/// 2 invalid input, 3 numerical failure, 4 reconstruction breakdown,
/// 5 overlapping or degenerate spectra or a vanishing field.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InvalidInput>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidSpec(_)
            | Error::InvalidConfig(_)
            | Error::DimensionMismatch { .. }
            | Error::ZeroCoupling { .. }
            | Error::NodeMismatch { .. }
            | Error::InconsistentData(_),
        ) => 2,
        Some(Error::ReconstructionBreakdown { .. }) => 4,
        Some(Error::SpectraOverlap { .. } | Error::DegenerateSpectrum { .. } | Error::ZeroField(_)) => 5,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("zeeman {}: {err:#}", cli.command.name());
            ExitCode::from(exit_code(&err))
        }
    }
}
