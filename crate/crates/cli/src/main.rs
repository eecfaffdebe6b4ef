mod args;
mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

const THREADS_VAR: &str = "MEMCLUST_THREADS";

fn init_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| anyhow::anyhow!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let non_convergence = err
        .chain()
        .any(|e| matches!(e.downcast_ref(), Some(memclust::Error::NonConvergence { .. })));
    if non_convergence {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Cluster(a) => commands::cluster(a),
        Command::Baseline(a) => commands::baseline(a),
        Command::CompareEngines(a) => commands::compare_engines(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
