use std::process::ExitCode;

use clap::Parser;
use ssc_cli::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        pool = pool.num_threads(n.max(1));
    }
    let result = pool
        .build()
        .map_err(anyhow::Error::from)
        .and_then(|pool| pool.install(|| run(&cli)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ssc: {e:#}");
            ExitCode::FAILURE
        }
    }
}
