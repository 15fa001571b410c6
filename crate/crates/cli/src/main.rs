mod args;
mod commands;
mod output;
mod source;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(avwc_core::Error),
    Io(String),
}

impl From<avwc_core::Error> for CliError {
    fn from(e: avwc_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let report = match &cli.command {
        Command::Bounds(a) => commands::bounds(cli.seed, a)?,
        Command::Classify(a) => commands::classify(a)?,
        Command::Simulate(a) => commands::simulate(cli.seed, a)?,
        Command::Partition(a) => commands::partition(cli.seed, a)?,
        Command::Sweep(a) => commands::sweep(cli.seed, a)?,
        Command::Export(a) => commands::export(a)?,
    };
    let text = output::header(cli.seed, &cli.command) + &report.body;
    output::emit(cli.out.as_deref(), &text)?;
    Ok(report.nonconverged)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("usage error: --threads must be positive");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: a solver did not converge; see the flags column");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                CliError::Io(_) => 1,
                _ => 2,
            })
        }
    }
}
