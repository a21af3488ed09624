use std::panic;
use std::process::ExitCode;

use botsift::args::Cli;
use botsift::{exit_code, run, UsageError, EXIT_INVARIANT, EXIT_USAGE};
use clap::Parser;

fn setup(cli: &Cli) -> Result<(), UsageError> {
    let level: log::LevelFilter = cli
        .log_level
        .parse()
        .map_err(|_| UsageError(format!("invalid log level {:?}", cli.log_level)))?;
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(UsageError("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| UsageError(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Err(e) = setup(&cli) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    match panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(EXIT_INVARIANT),
    }
}
