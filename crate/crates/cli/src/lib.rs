//! Command-line pipeline and annotation API for bot account detection.

pub mod args;
pub mod commands;
pub mod serve;

use std::fmt;

use args::{Cli, Command};

/// Bad flag values detected after parsing; exits with code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;

/// Maps an error chain to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<botsift_core::Error>() {
            return match e {
                botsift_core::Error::Invariant(_) => EXIT_INVARIANT,
                _ => EXIT_DATA,
            };
        }
    }
    EXIT_DATA
}

/// Prints the resolved configuration to stderr, then runs the subcommand.
pub fn run(cli: &Cli) -> anyhow::Result<()> {
    eprintln!(
        "botsift {} seed={} config={}",
        env!("CARGO_PKG_VERSION"),
        cli.seed(),
        serde_json::to_string(cli)?
    );
    let seed = cli.seed();
    match &cli.command {
        Command::Synth(a) => commands::synth(a, cli.seed),
        Command::Ingest(a) => commands::ingest(a, seed),
        Command::Extract(a) => commands::extract(a),
        Command::LabelServe(a) => commands::label_serve(a),
        Command::Train(a) => commands::train(a, seed),
        Command::Predict(a) => commands::predict(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Importance(a) => commands::importance(a, seed),
    }
}
