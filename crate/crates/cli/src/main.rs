mod cli;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use cli::Cli;

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<ftlab::Error>() {
        Some(ftlab::Error::Infeasible(_)) => 3,
        Some(
            ftlab::Error::Parse(_)
            | ftlab::Error::Contract(_)
            | ftlab::Error::Unsupported(_)
            | ftlab::Error::MissingConstant(_)
            | ftlab::Error::Io(_)
            | ftlab::Error::Json(_)
            | ftlab::Error::Csv(_),
        ) => 2,
        _ if e.downcast_ref::<commands::ConfigError>().is_some() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
