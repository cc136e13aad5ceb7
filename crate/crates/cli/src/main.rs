use std::process::ExitCode;

use clap::Parser;
use linag_cli::{run, Cli, CliError, Exit};

fn try_main() -> anyhow::Result<Exit> {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    Ok(run(&cli, &mut stdout.lock())?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match try_main() {
        Ok(exit) => ExitCode::from(exit.code()),
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.downcast_ref::<CliError>().map_or(Exit::Invalid, CliError::exit);
            ExitCode::from(code.code())
        }
    }
}
