use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use onetwo_cli::args::Cli;

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match onetwo_cli::execute(&cli) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.summary).expect("summary serializes");
            // a closed pipe (`| head`) is not a failure of the run
            let _ = writeln!(std::io::stdout(), "{text}");
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {} failed: {e:#}", cli.command.name());
            ExitCode::from(1)
        }
    }
}
