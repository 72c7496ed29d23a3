use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use continuum_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(envelope) => {
            let text = match serde_json::to_string_pretty(&envelope) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: failed to serialize output: {e}");
                    return ExitCode::from(1);
                }
            };
            let mut stdout = std::io::stdout().lock();
            if writeln!(stdout, "{text}").is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
