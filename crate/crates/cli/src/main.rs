use std::process::ExitCode;

use apd_cli::{run, Cli};
use clap::error::ErrorKind;
use clap::Parser;

fn fail(message: &str, code: u8) -> ExitCode {
    eprintln!("error: {}", message.trim().replace('\n', " "));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            // clap's first line carries the diagnostic; the rest is usage
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or_default();
            let mut message = first.trim_start_matches("error:").trim().to_string();
            let details: Vec<&str> = text.lines().skip(1).take_while(|l| !l.is_empty()).map(str::trim).collect();
            if !details.is_empty() {
                message = format!("{message} {}", details.join(", "));
            }
            return fail(&message, 2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&format!("{e:#}"), 1),
    }
}
