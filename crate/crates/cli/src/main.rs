use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use podles_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = RunConfig::resolve(&cli.options).and_then(|cfg| {
        let report = run(&cli.command, &cfg)?;
        if cfg.output.is_none() {
            std::io::stdout().write_all(report.text.as_bytes())?;
        }
        Ok(report.exit_code)
    });
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
