use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use pets::app::{run, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let out = run(&config);
    let mut status = out.status;
    match &config.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.stdout) {
                eprintln!("{}: {e}", path.display());
                status = status.max(1);
            }
        }
        None => {
            let _ = std::io::stdout().write_all(out.stdout.as_bytes());
        }
    }
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(u8::try_from(status).unwrap_or(1))
}
