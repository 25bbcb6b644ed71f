use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use hdsign_cli::{configure_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = configure_threads().and_then(|()| run(&cli, &mut out));
    let _ = out.flush();
    match result {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
