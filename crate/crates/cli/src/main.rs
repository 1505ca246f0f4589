use std::process::ExitCode;

use clap::Parser;
use qcldpc_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match qcldpc_cli::run(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcldpc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
