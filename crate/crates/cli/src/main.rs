use std::io::Write;
use std::process::ExitCode;

use bpgd_cli::{run, Cli, Status};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = run(&cli, &mut out);
    let _ = out.flush();
    match result {
        Ok(Status::Completed) => ExitCode::SUCCESS,
        Ok(Status::BoundViolation) => {
            eprintln!("error: P_DQML <= P_S <= 2 P_DQML violated");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
