use std::process::ExitCode;

use clap::Parser;

use krotov_lq_cli::args::Cli;
use krotov_lq_cli::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.into_manifest().and_then(|m| run(&m));
    match result {
        Ok(summary) => {
            print!("{}", summary.report);
            for path in &summary.artifacts {
                eprintln!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
