use std::process::ExitCode;

use clap::Parser;
use savor_cli::cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match savor_cli::run(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
