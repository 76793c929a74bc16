use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = multispec_cli::Cli::parse();
    match multispec_cli::run(cli) {
        Ok(outcome) => {
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            if outcome.flagged.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &outcome.flagged {
                    eprintln!("warning: {f}");
                }
                ExitCode::from(4)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
