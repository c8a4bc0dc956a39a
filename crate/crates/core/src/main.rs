use std::io::Write;

use clap::Parser;

use blowtorch::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            // A closed pipe downstream (e.g. `| head`) is not an error here.
            let _ = writeln!(std::io::stdout().lock(), "{}", outcome.report.to_json_string());
            std::process::exit(outcome.exit_code);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
