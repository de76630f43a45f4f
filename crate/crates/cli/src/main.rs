use std::io::Write;
use std::process::ExitCode;

use lens_ehg_cli::{init_threads, parse_args, run, UsageError, EXIT_CONFIG};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    if let Err(e) = init_threads() {
        eprintln!("lens-ehg: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    match parse_args(&argv) {
        Ok(cfg) => ExitCode::from(run(&cfg) as u8),
        Err(e) if e.is_informational() => {
            let _ = write!(std::io::stdout(), "{e}");
            ExitCode::SUCCESS
        }
        Err(UsageError::Clap(e)) => {
            let _ = e.print();
            ExitCode::from(EXIT_CONFIG as u8)
        }
        Err(e) => {
            eprintln!("lens-ehg: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
