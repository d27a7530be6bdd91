use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match noisyms::cli::run(std::env::args_os()) {
        Ok(text) => {
            // A closed pipe (`noisyms ... | head`) is not an error.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
