use std::process::ExitCode;

fn main() -> ExitCode {
    let (outcome, diagnostic) = sisfit_cli::run_from(std::env::args_os());
    print!("{}", outcome.stdout);
    if let Some(msg) = diagnostic {
        eprintln!("{}", msg.trim_end());
    }
    ExitCode::from(outcome.code as u8)
}
