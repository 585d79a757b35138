use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(memloop::cli::dispatch(std::env::args()) as u8)
}
