use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(tensorid_cli::run(std::env::args_os()) as u8)
}
