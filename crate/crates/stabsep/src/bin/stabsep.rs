use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(stabsep::cli::run(std::env::args_os()))
}
