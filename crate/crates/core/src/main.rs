use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(wicksurf::cli::run(std::env::args_os()))
}
