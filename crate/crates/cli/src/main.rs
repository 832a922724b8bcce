use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(evcharge::app::run(std::env::args_os()))
}
