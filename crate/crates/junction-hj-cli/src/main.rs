use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(junction_hj_cli::run(std::env::args_os()))
}
