use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(sumdim_cli::run(std::env::args_os()))
}
