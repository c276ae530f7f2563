use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(minrep_cli::run(std::env::args_os()))
}
