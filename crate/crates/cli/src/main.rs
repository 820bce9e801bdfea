use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(subt_cli::run(std::env::args_os()))
}
