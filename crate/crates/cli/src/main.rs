use std::process::ExitCode;

fn main() -> ExitCode {
    headfit_cli::main_from_args(std::env::args_os())
}
