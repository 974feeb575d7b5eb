use std::process::ExitCode;

fn main() -> ExitCode {
    cvsep::cli::main_with_args(std::env::args_os())
}
