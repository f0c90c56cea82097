use std::process::ExitCode;

fn main() -> ExitCode {
    gpclass::cli::run(std::env::args_os())
}
