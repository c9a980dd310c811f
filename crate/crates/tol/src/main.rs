use std::process::ExitCode;

fn main() -> ExitCode {
    tol::cli::run(std::env::args().skip(1))
}
