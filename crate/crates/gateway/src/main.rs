use std::process::ExitCode;

fn main() -> ExitCode {
    munidss::cli::run()
}
