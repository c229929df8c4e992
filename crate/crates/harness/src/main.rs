use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(mpsvd_harness::cli::run(std::env::args_os()))
}
