use std::process::ExitCode;

fn main() -> ExitCode {
    membench::cli::main()
}
