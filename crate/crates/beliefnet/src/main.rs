use std::process::ExitCode;

fn main() -> ExitCode {
    beliefnet::cli::main()
}
