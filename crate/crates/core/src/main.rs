use std::process::ExitCode;

fn main() -> ExitCode {
    let code = trace_lab::cli::main_with(std::env::args_os());
    ExitCode::from(code as u8)
}
