use std::process::ExitCode;

use expspline_burgers::cli::{execute, parse_args, CliError};

fn main() -> ExitCode {
    let result =
        parse_args(std::env::args_os()).and_then(|m| execute(&m, &mut std::io::stdout().lock()));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(CliError::Info(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string();
            if msg.starts_with("error:") {
                eprint!("{msg}");
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
