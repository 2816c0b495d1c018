use std::io::Write;
use std::process::ExitCode;

use layout_eval_cli::{parse_args, run, Invocation, EXIT_USAGE};

fn main() -> ExitCode {
    let config = match parse_args(std::env::args_os()) {
        Ok(Invocation::Run(config)) => config,
        Ok(Invocation::Usage(text)) => {
            print!("{text}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
        Ok(Invocation::Info(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(&config, &mut out) {
        Ok(_) => {
            let _ = out.flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
