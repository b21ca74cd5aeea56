use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use crystorus_cli::{run, Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    // with CSV on stdout the report moves to stderr
    let csv_on_stdout = cli.out.is_none() && matches!(cli.command, Command::Dispersion | Command::Simulate);
    let mut data = io::stdout();
    let result = if csv_on_stdout {
        run(&cli, &mut data, &mut io::stderr())
    } else {
        run(&cli, &mut data, &mut io::stdout())
    };
    let _ = data.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
