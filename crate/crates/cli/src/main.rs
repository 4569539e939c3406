mod args;
mod commands;
mod error;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::Cli;
use error::CliError;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    match commands::run(cli.command).and_then(|(o, out)| {
        let tables = o.emit(out.as_ref().and_then(|a| a.out.as_deref()))?;
        Ok((o, tables))
    }) {
        Ok((o, tables)) => {
            println!("command: {}", argv[1..].join(" "));
            if let Some(m) = &o.model {
                println!("model: {m}");
            }
            if let Some(s) = o.seed {
                println!("seed: {s}");
            }
            print!("{}", o.lines);
            print!("{tables}");
            println!("wall_time_s: {:.3}", start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => report_error(e),
    }
}

fn report_error(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}
