use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use hyperpstl_cli::{bench, exit_code, run_check, Cli, Command};

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Check(args) => {
            let report = run_check(&args)?;
            let v = &report.verdict;
            eprintln!(
                "{} (significance {:.3e}, {} tuples, {:?} engine, {:.2}s)",
                v.assertion,
                v.achieved_significance,
                v.total_tuples(),
                v.algorithm,
                v.wall_time
            );
            let json = report.to_json();
            match &args.report {
                Some(path) => std::fs::write(path, json + "\n")?,
                None => println!("{json}"),
            }
            Ok(exit_code(v.assertion))
        }
        Command::Bench(args) => bench::run_command(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
