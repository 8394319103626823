#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod output;
mod run;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::Cli;
use output::{manifest_path, reason_line, write_atomic, CliError, Manifest, Versions};

/// Subcommand words of the invocation, e.g. `solve exterior`, skipping leading global flags.
fn command_name(argv: &[String]) -> String {
    let mut words = Vec::new();
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--seed" || a == "--threads" {
            it.next();
        } else if a.starts_with('-') {
            if !words.is_empty() {
                break;
            }
        } else {
            words.push(a.as_str());
        }
    }
    words.join(" ")
}

fn execute(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let started = Instant::now();
    let art = run::dispatch(&cli.command, cli.seed)?;
    let outputs: Vec<String> = art.files.iter().map(|(p, _)| p.display().to_string()).collect();
    for (path, bytes) in &art.files {
        write_atomic(path, bytes)?;
    }
    let manifest = Manifest {
        command: command_name(argv),
        parameters: serde_json::to_value(&cli.command)?,
        argv,
        seed: cli.seed,
        threads: rayon::current_num_threads(),
        versions: Versions::current(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    for (path, _) in &art.files {
        write_atomic(&manifest_path(path), text.as_bytes())?;
    }
    if let Some(s) = art.summary {
        println!("{s}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let reason = e.to_string();
            let first = reason.lines().next().unwrap_or("bad arguments").trim_start_matches("error: ");
            let line = serde_json::json!({ "exit": 1, "kind": "config", "stage": null, "reason": first });
            eprintln!("{line}");
            return ExitCode::from(1);
        }
    };
    match execute(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", reason_line(&e));
            ExitCode::from(output::classify(&e).0 as u8)
        }
    }
}
