//! `bunching`: command-line driver for the boson-bunching experiments.
//!
//! Exit status: 0 on success, 1 when a check fails, 2 on usage errors.

mod args;
mod commands;
mod manifest;
mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boson_bunching::Error;
use clap::Parser;

use args::{Cli, Command, Format, OutputArgs};
use commands::Report;
use manifest::{strip_manifest_flag, RunManifest};
use output::{sha256_file, to_json};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_)
        | Error::SizeLimit { .. }
        | Error::DimensionMismatch { .. }
        | Error::IndexOutOfRange { .. }
        | Error::PhotonCountMismatch { .. } => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn output_args(cmd: &Command) -> Option<OutputArgs> {
    match cmd {
        Command::Ratio(a) => Some(a.output.clone()),
        Command::Distribution(a) => Some(a.output.clone()),
        Command::Perturb(a) => Some(a.output.clone()),
        Command::Ternary(a) => Some(a.output.clone()),
        Command::Stability(a) => Some(a.output.clone()),
        Command::Search(a) => Some(OutputArgs {
            out: a.out.clone(),
            format: Format::Json,
        }),
        Command::DruryCheck(_) | Command::Replay(_) => None,
    }
}

fn render(report: &Report, format: Format) -> String {
    match (format, &report.table) {
        (Format::Csv, Some(t)) => t.to_csv(),
        _ => to_json(&report.json),
    }
}

/// Writes the report and returns the files it produced.
fn emit(cli: &Cli, report: &Report) -> std::io::Result<Vec<PathBuf>> {
    let out = output_args(&cli.command);
    let mut written = Vec::new();
    match out {
        Some(OutputArgs { out: Some(path), format }) => {
            fs::write(&path, render(report, format))?;
            written.push(path);
            if cli.json {
                print!("{}", to_json(&report.json));
            } else {
                for line in &report.summary {
                    println!("{line}");
                }
            }
        }
        Some(OutputArgs { out: None, format }) => {
            if cli.json {
                print!("{}", to_json(&report.json));
            } else {
                print!("{}", render(report, format));
            }
            for line in &report.summary {
                eprintln!("{line}");
            }
        }
        None => {
            if cli.json {
                print!("{}", to_json(&report.json));
            } else {
                for line in &report.summary {
                    println!("{line}");
                }
            }
        }
    }
    Ok(written)
}

fn replay(path: &Path) -> ExitCode {
    let manifest = match RunManifest::read(path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: cannot read manifest {}: {e}", path.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let exe = match std::env::current_exe() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    };
    let status = std::process::Command::new(exe)
        .args(&manifest.argv)
        .stdout(std::process::Stdio::null())
        .status();
    match status {
        Ok(s) if s.success() => {}
        Ok(s) => {
            eprintln!("replayed command exited with {s}");
            return ExitCode::from(EXIT_FAIL);
        }
        Err(e) => {
            eprintln!("error: cannot re-run command: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    }
    let mut identical = true;
    for (file, expected) in &manifest.checksums {
        match sha256_file(file.as_ref()) {
            Ok(actual) if &actual == expected => println!("identical {file}"),
            Ok(actual) => {
                identical = false;
                println!("DIFFERS   {file}: {actual} != {expected}");
            }
            Err(e) => {
                identical = false;
                println!("MISSING   {file}: {e}");
            }
        }
    }
    if identical {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: could not set thread count: {e}");
        }
    }

    let result = match &cli.command {
        Command::DruryCheck(a) => commands::drury_check(a),
        Command::Ratio(a) => commands::ratio(a),
        Command::Distribution(a) => commands::distribution(a),
        Command::Perturb(a) => commands::perturb(a),
        Command::Search(a) => commands::search(a),
        Command::Ternary(a) => commands::ternary(a),
        Command::Stability(a) => commands::stability(a),
        Command::Replay(a) => return replay(&a.manifest_file),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let written = match emit(&cli, &report) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    };

    if let Some(path) = &cli.manifest {
        let argv: Vec<String> = std::env::args().skip(1).collect();
        let mut manifest = RunManifest {
            command: cli.command.name().to_string(),
            argv: strip_manifest_flag(&argv),
            parameters: serde_json::to_value(&cli.command).unwrap_or_default(),
            seed: cli.command.seed(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: written,
            checksums: BTreeMap::new(),
        };
        if let Err(e) = manifest.checksum_outputs().and_then(|_| manifest.write(path)) {
            eprintln!("error: cannot write manifest: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    }

    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
