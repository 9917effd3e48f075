mod args;
mod config;
mod exit;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use sssc_core::data::{self, SynthParams};
use sssc_core::metrics;
use sssc_core::pipeline::{self, BenchConfig};

use args::{BenchArgs, Cli, ClusterArgs, Command, EvalArgs, SynthArgs};
use exit::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(exit::USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Cluster(a) => cluster(a),
        Command::Bench(a) => bench(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}

fn synth(a: SynthArgs) -> Result<(), Failure> {
    let points = match a.points.as_slice() {
        [one] => vec![*one; a.dims.len()],
        many => many.to_vec(),
    };
    let ds = data::synth_subspaces(&SynthParams {
        ambient: a.ambient,
        dims: a.dims,
        points,
        noise_sigma: a.noise,
        corrupt_frac: a.corrupt_frac,
        seed: a.seed,
    })?;
    data::write_csv(&a.out, &ds.data)?;
    data::write_labels(&a.labels, ds.truth.labels())?;
    let flags: Vec<usize> = ds.corrupted.iter().map(|&c| usize::from(c)).collect();
    data::write_labels(corrupted_path(&a.labels), &flags)?;
    Ok(())
}

fn corrupted_path(labels: &Path) -> PathBuf {
    let mut s = labels.as_os_str().to_owned();
    s.push(".corrupted");
    PathBuf::from(s)
}

fn cluster(a: ClusterArgs) -> Result<(), Failure> {
    let cfg = config::resolve(&a.solver, a.k, a.seed)?;
    let input = data::load_csv(&a.input, a.header)?;
    let truth = a.truth.as_ref().map(data::load_labels).transpose()?;
    let report = pipeline::run_cluster(&input, truth.as_ref(), &cfg)?;

    let json = serde_json::to_string_pretty(&report)?;
    match &a.out {
        Some(path) => fs::write(path, format!("{json}\n"))?,
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{json}")?;
        }
    }
    let labels_path = a
        .labels_out
        .clone()
        .or_else(|| a.out.as_ref().map(|p| p.with_extension("labels")));
    if let Some(path) = labels_path {
        data::write_labels(path, &report.labels)?;
    }

    if !report.converged {
        return Err(Failure::not_converged(
            "a solver stopped at its iteration cap; the report was written with converged = false",
        ));
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<(), Failure> {
    let run = config::resolve(&a.solver, Some(a.dims.len()), a.seed)?;
    let report = pipeline::bench(&BenchConfig {
        ns: a.ns,
        ambient: a.ambient,
        dims: a.dims,
        noise_sigma: a.noise,
        repeats: a.repeats,
        run,
    })?;

    let mut out = std::io::stdout().lock();
    writeln!(out, "{:>8}  {:>16}  {:>12}  {:>8}", "n", "classification_s", "total_s", "accuracy")?;
    for r in &report.rows {
        writeln!(
            out,
            "{:>8}  {:>16.6}  {:>12.6}  {:>8.4}",
            r.n, r.classification_seconds, r.total_seconds, r.accuracy
        )?;
    }
    match report.slope {
        Some(s) => writeln!(out, "slope (log classification time vs log n): {s:.3}")?,
        None => writeln!(out, "slope: n/a (single n)")?,
    }
    if let Some(path) = &a.out {
        fs::write(path, format!("{}\n", serde_json::to_string_pretty(&report)?))?;
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<(), Failure> {
    let pred = data::load_labels(&a.pred)?;
    let truth = data::load_labels(&a.truth)?;
    let scores = metrics::score(&pred, &truth)?;
    println!("{}", json!({ "accuracy": scores.accuracy, "nmi": scores.nmi }));
    Ok(())
}
