use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use genhess::rational::{parse_rat, to_f64};
use genhess_verifier::analyze::{analyze, load, Overrides};
use genhess_verifier::fixtures::corpus;
use genhess_verifier::probe::conjecture_probe;
use genhess_verifier::report::{Format, Report, ReportKind};
use genhess_verifier::suites::{run_suites, select, Corpus};

#[derive(Parser)]
#[command(name = "genhess", version, about = "Second-order variational analysis of piecewise quadratic functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Markdown,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Markdown => Format::Markdown,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute subdifferential, generalized Hessian, moduli and verdicts for a problem file.
    Analyze {
        problem: PathBuf,
        #[arg(long, value_parser = real)]
        eta: Option<f64>,
        #[arg(long, value_parser = real)]
        delta: Option<f64>,
        #[arg(long, value_parser = real)]
        gamma: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
    },
    /// Run one consistency suite, or `all`.
    Verify {
        suite: String,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
        /// Include wall-clock times (makes the output non-deterministic).
        #[arg(long)]
        timings: bool,
    },
    /// Search random instances for metric regularity without strong metric regularity.
    Probe {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
    },
    /// Inspect the fixture corpus.
    Fixtures {
        #[command(subcommand)]
        command: FixturesCommand,
    },
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Print fixture names, dimensions and descriptions.
    List,
}

/// A decimal or `p/q` literal.
fn real(s: &str) -> Result<f64, String> {
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    parse_rat(s).map(|r| to_f64(&r)).ok_or_else(|| format!("not a number: {s:?}"))
}

fn emit(report: &Report, format: OutFormat) -> ExitCode {
    print!("{}", report.render(format.into()));
    ExitCode::from(report.exit_code() as u8)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    Ok(match cli.command {
        Command::Analyze { problem, eta, delta, gamma, grid, format } => {
            let text = match std::fs::read_to_string(&problem).with_context(|| format!("reading {}", problem.display())) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return Ok(ExitCode::from(2));
                }
            };
            let inst = match load(&text, &Overrides { eta, delta, gamma, grid }) {
                Ok(i) => i,
                Err(e) => {
                    eprintln!("error: {}: {e}", problem.display());
                    return Ok(ExitCode::from(2));
                }
            };
            emit(&analyze(&inst, &problem.display().to_string()), format)
        }
        Command::Verify { suite, format, timings } => {
            let suites = match select(&suite) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(2));
                }
            };
            let corpus = Corpus::load();
            emit(&Report::new(ReportKind::Verify, run_suites(&suites, &corpus, timings)), format)
        }
        Command::Probe { seed, count, format } => {
            let out = conjecture_probe(seed, count);
            if out.summary.escalations > 0 {
                eprintln!("note: {} candidate counterexample(s) escalated; see the Escalations section", out.summary.escalations);
            }
            let mut report = Report::new(ReportKind::Probe, vec![out.result]);
            report.probe = Some(out.summary);
            emit(&report, format)
        }
        Command::Fixtures { command: FixturesCommand::List } => {
            for f in corpus() {
                println!("{:<22} n={}  {}", f.name, f.dim(), f.description);
            }
            ExitCode::SUCCESS
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
