use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use cuspidal::verify::{self, write_atomic};
use cuspidal::{CheckSet, FieldTag, GridSpec, HarnessConfig, LemmaPart, Report};

/// Numerical verification suite for SL(3, F)/H.
#[derive(Parser, Debug)]
#[command(name = "verify", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Restrict to one field: R, C or H.
    #[arg(long, global = true)]
    field: Option<FieldTag>,

    /// Log-power r of the test function.
    #[arg(long, global = true)]
    r: Option<f64>,

    /// r₁ of lemma part (i).
    #[arg(long, global = true)]
    r1: Option<f64>,

    /// Lemma part: i, ii, iii or iv.
    #[arg(long, global = true)]
    part: Option<LemmaPart>,

    /// Comma-separated ε values of the divergence scan.
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Option<Vec<f64>>,

    /// Grid overrides, e.g. `rays=4,radii=5,count=7`.
    #[arg(long, global = true)]
    grid: Option<String>,

    /// Relative tolerance of the lemma and bound quadratures.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Samples per field of the Φ check.
    #[arg(long, global = true)]
    samples: Option<usize>,

    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// JSON report path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// CSV path; one file per table when there are several.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Parabolic catalog, σ-classes and the perturbed control
    Structure,
    /// Closed-form Φ against the matrix oracle
    Phi,
    /// One-dimensional integral bounds over a κ grid
    Lemma,
    /// Transform bounds for R and C over a grid of t
    Prop,
    /// Iterated against direct transform over R
    Iterated,
    /// Shell growth of the divergent integrals over H
    Divergence,
    /// Everything above plus the quadrature references
    All,
}

impl Command {
    fn set(self) -> CheckSet {
        match self {
            Command::Structure => CheckSet::Structure,
            Command::Phi => CheckSet::Phi,
            Command::Lemma => CheckSet::Lemma,
            Command::Prop => CheckSet::Prop,
            Command::Iterated => CheckSet::Iterated,
            Command::Divergence => CheckSet::Divergence,
            Command::All => CheckSet::All,
        }
    }
}

fn config(cli: &Cli) -> cuspidal::Result<HarnessConfig> {
    let mut cfg = HarnessConfig {
        field: cli.field,
        r: cli.r,
        r1: cli.r1,
        part: cli.part,
        seed: cli.seed,
        out: cli.out.clone(),
        ..HarnessConfig::default()
    };
    if let Some(g) = &cli.grid {
        cfg.grid = GridSpec::parse(g)?;
    }
    if let Some(e) = &cli.eps {
        cfg.eps = e.clone();
    }
    if let Some(t) = cli.tol {
        cfg.quad.rel_tol = t;
    }
    if let Some(n) = cli.samples {
        cfg.samples = n;
    }
    Ok(cfg)
}

fn csv_path(base: &Path, id: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}.{id}.{ext}"))
}

fn write_outputs(report: &Report, cli: &Cli) -> cuspidal::Result<()> {
    if let Some(p) = &cli.out {
        write_atomic(p, &report.to_json()?)?;
    }
    if let Some(p) = &cli.csv {
        let tables = report.csv_tables();
        if tables.len() == 1 {
            write_atomic(p, &tables[0].1)?;
        } else {
            for (id, csv) in &tables {
                write_atomic(&csv_path(p, id), csv)?;
            }
        }
    }
    Ok(())
}

fn usage_error(msg: &str) -> ExitCode {
    let mut cmd = Cli::command();
    eprintln!("error: {msg}\n\n{}", cmd.render_usage());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let set = cli.command.set();
    let cfg = match config(&cli).and_then(|c| c.validate_for(set).map(|_| c)) {
        Ok(c) => c,
        Err(e) => return usage_error(&e.to_string()),
    };
    if let Err(e) = verify::thread_override() {
        return usage_error(&e.to_string());
    }
    let report = match verify::run(set, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for c in &report.checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("{status} {} ({:.1} s)", c.check_id, c.wall_time_ms / 1e3);
        for e in c.errors.iter().take(3) {
            println!("     {e}");
        }
        if c.errors.len() > 3 {
            println!("     ... {} more", c.errors.len() - 3);
        }
    }
    if let Err(e) = write_outputs(&report, &cli) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
