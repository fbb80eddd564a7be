use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use psiopt::analytics::{
    leakage_partitions, peq_closed_form, peq_exhaustive, peq_fixture, ratio_to_f64, LEAKAGE_MAX_K,
};
use psiopt::harness::{
    run_naive, run_optimize, run_thpsi, sweep, thpsi_sweep, verify, write_csv, SimConfig, SweepGrid,
};
use psiopt::model::{Scenario, Sense};
use psiopt::{fixtures, Error};

const SEED_ENV: &str = "PSIOPT_SEED";

#[derive(Parser)]
#[command(name = "psiopt", version, about = "Private set intersection based optimization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the optimizer (or naive PSI) on a scenario file.
    Run(RunArgs),
    /// Optimizer cost sweep, written as CSV.
    Sweep(SweepArgs),
    /// Closed-form and enumerated P_eq table.
    Peq(PeqArgs),
    /// Leakage partitions of the server-set space.
    Leakage(ScenarioArg),
    /// Threshold PSI on a scenario file.
    Thpsi(ThPsiArgs),
    /// Check the cost formulas and leakage identity over a grid.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario JSON file, or the name of a bundled fixture
    /// (movies, movies_map2, movies_map3).
    scenario: String,
    #[arg(long)]
    n2: Option<usize>,
    /// Overrides the scenario seed and PSIOPT_SEED.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    /// Run naive PSI instead of the optimizer.
    #[arg(long)]
    naive: bool,
    /// Write the transcript as JSONL.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Write the full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ThPsiArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[arg(long)]
    t: usize,
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Grid as comma-separated `key=lo:hi` or `key=value` pairs. Keys: K, N2,
    /// T, rows (per-K row budget), seed, sense.
    #[arg(long, default_value = "")]
    grid: String,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Sweep threshold PSI instead of the optimizer.
    #[arg(long)]
    thpsi: bool,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PeqArgs {
    #[arg(long, default_value_t = 5)]
    p1: usize,
    #[arg(long, default_value = "2:10")]
    t_range: String,
    #[arg(long, default_value = "1:4")]
    m_range: String,
    #[arg(long, default_value_t = 2)]
    n2: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Random scenarios added to the bundled fixtures for the leakage check.
    #[arg(long, default_value_t = 20)]
    leakage_samples: usize,
}

/// Exit codes: 2 invalid input, 3 oracle mismatch, 4 verification mismatch.
enum Failure {
    Invalid(anyhow::Error),
    Oracle(anyhow::Error),
    Mismatch(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::OracleMismatch(_)) => Failure::Oracle(e),
            Some(Error::Io(_)) | None => Failure::Other(e),
            Some(_) => Failure::Invalid(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn parse_range(text: &str) -> anyhow::Result<RangeInclusive<usize>> {
    let (lo, hi) = match text.split_once(':') {
        Some((lo, hi)) => (lo, hi),
        None => (text, text),
    };
    let lo: usize = lo.trim().parse().with_context(|| format!("bad range {text:?}"))?;
    let hi: usize = hi.trim().parse().with_context(|| format!("bad range {text:?}"))?;
    if lo > hi {
        bail!("empty range {text:?}");
    }
    Ok(lo..=hi)
}

fn parse_grid(text: &str) -> anyhow::Result<SweepGrid> {
    let mut grid = SweepGrid::default();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| anyhow!("expected key=value, got {part:?}"))?;
        match key.trim() {
            "K" | "k" => grid.k = parse_range(value)?,
            "N2" | "n2" => grid.n2 = parse_range(value)?,
            "T" | "t" => grid.t = parse_range(value)?,
            "rows" => grid.max_rows_per_k = value.trim().parse()?,
            "seed" => grid.seed = value.trim().parse()?,
            "sense" => {
                grid.sense = match value.trim() {
                    "min" => Sense::Minimize,
                    "max" => Sense::Maximize,
                    other => bail!("unknown sense {other:?}"),
                }
            }
            other => bail!("unknown grid key {other:?}"),
        }
    }
    grid.validate()?;
    Ok(grid)
}

fn load_scenario(arg: &ScenarioArg) -> anyhow::Result<Scenario> {
    let path = Path::new(&arg.scenario);
    let mut scenario = if path.exists() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Scenario::from_json(&text)?
    } else {
        let name = arg.scenario.trim_end_matches(".json");
        fixtures::all()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::InvalidScenario(format!("no such file or fixture: {}", arg.scenario)))?
    };
    if let Some(n2) = arg.n2 {
        scenario = scenario.with_n2(n2)?;
    }
    if let Some(seed) = seed_override(arg.seed)? {
        scenario = scenario.with_seed(seed);
    }
    Ok(scenario)
}

/// `--seed` wins over `PSIOPT_SEED`, which wins over the file.
fn seed_override(flag: Option<u64>) -> anyhow::Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("{SEED_ENV} must be an integer"))?)),
        Err(_) => Ok(None),
    }
}

fn leakage_bits(s: &Scenario, naive: bool) -> anyhow::Result<String> {
    if s.k() > LEAKAGE_MAX_K {
        return Ok("n/a".into());
    }
    let report = leakage_partitions(s)?;
    let bits = if naive { report.bits.naive } else { report.bits.scheme };
    Ok(format!("{bits:.4}"))
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(args: &RunArgs) -> CmdResult {
    let s = load_scenario(&args.scenario).map_err(Failure::Invalid)?;
    let cfg = SimConfig::new(s.clone());
    let bits = leakage_bits(&s, args.naive)?;
    let (line, transcript, report) = if args.naive {
        let r = run_naive(&cfg).map_err(anyhow::Error::from)?;
        let line = format!(
            "P*={} D={} D_PSI={} leakage_bits={bits}",
            s.alphabet().format_set(&r.pstar),
            r.cost.d,
            r.cost.d_psi
        );
        (line, r.transcript.to_jsonl(), serde_json::to_string_pretty(&r).map_err(anyhow::Error::from)?)
    } else {
        let r = run_optimize(&cfg).map_err(anyhow::Error::from)?;
        let line = format!(
            "P*={} D={} D_PSI={} leakage_bits={bits}",
            s.alphabet().format_set(&r.pstar),
            r.cost.d,
            r.cost.d_psi
        );
        (line, r.transcript.to_jsonl(), r.to_json())
    };
    println!("{line}");
    if let Some(p) = &args.transcript {
        write_file(p, &transcript)?;
    }
    if let Some(p) = &args.report {
        write_file(p, &report)?;
    }
    Ok(())
}

fn cmd_thpsi(args: &ThPsiArgs) -> CmdResult {
    let s = load_scenario(&args.scenario).map_err(Failure::Invalid)?;
    if args.t == 0 {
        return Err(Failure::Invalid(Error::InvalidThreshold.into()));
    }
    let r = run_thpsi(&SimConfig::new(s.clone()), args.t).map_err(anyhow::Error::from)?;
    let revealed = r.intersection.as_ref().map_or("none".to_string(), |i| s.alphabet().format_set(i));
    println!("M={} intersection={revealed} D={} D_pred={}", r.cardinality, r.d, r.predicted);
    if let Some(p) = &args.transcript {
        write_file(p, &r.transcript.to_jsonl())?;
    }
    if !r.matched {
        return Err(Failure::Mismatch(format!("threshold PSI cost {} differs from {}", r.d, r.predicted)));
    }
    Ok(())
}

fn output(path: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let grid = parse_grid(&args.grid.grid).map_err(Failure::Invalid)?;
    let out = output(args.out.as_ref())?;
    if args.thpsi {
        write_csv(&thpsi_sweep(&grid).map_err(anyhow::Error::from)?, out).map_err(anyhow::Error::from)?;
    } else {
        write_csv(&sweep(&grid).map_err(anyhow::Error::from)?, out).map_err(anyhow::Error::from)?;
    }
    Ok(())
}

fn cmd_peq(args: &PeqArgs) -> CmdResult {
    let ts = parse_range(&args.t_range).map_err(Failure::Invalid)?;
    let ms = parse_range(&args.m_range).map_err(Failure::Invalid)?;
    if *ts.start() == 0 || *ms.start() == 0 || *ms.end() > args.p1 || args.n2 < 2 {
        return Err(Failure::Invalid(anyhow!("need T >= 1, 1 <= M <= P1 and N2 >= 2")));
    }
    let mut w = csv::Writer::from_writer(output(args.out.as_ref())?);
    w.write_record(["T", "M", "p_eq_closed", "p_eq_exhaustive", "exact"]).map_err(anyhow::Error::from)?;
    let mut mismatch = false;
    for t in ts {
        for m in ms.clone() {
            let closed = peq_closed_form(args.p1, m, t).value;
            let fixture = peq_fixture(args.p1, m, args.n2).map_err(anyhow::Error::from)?;
            let exhaustive = peq_exhaustive(&fixture, t).map_err(anyhow::Error::from)?;
            mismatch |= closed != exhaustive;
            w.write_record([
                t.to_string(),
                m.to_string(),
                ratio_to_f64(&closed).to_string(),
                ratio_to_f64(&exhaustive).to_string(),
                format!("{}/{}", closed.numer(), closed.denom()),
            ])
            .map_err(anyhow::Error::from)?;
        }
    }
    w.flush()?;
    if mismatch {
        return Err(Failure::Mismatch("closed form differs from enumeration".into()));
    }
    Ok(())
}

fn cmd_leakage(args: &ScenarioArg) -> CmdResult {
    let s = load_scenario(args).map_err(Failure::Invalid)?;
    let report = leakage_partitions(&s).map_err(anyhow::Error::from)?;
    println!(
        "space={} blocks: scheme={} nominal={} naive={}",
        report.space.len(),
        report.scheme.block_count(),
        report.nominal.block_count(),
        report.naive.block_count()
    );
    println!(
        "bits: scheme={:.6} nominal={:.6} naive={:.6}",
        report.bits.scheme, report.bits.nominal, report.bits.naive
    );
    println!("identity: {}", if report.identity_holds() { "holds" } else { "FAILS" });
    if !report.identity_holds() {
        return Err(Failure::Mismatch("leakage identity fails".into()));
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let grid = parse_grid(&args.grid.grid).map_err(Failure::Invalid)?;
    let summary = verify(&grid, args.leakage_samples).map_err(anyhow::Error::from)?;
    println!("rows: {} thpsi_rows: {} leakage_cases: {}", summary.rows, summary.thpsi_rows, summary.leakage_cases);
    println!("{}", summary.headline());
    if !summary.all_pass() {
        return Err(Failure::Mismatch(format!("{summary:?}")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Peq(a) => cmd_peq(a),
        Command::Leakage(a) => cmd_leakage(a),
        Command::Thpsi(a) => cmd_thpsi(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Oracle(e)) => {
            eprintln!("oracle mismatch: {e:#}");
            ExitCode::from(3)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("mismatch: {msg}");
            ExitCode::from(4)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
