//! `corrlab`: run experiments from TOML configurations or built-in presets.
//!
//! Exit status: 0 success, 1 i/o, 2 invalid input, 3 numerical failure,
//! 4 resource guard.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use corrlab_core::functionals::{macro_to_micro, micro_to_macro, MacroScales};
use corrlab_core::harness::{convergence_study, preset, ExperimentConfig, ExperimentKind, RunRecord, PRESETS};
use corrlab_core::{run_experiment, run_persisted, Error, Result};

#[derive(Parser)]
#[command(name = "corrlab", version, about = "Scattering and correlation-window experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Directory for manifest.json, points/ and results.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of parameter points evaluated concurrently.
    #[arg(long)]
    workers: Option<usize>,
    /// Reuse finished points of an interrupted run in --out.
    #[arg(long, requires = "out")]
    resume: bool,
    /// Print the CSV table to stdout.
    #[arg(long)]
    csv: bool,
    /// Print the JSON manifest to stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Zero-energy scattering solution and scattering lengths.
    Scatter(RunArgs),
    /// Radial evolution with norm and sup-norm traces.
    Evolve(RunArgs),
    /// Window functionals over (Λ, L, T).
    Window(RunArgs),
    /// Window functionals over microscopic (N, ℓ, t).
    Sweep(RunArgs),
    /// Sup-norm decay of the free evolution of ωψ_Λ.
    Dispersive(RunArgs),
    /// Energy moments of the factorized state.
    Energy(RunArgs),
    /// Gross–Pitaevskii twins with couplings 8πa and b.
    Gp(RunArgs),
    /// Initial window functional F_N(0) against its asymptotic constant.
    Fn0(RunArgs),
    /// Any configuration, whatever its kind.
    Run(RunArgs),
    /// Convert microscopic (N, ℓ, t) to macroscopic (Λ, L, T) or back.
    Convert(ConvertArgs),
    /// Rerun a configuration with dr and dt halved at each level.
    Converge(ConvergeArgs),
    /// Summarize a finished run directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct ConvertArgs {
    /// Configuration of kind micro-macro.
    #[arg(long, conflicts_with_all = ["n", "lambda"])]
    config: Option<PathBuf>,
    #[arg(long, requires = "ell", conflicts_with = "lambda")]
    n: Option<u64>,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long = "lambda", requires = "l")]
    lambda: Option<f64>,
    /// Macroscopic window radius.
    #[arg(long)]
    l: Option<f64>,
    /// Time in the units of the given side.
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Number of refinement levels (at least 3).
    #[arg(long, default_value_t = 3)]
    levels: u32,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory written by --out.
    dir: PathBuf,
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    json: bool,
}

fn load(config: &Option<PathBuf>, preset_name: &Option<String>) -> Result<ExperimentConfig> {
    match (config, preset_name) {
        (Some(path), _) => ExperimentConfig::from_path(path),
        (None, Some(name)) => preset(name),
        (None, None) => Err(Error::validation(
            "config",
            format!("pass --config <path> or --preset <{}>", PRESETS.join("|")),
        )),
    }
}

fn expect_kind(cfg: &ExperimentConfig, allowed: &[ExperimentKind], command: &str) -> Result<()> {
    if allowed.is_empty() || allowed.contains(&cfg.kind) {
        return Ok(());
    }
    let names: Vec<&str> = allowed.iter().map(|k| k.as_str()).collect();
    Err(Error::validation(
        "kind",
        format!("`{command}` runs {}; the configuration is {}", names.join(" or "), cfg.kind.as_str()),
    ))
}

fn emit(record: &RunRecord, csv: bool, json: bool) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    if json {
        serde_json::to_writer_pretty(&mut stdout, record)?;
        writeln!(stdout)?;
    }
    if csv {
        record.write_csv(&mut stdout)?;
    }
    Ok(())
}

fn summarize(record: &RunRecord) {
    eprintln!(
        "{} {:?}: {} point(s), {} failed, {} resumed",
        record.kind,
        record.name,
        record.points.len(),
        record.failures().count(),
        record.resumed_points
    );
    for p in record.failures() {
        if let Some(f) = &p.failure {
            eprintln!("  point {} failed ({}): {}", p.index, f.kind, f.message);
        }
    }
    for p in &record.points {
        for flag in &p.flags {
            eprintln!("  point {}: {flag}", p.index);
        }
    }
    for v in &record.verdicts {
        eprintln!("  [{}] {} ({})", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
}

fn run(args: &RunArgs, allowed: &[ExperimentKind], command: &str) -> Result<i32> {
    let mut cfg = load(&args.config, &args.preset)?;
    expect_kind(&cfg, allowed, command)?;
    if let Some(w) = args.workers {
        cfg.workers = w;
        cfg.validate()?;
    }
    let out = args.out.clone().or_else(|| cfg.output.dir.clone());
    let record = match &out {
        Some(dir) => run_persisted(&cfg, dir, args.resume)?,
        None => run_experiment(&cfg)?,
    };
    summarize(&record);
    // without any destination the table goes to stdout
    let csv = args.csv || (out.is_none() && !args.json);
    emit(&record, csv, args.json)?;
    Ok(record.exit_code())
}

fn convert(args: &ConvertArgs) -> Result<i32> {
    let mut stdout = std::io::stdout().lock();
    if let Some(path) = &args.config {
        let cfg = ExperimentConfig::from_path(path)?;
        expect_kind(&cfg, &[ExperimentKind::MicroMacro], "convert")?;
        let record = run_experiment(&cfg)?;
        record.write_csv(&mut stdout)?;
        return Ok(record.exit_code());
    }
    let (micro, m) = match (args.n, args.lambda) {
        (Some(n), _) => {
            let ell = args.ell.unwrap_or_default();
            ((n, ell, args.t), micro_to_macro(n, ell, args.t)?)
        }
        (None, Some(lambda)) => {
            let m = MacroScales {
                lambda,
                l: args.l.unwrap_or_default(),
                t: args.t,
            };
            let micro = macro_to_micro(&m)?;
            ((micro.n, micro.ell, micro.t), m)
        }
        (None, None) => return Err(Error::validation("convert", "pass --n and --ell, or --lambda and --l")),
    };
    if args.json {
        let value = serde_json::json!({
            "N": micro.0, "ell": micro.1, "t": micro.2,
            "Lambda": m.lambda, "L": m.l, "T": m.t,
        });
        serde_json::to_writer_pretty(&mut stdout, &value)?;
        writeln!(stdout)?;
    } else {
        writeln!(stdout, "N,ell,t,Lambda,L,T")?;
        writeln!(
            stdout,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            micro.0 as f64, micro.1, micro.2, m.lambda, m.l, m.t
        )?;
    }
    Ok(0)
}

fn converge(args: &ConvergeArgs) -> Result<i32> {
    let mut cfg = load(&args.config, &args.preset)?;
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    let report = convergence_study(&cfg, args.levels)?;
    let mut stdout = std::io::stdout().lock();
    if args.json {
        serde_json::to_writer_pretty(&mut stdout, &report)?;
        writeln!(stdout)?;
    } else {
        writeln!(stdout, "level,dr,dt,delta")?;
        for l in &report.levels {
            let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
            writeln!(stdout, "{},{},{},{:e}", l.level, opt(l.dr), opt(l.dt), l.delta)?;
        }
    }
    match report.observed_order {
        Some(p) => eprintln!("observed order {p:.3}"),
        None => eprintln!("differences at rounding level; no order"),
    }
    eprintln!("finest relative shift {:.3e}", report.finest_shift);
    if report.flagged {
        eprintln!("warning: finest levels differ by more than 2%");
    }
    Ok(0)
}

fn report(args: &ReportArgs) -> Result<i32> {
    let manifest = Path::new(&args.dir).join("manifest.json");
    let record: RunRecord = serde_json::from_str(&std::fs::read_to_string(&manifest)?)?;
    summarize(&record);
    if !record.complete {
        eprintln!("run is incomplete; rerun with --resume");
    }
    emit(&record, args.csv, args.json)?;
    Ok(if record.complete { record.exit_code() } else { 3 })
}

fn main() -> ExitCode {
    use ExperimentKind as K;
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Scatter(a) => run(a, &[K::Scatter], "scatter"),
        Command::Evolve(a) => run(a, &[K::Evolve], "evolve"),
        Command::Window(a) => run(a, &[K::Window], "window"),
        Command::Sweep(a) => run(a, &[K::WindowSweep], "sweep"),
        Command::Dispersive(a) => run(a, &[K::Dispersive], "dispersive"),
        Command::Energy(a) => run(a, &[K::Energy], "energy"),
        Command::Gp(a) => run(a, &[K::Gp], "gp"),
        Command::Fn0(a) => run(a, &[K::Fn0], "fn0"),
        Command::Run(a) => run(a, &[], "run"),
        Command::Convert(a) => convert(a),
        Command::Converge(a) => converge(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
