use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qndsim_cli::compare::{compare, Tolerance};
use qndsim_cli::config;
use qndsim_cli::run::run_figure;
use qndsim_cli::{Category, CliError, Figure};
use qndsim_core::{ExperimentConfig, RunMode};

#[derive(Parser)]
#[command(name = "qndsim", version, about = "Cascaded QND photon detection: figure tables and run comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unconditioned and cross-conditioned up probabilities.
    Fig2(RunArgs),
    /// Click-conditioned OR/AND combination and SNR.
    Fig3(RunArgs),
    /// Second node given the first and a click.
    Fig4(RunArgs),
    /// g2(0) and g2(tau) under each atom condition.
    Table1(RunArgs),
    /// Single-node characterization.
    #[command(name = "figS1")]
    FigS1(RunArgs),
    /// Fock-state sorter heralds and confusion matrix.
    Sorter(RunArgs),
    /// Compare two runs cell by cell.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file; omitted keys take the default experiment.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Monte Carlo trials per sweep point.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    /// manifest.json of the first run.
    a: PathBuf,
    /// manifest.json of the second run.
    b: PathBuf,
    /// Allowed deviation in combined standard errors.
    #[arg(long, default_value_t = 3.0)]
    sigmas: f64,
    /// Absolute slack per cell.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    /// Write every compared cell to this CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Exit nonzero if any cell is outside the tolerance.
    #[arg(long)]
    check: bool,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QNDSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::new(Category::Usage, format!("QNDSIM_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::new(Category::Usage, e.to_string()))
}

fn resolve_config(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => config::parse_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = args.mode {
        cfg.mode = match m {
            Mode::Exact => RunMode::Exact,
            Mode::Mc => RunMode::MonteCarlo,
        };
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(figure: Figure, args: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve_config(args)?;
    let manifest = run_figure(figure, &cfg, &args.out)?;
    for f in &manifest.files {
        println!("{}  {}", f.sha256, Path::new(&args.out).join(&f.name).display());
    }
    Ok(())
}

fn run_compare(args: &CompareArgs) -> Result<(), CliError> {
    let tol = Tolerance {
        sigmas: args.sigmas,
        absolute: args.tol,
    };
    let report = compare(&args.a, &args.b, tol)?;
    print!("{}", report.summary());
    println!("max_abs_diff = {}", qndsim_cli::table::format_number(report.max_abs_diff()));
    if let Some(path) = &args.report {
        std::fs::write(path, report.cells_csv()).map_err(|e| CliError::io(path.display(), e))?;
    }
    if args.check && report.failing() > 0 {
        return Err(CliError::new(
            Category::Check,
            format!("{} cells outside {} sigma + {}", report.failing(), args.sigmas, args.tol),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Fig2(a) => run(Figure::Fig2, a),
        Command::Fig3(a) => run(Figure::Fig3, a),
        Command::Fig4(a) => run(Figure::Fig4, a),
        Command::Table1(a) => run(Figure::Table1, a),
        Command::FigS1(a) => run(Figure::FigS1, a),
        Command::Sorter(a) => run(Figure::Sorter, a),
        Command::Compare(a) => run_compare(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.category.exit_code() as u8)
        }
    }
}
