use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rpsmooth::experiments::{run_mc_validation, run_sweep, write_csv, write_mc_csv, Config, ExperimentId, SweepSpec};
use rpsmooth::Error;

/// Regenerate the optimal-versus-robust smoother comparison tables.
#[derive(Debug, Parser)]
#[command(name = "rpsmooth", version)]
struct Cli {
    /// One of: ou-delta, ou-mu, res-delta, res-mu, res-zeta, res-squeeze,
    /// res-flux, mc-validate.
    experiment: String,

    /// Flat `key = value` file with model and run parameters.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Uncertainty level in [0, 1).
    #[arg(long)]
    mu: Option<f64>,

    /// Number of points on the swept axis.
    #[arg(long)]
    grid: Option<usize>,

    /// Robust weight reduction.
    #[arg(long, value_parser = ["scalar-first", "matrix-first"])]
    combine: Option<String>,

    /// Overall squeezing loss in [0, 1).
    #[arg(long)]
    loss: Option<f64>,

    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParam(_) => Failure::Config(e.to_string()),
            Error::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn build_config(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::new(),
    };
    let flags: [(&str, Option<String>); 6] = [
        ("mu", cli.mu.map(|v| v.to_string())),
        ("grid", cli.grid.map(|v| v.to_string())),
        ("combine", cli.combine.clone()),
        ("l_sq", cli.loss.map(|v| v.to_string())),
        ("seed", cli.seed.map(|v| v.to_string())),
        ("threads", cli.threads.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    if let Some(out) = &cli.out {
        cfg.set("out", &out.to_string_lossy())?;
    }
    Ok(cfg)
}

fn open_output(cfg: &Config) -> Result<Box<dyn Write>, Failure> {
    Ok(match cfg.raw("out") {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let id: ExperimentId = cli.experiment.parse()?;
    let cfg = build_config(cli)?;
    if let Some(n) = cfg.get::<usize>("threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let spec = SweepSpec::from_config(id, &cfg)?;
    log::info!("running {id}");

    if id == ExperimentId::McValidate {
        let rows = run_mc_validation(&spec)?;
        let mut out = open_output(&cfg)?;
        write_mc_csv(&rows, &mut out)?;
        out.flush()?;
        let failed = rows.iter().filter(|r| !r.passes()).count();
        eprintln!("{id}: {} comparisons, {failed} outside tolerance", rows.len());
        return Ok(());
    }

    let table = run_sweep(&spec)?;
    let mut out = open_output(&cfg)?;
    write_csv(&table, &mut out)?;
    out.flush()?;
    let failures = table.failures();
    eprintln!("{id}: {} rows, {failures} with errors", table.rows.len());
    if failures > 0 {
        return Err(Failure::Numerical(format!("{failures} grid point(s) failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
