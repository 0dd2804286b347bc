use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use favard_lab::{ExperimentConfig, LabError, Session};

#[derive(Parser)]
#[command(name = "favard-lab", version, about = "Favard length and projection experiments")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the hardware parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Favard length for n = 0..=n_max.
    FavardSweep,
    /// Fit power-law and log n / n shapes to the sweep.
    DecayFit,
    /// Run the lemma verification suite.
    LemmaSuite {
        /// Run only these checks.
        #[arg(long)]
        only: Vec<String>,
    },
    /// Continue zeros of φ̃_t found in a rectangle from t0 to t1.
    ZeroTrace {
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long)]
        m: Option<u32>,
        /// re_lo,re_hi,im_lo,im_hi
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rect: Option<Vec<f64>>,
    },
    /// Cofactor floor and critical-index uniqueness scans.
    TilingScan,
    /// Random exponential-sum energy audit.
    CetsqAudit,
    /// Level-set stacking ratios over a (θ, K, M) grid.
    StackingAudit,
    /// Favard sweeps and Jacobian bounds for degenerate triangles.
    DegenerateSweep,
    /// Exponent bookkeeping.
    ExponentLedger,
}

fn run(cli: Cli) -> Result<(), LabError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.to_string_lossy().into_owned();
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(LabError::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| LabError::Config(e.to_string()))?;
    }
    let name = match &cli.command {
        Command::FavardSweep => "favard-sweep",
        Command::DecayFit => "decay-fit",
        Command::LemmaSuite { .. } => "lemma-suite",
        Command::ZeroTrace { t0, t1, m, rect } => {
            if let Some(v) = t0 {
                cfg.zero_t0 = *v;
            }
            if let Some(v) = t1 {
                cfg.zero_t1 = *v;
            }
            if let Some(v) = m {
                cfg.m = *v;
            }
            if let Some(r) = rect {
                cfg.zero_rect = r
                    .as_slice()
                    .try_into()
                    .map_err(|_| LabError::Config(format!("--rect needs 4 values, got {}", r.len())))?;
            }
            "zero-trace"
        }
        Command::TilingScan => "tiling-scan",
        Command::CetsqAudit => "cetsq-audit",
        Command::StackingAudit => "stacking-audit",
        Command::DegenerateSweep => "degenerate-sweep",
        Command::ExponentLedger => "exponent-ledger",
    };
    let out = PathBuf::from(&cfg.out_dir);
    let session = Session::new(cfg, out)?;
    let record = match &cli.command {
        Command::LemmaSuite { only } => session.lemma_suite(only)?,
        _ => session.run(name)?,
    };
    println!("{} ok config_hash={} out={}", record.command, record.config_hash, session.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
