//! `csfb`: run the simulation presets and write their results as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use csfb::sim::{
    backoff_table, parse_config_as, run_experiment_with_workers, write_csv, ExperimentConfig, ExperimentKind, ResultRow,
};

#[derive(Parser)]
#[command(
    name = "csfb",
    version,
    about = "Compressive-sensing opportunistic feedback simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a figure preset: fig1 .. fig6 or the full id, e.g. fig2_analog_sweep.
    Figure {
        id: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the experiment described by the config file (default: custom).
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the optimal back-off over the configured (s, c/2) grid.
    Backoff {
        #[command(flatten)]
        common: Common,
    },
    /// Error-covariance trace and determinant against the channel count.
    Ecm {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per point, overriding the config.
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn load(&self, kind: Option<ExperimentKind>) -> Result<ExperimentConfig, String> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?,
            None => String::new(),
        };
        let mut cfg = parse_config_as(&text, kind).map_err(|e| e.to_string())?;
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(out) = &self.out {
            cfg.out_path = Some(out.display().to_string());
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn workers(&self) -> Result<usize, String> {
        match self.workers {
            Some(0) => Err("--workers must be at least 1".into()),
            Some(w) => Ok(w),
            None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    let simulate = |common: &Common, kind: Option<ExperimentKind>| -> Result<_, String> {
        let cfg = common.load(kind)?;
        let rows = run_experiment_with_workers(&cfg, common.workers()?).map_err(|e| e.to_string())?;
        Ok((cfg, rows))
    };
    let (cfg, rows, default_name) = match &cli.command {
        Command::Figure { id, common } => {
            let kind = ExperimentKind::from_id(id).ok_or_else(|| {
                let ids: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.id()).collect();
                format!("unknown figure `{id}` (expected one of {})", ids.join(", "))
            })?;
            let (cfg, rows) = simulate(common, Some(kind))?;
            (cfg, rows, kind.id())
        }
        Command::Sweep { common } => {
            let (cfg, rows) = simulate(common, None)?;
            let name = cfg.experiment.id();
            (cfg, rows, name)
        }
        Command::Ecm { common } => {
            let (cfg, rows) = simulate(common, Some(ExperimentKind::Fig1EcmTrace))?;
            (cfg, rows, "ecm")
        }
        Command::Backoff { common } => {
            let cfg = common.load(None)?;
            let rows = backoff_table(&cfg).map_err(|e| e.to_string())?;
            (cfg, rows, "backoff")
        }
    };
    report_row_errors(&rows);
    let path = PathBuf::from(cfg.out_path.clone().unwrap_or_else(|| format!("{default_name}.csv")));
    write_csv(&rows, &path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    eprintln!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn report_row_errors(rows: &[ResultRow]) {
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} at s={:?} c_half={:?} k={:?}: {}",
            r.metric,
            r.s,
            r.c_half,
            r.k,
            r.error.as_deref().unwrap_or_default()
        );
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {}", msg.replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
