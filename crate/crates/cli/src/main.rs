use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use pairmatch::moments::{validate_theorems, Formulas, MIN_PATHS};
use pairmatch_cli::config::{Overrides, RunConfig};
use pairmatch_cli::{run, theory, validate};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "pairmatch", version, about = "Matching-based pairs trading research engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Theoretical Sharpe ratios of baseline and matching portfolios.
    Theory {
        /// TOML file of model parameters; defaults reproduce the standard setup.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic price panel.
    Generate(RunArgs),
    /// Select pairs on the most recent lookback window.
    Select(RunArgs),
    /// Backtest each configured strategy and write ledgers and reports.
    Backtest(RunArgs),
    /// Compare closed-form moments with Monte Carlo estimates.
    ValidateTheorems {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        paths: usize,
        /// Random parameter sets in addition to the reference set.
        #[arg(long, default_value_t = 20)]
        random_sets: usize,
        #[arg(long)]
        json: bool,
    },
    /// Configuration helpers.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Print every key with its default value.
    ShowDefaults,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Price CSV with header `date,ticker,adj_close`.
    #[arg(long)]
    prices: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// matching, baseline or both.
    #[arg(long)]
    method: Option<String>,
    /// z, q or both.
    #[arg(long)]
    signal: Option<String>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    lookback: Option<usize>,
    #[arg(long)]
    fee: Option<f64>,
    #[arg(long)]
    pairs_target: Option<usize>,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        cfg.apply(&Overrides {
            out: self.out,
            seed: self.seed,
            method: self.method,
            signal: self.signal,
            k: self.k,
            lookback: self.lookback,
            fee: self.fee,
            pairs_target: self.pairs_target,
            prices: self.prices,
        })?;
        Ok(cfg)
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = real_main(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn real_main(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Theory { params, json } => {
            let report = theory::evaluate(&theory::TheoryParams::load(params.as_deref())?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", theory::render(&report));
            }
        }
        Command::Generate(args) => {
            let cfg = args.resolve()?;
            let hash = run::cmd_generate(&cfg)?;
            println!("wrote {} (manifest sha256 {hash})", cfg.out);
        }
        Command::Select(args) => {
            let cfg = args.resolve()?;
            let hash = run::cmd_select(&cfg)?;
            println!("wrote {} (manifest sha256 {hash})", cfg.out);
        }
        Command::Backtest(args) => {
            let cfg = args.resolve()?;
            let outcome = run::cmd_backtest(&cfg)?;
            for r in &outcome.reports {
                let sharpe = |p: Option<pairmatch::analytics::PerformanceReport>| {
                    p.map_or("n/a".to_string(), |p| format!("{:.2}", p.sharpe))
                };
                println!("{}: gross Sharpe {}, net Sharpe {}", r.strategy, sharpe(r.gross), sharpe(r.net));
            }
            println!("wrote {} (manifest sha256 {})", cfg.out, outcome.manifest_sha256);
        }
        Command::ValidateTheorems { seed, paths, random_sets, json } => {
            if paths < MIN_PATHS {
                bail!("--paths must be at least {MIN_PATHS}");
            }
            let rows = validate_theorems(random_sets, paths, seed, &Formulas::default())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                print!("{}", validate::render(&rows));
            }
        }
        Command::Config { action: ConfigAction::ShowDefaults } => {
            print!("{}", RunConfig::default().to_toml());
        }
    }
    Ok(())
}
