//! Command-line front end: reads a config file, applies flag overrides,
//! runs the campaign and writes the result files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use pilotsim::config::{parse_config, RunConfig};
use pilotsim::harness::run_campaign;
use pilotsim::output::emit_results;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PowerControl {
    Off,
    Gradual,
    Tracking,
}

impl PowerControl {
    fn key(self) -> &'static str {
        match self {
            PowerControl::Off => "off",
            PowerControl::Gradual => "gradual",
            PowerControl::Tracking => "tracking",
        }
    }
}

/// Multi-cell massive MIMO pilot-assignment and power-control simulator.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Users per cell.
    #[arg(long)]
    users: Option<usize>,
    /// Antenna counts to sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    antennas: Option<Vec<usize>>,
    /// Monte-Carlo drops per configuration.
    #[arg(long)]
    drops: Option<usize>,
    /// Pilot-assignment methods, comma separated (e.g. "Random,H-MaxMinTC").
    #[arg(long, value_delimiter = ',')]
    pa: Option<Vec<String>>,
    /// Power control; without targets, per-method presets are used.
    #[arg(long, value_enum)]
    power_control: Option<PowerControl>,
    /// DL target SINR in dB.
    #[arg(long, allow_hyphen_values = true)]
    target_sinr_dl: Option<f64>,
    /// UL target SINR in dB.
    #[arg(long, allow_hyphen_values = true)]
    target_sinr_ul: Option<f64>,
    /// DL target rate in bit/s.
    #[arg(long)]
    target_rate_dl: Option<f64>,
    /// UL target rate in bit/s.
    #[arg(long)]
    target_rate_ul: Option<f64>,
    /// Best-response rounds.
    #[arg(long)]
    rounds: Option<usize>,
    /// Master seed; every drop seed derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    workers: Option<usize>,
}

impl Args {
    fn apply(self, mut c: RunConfig) -> RunConfig {
        macro_rules! set {
            ($($field:ident <- $flag:expr),* $(,)?) => {
                $(if let Some(v) = $flag { c.$field = Some(v); })*
            };
        }
        set! {
            users <- self.users,
            antennas <- self.antennas,
            drops <- self.drops,
            pa <- self.pa,
            power_control <- self.power_control.map(|p| p.key().to_string()),
            target_sinr_dl_db <- self.target_sinr_dl,
            target_sinr_ul_db <- self.target_sinr_ul,
            target_rate_dl_bps <- self.target_rate_dl,
            target_rate_ul_bps <- self.target_rate_ul,
            rounds <- self.rounds,
            seed <- self.seed,
            workers <- self.workers,
        }
        c
    }
}

fn run(args: Args) -> pilotsim::Result<()> {
    let base = match &args.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    let out = args.out.clone();
    let config = args.apply(base);
    let campaign = config.resolve()?;
    log::info!(
        "running {} drops, {} methods, antennas {:?}",
        campaign.drops,
        campaign.methods.len(),
        campaign.antennas
    );
    let output = run_campaign(&campaign)?;
    for path in emit_results(&out, &config, &output)? {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
