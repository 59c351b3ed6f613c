use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ofdm_spm::harness::{
    self, resolve_pair, run_baseline_ofdm_bpsk, run_point, write_sweep_csv, write_theory_csv, SimConfig,
};
use ofdm_spm::optimize::{scan_levels, Objective, DEFAULT_H_START, DEFAULT_H_STEP};

#[derive(Parser, Debug)]
#[command(name = "ofdm-spm", version, about = "OFDM with subcarrier power modulation: link-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form BER and throughput curves
    Theory(Common),
    /// Simulate one SNR point
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snr_db: f64,
    },
    /// Simulate every point of the SNR grid
    Sweep(Common),
    /// Scan H for the pair with the lowest mean BER
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_H_START)]
        h_start: f64,
        #[arg(long, default_value_t = DEFAULT_H_STEP)]
        h_step: f64,
        /// Use the simulated BER instead of the closed form
        #[arg(long)]
        monte_carlo: bool,
    },
    /// Conventional OFDM-BPSK over the SNR grid
    Baseline(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when absent)
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    policy: Option<String>,
    /// reference | auto | H | L,H
    #[arg(long)]
    pair: Option<String>,
    /// start:step:stop or comma list, in dB
    #[arg(long)]
    snr_db_grid: Option<String>,
    /// multipath | flat | identity
    #[arg(long)]
    channel_mode: Option<String>,
    #[arg(long)]
    channel_delays: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    channel_powers_db: Option<String>,
    #[arg(long)]
    ofdm_symbol_count: Option<String>,
    #[arg(long)]
    fft_size: Option<String>,
    #[arg(long)]
    data_subcarriers: Option<String>,
    #[arg(long)]
    cp_len: Option<String>,
    #[arg(long)]
    guard_count: Option<String>,
    #[arg(long)]
    coherence_block: Option<String>,
    /// per-subcarrier | per-bit
    #[arg(long)]
    snr_convention: Option<String>,
    /// in-phase | magnitude
    #[arg(long)]
    power_statistic: Option<String>,
    #[arg(long)]
    workers: Option<String>,
}

impl Common {
    fn config(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?,
            None => SimConfig::default(),
        };
        let seed = self.seed.map(|s| s.to_string());
        let overrides = [
            ("master_seed", &seed),
            ("policy", &self.policy),
            ("pair", &self.pair),
            ("snr_db_grid", &self.snr_db_grid),
            ("channel_mode", &self.channel_mode),
            ("channel_delays", &self.channel_delays),
            ("channel_powers_db", &self.channel_powers_db),
            ("ofdm_symbol_count", &self.ofdm_symbol_count),
            ("fft_size", &self.fft_size),
            ("data_subcarriers", &self.data_subcarriers),
            ("cp_len", &self.cp_len),
            ("guard_count", &self.guard_count),
            ("coherence_block", &self.coherence_block),
            ("snr_convention", &self.snr_convention),
            ("power_statistic", &self.power_statistic),
            ("workers", &self.workers),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v).with_context(|| format!("--{}", key.replace("master_", "")))?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn require_seed(&self) -> Result<()> {
        if self.seed.is_none() {
            bail!("--seed is required for reproducible simulation runs");
        }
        Ok(())
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Theory(common) => {
            let cfg = common.config()?;
            let pair = resolve_pair(&cfg)?;
            let mut out = common.output()?;
            write_theory_csv(&mut out, &pair, &cfg.snr_db_grid)?;
            out.flush()?;
        }
        Command::Simulate { common, snr_db } => {
            common.require_seed()?;
            let cfg = common.config()?;
            let record = run_point(&cfg, snr_db)?;
            let mut out = common.output()?;
            write_sweep_csv(&mut out, &[record])?;
            out.flush()?;
        }
        Command::Sweep(common) => {
            common.require_seed()?;
            let cfg = common.config()?;
            let records = harness::run_sweep(&cfg)?;
            let mut out = common.output()?;
            write_sweep_csv(&mut out, &records)?;
            out.flush()?;
        }
        Command::Baseline(common) => {
            common.require_seed()?;
            let cfg = common.config()?;
            let records = cfg
                .snr_db_grid
                .iter()
                .map(|&snr| run_baseline_ofdm_bpsk(&cfg, snr))
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = common.output()?;
            write_sweep_csv(&mut out, &records)?;
            out.flush()?;
        }
        Command::Optimize { common, h_start, h_step, monte_carlo } => {
            let cfg = common.config()?;
            let objective = if monte_carlo {
                common.require_seed()?;
                Objective::MonteCarlo { config: Box::new(cfg.clone()) }
            } else {
                Objective::ClosedForm { snr_db: cfg.snr_db_grid.clone() }
            };
            let result = scan_levels(cfg.policy, &objective, h_start, h_step)?;
            eprintln!(
                "best pair for {}: L = {}, H = {}, objective = {}",
                cfg.policy,
                result.pair.low(),
                result.pair.high(),
                result.objective
            );
            let mut out = common.output()?;
            result.write_trace_csv(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
