//! Experiment orchestration: configuration, Monte-Carlo runs and CSV output.

pub mod config;
pub mod report;
pub mod sim;

pub use config::{ChannelMode, PairChoice, SimConfig, SnrConvention};
pub use report::{theory_rows, write_sweep_csv, write_theory_csv, SWEEP_HEADER};
pub use sim::{
    derive_seed, noise_density, resolve_pair, run_baseline_ofdm_bpsk, run_baseline_sweep, run_point,
    run_sweep, simulate_baseline, simulate_spm,
};
