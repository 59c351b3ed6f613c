//! Monte-Carlo link simulation: TX → channel → RX over many OFDM symbols.
//!
//! Symbols are processed in fixed-size batches. Each batch owns a generator
//! seeded from `(master_seed, snr, batch index)`, so results depend only on
//! the configuration and never on scheduling or worker count.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{db_to_linear, ber_total, rayleigh_bpsk_ber, throughput, ErrorCounts, SweepRecord};
use crate::channel::{add_awgn, apply_channel, draw_channel, draw_flat_rayleigh, ChannelProfile};
use crate::error::{Error, Result};
use crate::harness::config::{ChannelMode, PairChoice, SimConfig, SnrConvention};
use crate::levels::{PowerPair, SpmFrameBits, SubcarrierLayout};
use crate::optimize::{scan_levels, Objective, DEFAULT_H_START, DEFAULT_H_STEP};
use crate::rx::{data_gains, SpmReceiver};
use crate::tx::{assemble_bpsk_grid, assemble_grid, FreqGrid, OfdmModem, TimeSymbol};

const BATCH_TARGET: usize = 1000;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one batch of one SNR point.
pub fn derive_seed(master_seed: u64, stream: u64, snr_db: f64, batch: u64) -> u64 {
    let mut h = mix(master_seed);
    for word in [stream, snr_db.to_bits(), batch] {
        h = mix(h ^ word);
    }
    h
}

const STREAM_SPM: u64 = 1;
const STREAM_BASELINE: u64 = 2;

/// The `(L, H)` pair a configuration runs with.
pub fn resolve_pair(cfg: &SimConfig) -> Result<PowerPair> {
    match cfg.pair {
        PairChoice::Auto => {
            let objective = Objective::ClosedForm { snr_db: cfg.snr_db_grid.clone() };
            Ok(scan_levels(cfg.policy, &objective, DEFAULT_H_START, DEFAULT_H_STEP)?.pair)
        }
        _ => cfg.explicit_pair(),
    }
}

/// Noise variance per complex sample for a nominal SNR.
///
/// `mean_energy` is the mean data-subcarrier energy and `bits` the bits each
/// subcarrier carries; both only matter for [`SnrConvention::PerBit`].
pub fn noise_density(snr_db: f64, convention: SnrConvention, mean_energy: f64, bits: f64) -> f64 {
    let snr = db_to_linear(snr_db);
    match convention {
        SnrConvention::PerSubcarrier => 1.0 / snr,
        SnrConvention::PerBit => mean_energy / bits / snr,
    }
}

/// Everything one worker needs, shared read-only across batches.
struct LinkSetup {
    layout: Arc<SubcarrierLayout>,
    modem: OfdmModem,
    profile: ChannelProfile,
    mode: ChannelMode,
    coherence: usize,
    n0: f64,
}

impl LinkSetup {
    fn new(cfg: &SimConfig, n0: f64) -> Result<Self> {
        Ok(Self {
            layout: Arc::new(cfg.layout()?),
            modem: OfdmModem::new(cfg.fft_size, cfg.cp_len)?,
            profile: cfg.profile()?,
            mode: cfg.channel_mode,
            coherence: cfg.coherence_block,
            n0,
        })
    }

    fn n(&self) -> usize {
        self.layout.data_count()
    }

    /// Per-data-subcarrier gains, plus time-domain taps in multipath mode.
    fn draw(&self, rng: &mut ChaCha8Rng) -> (Vec<Complex64>, Option<crate::channel::ChannelRealization>) {
        match self.mode {
            ChannelMode::Identity => (vec![Complex64::new(1.0, 0.0); self.n()], None),
            ChannelMode::FlatRayleighIid => (draw_flat_rayleigh(self.n(), rng), None),
            ChannelMode::Multipath => {
                let real = draw_channel(&self.profile, self.layout.fft_size(), rng);
                (data_gains(&real.freq_response, &self.layout), Some(real))
            }
        }
    }

    /// Channel and noise applied to one grid, returning the received symbol.
    fn transmit(
        &self,
        mut grid: FreqGrid,
        gains: &[Complex64],
        taps: Option<&crate::channel::ChannelRealization>,
        rng: &mut ChaCha8Rng,
    ) -> Result<TimeSymbol> {
        if self.mode == ChannelMode::FlatRayleighIid {
            for (&k, g) in self.layout.data_indices().iter().zip(gains) {
                grid.bins[k] *= g;
            }
        }
        let mut sym = self.modem.modulate(&grid)?;
        if let Some(real) = taps {
            sym.samples = apply_channel(&sym.samples, real);
        }
        add_awgn(&mut sym.samples, self.n0, rng)?;
        Ok(sym)
    }
}

fn batches(cfg: &SimConfig) -> Vec<(u64, usize)> {
    // Batch length is a multiple of the coherence block so blocks never straddle batches.
    let per_batch = BATCH_TARGET.div_ceil(cfg.coherence_block) * cfg.coherence_block;
    let total = cfg.ofdm_symbol_count;
    (0..total.div_ceil(per_batch))
        .map(|b| (b as u64, per_batch.min(total - b * per_batch)))
        .collect()
}

fn run_batches<F>(cfg: &SimConfig, job: F) -> Result<ErrorCounts>
where
    F: Fn(u64, usize) -> Result<ErrorCounts> + Sync,
{
    let work = batches(cfg);
    let run = || -> Result<ErrorCounts> {
        let parts: Vec<Result<ErrorCounts>> = work.par_iter().map(|&(b, len)| job(b, len)).collect();
        parts.into_iter().sum::<Result<ErrorCounts>>()
    };
    match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {w} workers: {e}")))?
            .install(run),
        None => run(),
    }
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random()).collect()
}

/// Simulated error counts for OFDM-SPM at one SNR with an explicit pair.
pub fn simulate_spm(cfg: &SimConfig, pair: &PowerPair, snr_db: f64) -> Result<ErrorCounts> {
    cfg.validate()?;
    let n0 = noise_density(snr_db, cfg.snr_convention, pair.mean_symbol_energy(), 2.0);
    let setup = LinkSetup::new(cfg, n0)?;
    let rx = SpmReceiver::new(setup.layout.clone(), cfg.cp_len, pair, cfg.power_statistic)?;
    run_batches(cfg, |batch, len| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, STREAM_SPM, snr_db, batch));
        let mut counts = ErrorCounts::default();
        let mut channel = setup.draw(&mut rng);
        for i in 0..len {
            if i > 0 && i % setup.coherence == 0 {
                channel = setup.draw(&mut rng);
            }
            let frame = SpmFrameBits {
                power_bits: random_bits(&mut rng, setup.n()),
                bpsk_bits: random_bits(&mut rng, setup.n()),
            };
            let grid = assemble_grid(&frame, pair, setup.layout.clone())?;
            let sym = setup.transmit(grid, &channel.0, channel.1.as_ref(), &mut rng)?;
            counts.record(&frame, &rx.receive(&sym, &channel.0)?)?;
        }
        Ok(counts)
    })
}

/// Simulated error counts for conventional OFDM-BPSK at one SNR.
/// Only `bpsk_errors` and `bits_per_stream` are populated.
pub fn simulate_baseline(cfg: &SimConfig, snr_db: f64) -> Result<ErrorCounts> {
    cfg.validate()?;
    let n0 = noise_density(snr_db, cfg.snr_convention, 1.0, 1.0);
    let setup = LinkSetup::new(cfg, n0)?;
    // The pair only sets the power threshold, which BPSK reception ignores.
    let rx = SpmReceiver::new(setup.layout.clone(), cfg.cp_len, &PowerPair::reference(cfg.policy), cfg.power_statistic)?;
    run_batches(cfg, |batch, len| {
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, STREAM_BASELINE, snr_db, batch));
        let mut counts = ErrorCounts::default();
        let mut channel = setup.draw(&mut rng);
        for i in 0..len {
            if i > 0 && i % setup.coherence == 0 {
                channel = setup.draw(&mut rng);
            }
            let bits = random_bits(&mut rng, setup.n());
            let grid = assemble_bpsk_grid(&bits, setup.layout.clone())?;
            let sym = setup.transmit(grid, &channel.0, channel.1.as_ref(), &mut rng)?;
            let got = rx.receive_bpsk(&sym, &channel.0)?;
            counts.bpsk_errors += crate::analysis::hamming(&bits, &got);
            counts.bits_per_stream += bits.len() as u64;
        }
        Ok(counts)
    })
}

/// One OFDM-SPM measurement at `snr_db`, with its closed-form companion.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<SweepRecord> {
    let pair = resolve_pair(cfg)?;
    run_point_with(cfg, &pair, snr_db)
}

pub(crate) fn run_point_with(cfg: &SimConfig, pair: &PowerPair, snr_db: f64) -> Result<SweepRecord> {
    let errors = simulate_spm(cfg, pair, snr_db)?;
    let n0 = noise_density(snr_db, cfg.snr_convention, pair.mean_symbol_energy(), 2.0);
    let theory = ber_total(effective_snr(n0), pair)?;
    Ok(SweepRecord {
        snr_db,
        ber_power_sim: Some(errors.ber_power()),
        ber_bpsk_sim: errors.ber_bpsk(),
        ber_total_sim: errors.ber_total(),
        ber_power_theory: Some(theory.ber_power),
        ber_bpsk_theory: theory.ber_bpsk_avg,
        ber_total_theory: theory.ber_total,
        throughput: throughput(errors.ber_power(), errors.ber_bpsk()),
        bits_counted: errors.total_bits(),
        errors,
        seed: cfg.master_seed,
    })
}

/// Conventional OFDM-BPSK at `snr_db`: unit-power BPSK on every data bin.
pub fn run_baseline_ofdm_bpsk(cfg: &SimConfig, snr_db: f64) -> Result<SweepRecord> {
    let errors = simulate_baseline(cfg, snr_db)?;
    let ber = errors.ber_bpsk();
    let n0 = noise_density(snr_db, cfg.snr_convention, 1.0, 1.0);
    let theory = rayleigh_bpsk_ber(effective_snr(n0))?;
    Ok(SweepRecord {
        snr_db,
        ber_power_sim: None,
        ber_bpsk_sim: ber,
        ber_total_sim: ber,
        ber_power_theory: None,
        ber_bpsk_theory: theory,
        ber_total_theory: theory,
        throughput: 1.0 - ber,
        bits_counted: errors.bits_per_stream,
        errors,
        seed: cfg.master_seed,
    })
}

/// Unit-amplitude symbol SNR seen by the closed forms.
fn effective_snr(n0: f64) -> f64 {
    if n0 == 0.0 {
        f64::INFINITY
    } else {
        1.0 / n0
    }
}

/// One OFDM-SPM record per grid point, in grid order.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let pair = resolve_pair(cfg)?;
    cfg.snr_db_grid.iter().map(|&snr| run_point_with(cfg, &pair, snr)).collect()
}

/// One baseline record per grid point, in grid order.
pub fn run_baseline_sweep(cfg: &SimConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    cfg.snr_db_grid.iter().map(|&snr| run_baseline_ofdm_bpsk(cfg, snr)).collect()
}
