//! End-to-end checks of the simulation harness against the closed forms.

use ofdm_spm::analysis::{db_to_linear, rayleigh_bpsk_ber};
use ofdm_spm::harness::{
    run_baseline_ofdm_bpsk, run_baseline_sweep, run_point, run_sweep, simulate_spm, write_sweep_csv, ChannelMode,
    PairChoice, SimConfig, SWEEP_HEADER,
};
use ofdm_spm::levels::{Policy, PowerPair};
use ofdm_spm::rx::PowerStatistic;

fn cfg(policy: Policy, mode: ChannelMode, symbols: usize, seed: u64) -> SimConfig {
    SimConfig {
        policy,
        channel_mode: mode,
        ofdm_symbol_count: symbols,
        master_seed: seed,
        ..SimConfig::default()
    }
}

fn sigma(p: f64, bits: u64) -> f64 {
    (p * (1.0 - p) / bits as f64).sqrt()
}

#[test]
fn flat_rayleigh_saving_at_30_db() {
    let r = run_point(&cfg(Policy::PowerSaving, ChannelMode::FlatRayleighIid, 50_000, 21), 30.0).unwrap();
    let dev = (r.ber_total_sim - r.ber_total_theory).abs();
    assert!(dev <= 3.0 * sigma(r.ber_total_theory, r.bits_counted), "sim {} theory {}", r.ber_total_sim, r.ber_total_theory);
}

#[test]
fn baseline_flat_rayleigh_at_10_db() {
    let r = run_baseline_ofdm_bpsk(&cfg(Policy::PowerSaving, ChannelMode::FlatRayleighIid, 50_000, 22), 10.0).unwrap();
    assert!((r.ber_bpsk_theory - 0.02327).abs() < 1e-5);
    assert!((r.ber_bpsk_sim - r.ber_bpsk_theory).abs() <= 3.0 * sigma(r.ber_bpsk_theory, r.bits_counted));
    assert!((r.throughput - (1.0 - r.ber_bpsk_sim)).abs() < 1e-15);
    assert_eq!(r.ber_power_sim, None);
}

#[test]
fn baseline_saturates_at_one_bit() {
    let c = cfg(Policy::PowerSaving, ChannelMode::Multipath, 10_000, 23);
    let low = run_baseline_ofdm_bpsk(&c, 30.0).unwrap();
    let spm = run_point(&c, 30.0).unwrap();
    assert!(low.throughput > 0.99 && low.throughput <= 1.0);
    assert!(spm.throughput > 1.98);
}

#[test]
fn multipath_bpsk_matches_flat_closed_form() {
    // Unit-power profile: each bin sees unit-mean Rayleigh fading.
    let records = run_baseline_sweep(&SimConfig {
        snr_db_grid: vec![0.0, 10.0, 20.0],
        ..cfg(Policy::PowerSaving, ChannelMode::Multipath, 50_000, 24)
    })
    .unwrap();
    for r in records {
        let p = rayleigh_bpsk_ber(db_to_linear(r.snr_db)).unwrap();
        assert!(((r.ber_bpsk_sim - p) / p).abs() < 0.05, "{} dB: {} vs {p}", r.snr_db, r.ber_bpsk_sim);
    }
}

#[test]
fn per_stream_accounting() {
    let c = cfg(Policy::ReallocOptimized, ChannelMode::Multipath, 2_000, 25);
    let r = run_point(&c, 5.0).unwrap();
    let bits = 2 * 52 * 2_000u64;
    assert_eq!(r.bits_counted, bits);
    assert_eq!(r.ber_total_sim, (r.errors.power_errors + r.errors.bpsk_errors) as f64 / bits as f64);
    assert!((r.throughput - 2.0 * (1.0 - r.ber_total_sim)).abs() < 1e-12);
}

#[test]
fn saving_sweep_trend_and_throughput() {
    let records = run_sweep(&cfg(Policy::PowerSaving, ChannelMode::Multipath, 20_000, 26)).unwrap();
    assert_eq!(records.len(), 7);
    for w in records.windows(2) {
        assert!(w[1].ber_total_sim <= w[0].ber_total_sim, "{} dB -> {} dB", w[0].snr_db, w[1].snr_db);
    }
    let at20 = records.iter().find(|r| r.snr_db == 20.0).unwrap();
    assert!(at20.throughput > 1.95, "throughput {}", at20.throughput);
}

#[test]
fn empty_grid_is_rejected() {
    let c = SimConfig { snr_db_grid: vec![], ..SimConfig::default() };
    assert!(run_sweep(&c).is_err());
}

#[test]
fn reallocation_bpsk_stream_beats_baseline() {
    let grid = vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
    let c = SimConfig {
        snr_db_grid: grid,
        ..cfg(Policy::ReallocNonOptimized, ChannelMode::Multipath, 50_000, 27)
    };
    let spm = run_sweep(&c).unwrap();
    let base = run_baseline_sweep(&c).unwrap();
    for (s, b) in spm.iter().zip(&base) {
        assert!(s.ber_bpsk_sim < b.ber_bpsk_sim, "{} dB: {} vs {}", s.snr_db, s.ber_bpsk_sim, b.ber_bpsk_sim);
    }
}

#[test]
fn magnitude_statistic_sits_above_closed_form() {
    // Quadrature noise enlarges the low-level error region of |Ŝ|² detection.
    let c = SimConfig {
        power_statistic: PowerStatistic::Magnitude,
        ..cfg(Policy::PowerSaving, ChannelMode::FlatRayleighIid, 20_000, 28)
    };
    let r = run_point(&c, 10.0).unwrap();
    let sim = r.ber_power_sim.unwrap();
    let theory = r.ber_power_theory.unwrap();
    assert!(sim > 1.1 * theory, "sim {sim} theory {theory}");
    // The BPSK decision does not depend on the power statistic.
    let in_phase = run_point(&SimConfig { power_statistic: PowerStatistic::InPhase, ..c }, 10.0).unwrap();
    assert_eq!(in_phase.errors.bpsk_errors, r.errors.bpsk_errors);
}

#[test]
fn explicit_and_reference_pairs_agree() {
    let base = cfg(Policy::ReallocOptimized, ChannelMode::FlatRayleighIid, 500, 29);
    let reference = run_point(&base, 12.0).unwrap();
    let explicit = run_point(&SimConfig { pair: PairChoice::High(1.918), ..base.clone() }, 12.0).unwrap();
    assert_eq!(reference, explicit);
    let pair = PowerPair::reference(Policy::ReallocOptimized);
    assert_eq!(simulate_spm(&base, &pair, 12.0).unwrap(), reference.errors);
}

#[test]
fn sweep_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let c = SimConfig { snr_db_grid: vec![0.0, 10.0], ..cfg(Policy::PowerSaving, ChannelMode::Multipath, 200, 30) };
    let records = run_sweep(&c).unwrap();
    let mut file = std::fs::File::create(&path).unwrap();
    write_sweep_csv(&mut file, &records).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], SWEEP_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,"));
    assert!(lines[2].ends_with(",20800,30"));
}
