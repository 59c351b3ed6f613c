//! CSV emission. Floats use Rust's shortest round-trip formatting, so equal
//! records always produce identical bytes.

use std::io::Write;

use crate::analysis::{ber_total, db_to_linear, rayleigh_bpsk_ber, SweepRecord};
use crate::error::Result;
use crate::levels::PowerPair;

pub const SWEEP_HEADER: &str = "snr_db,ber_power_sim,ber_bpsk_sim,ber_total_sim,ber_power_theory,\
ber_bpsk_theory,ber_total_theory,throughput,bits_counted,seed";

pub const THEORY_HEADER: &str =
    "snr_db,ber_bpsk_low,ber_bpsk_high,ber_bpsk,ber_power,ber_total,ber_baseline,throughput";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(out: &mut W, records: &[SweepRecord]) -> Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.snr_db,
            opt(r.ber_power_sim),
            r.ber_bpsk_sim,
            r.ber_total_sim,
            opt(r.ber_power_theory),
            r.ber_bpsk_theory,
            r.ber_total_theory,
            r.throughput,
            r.bits_counted,
            r.seed
        )?;
    }
    Ok(())
}

/// Closed-form curves: `[snr_db, low, high, bpsk, power, total, baseline, throughput]`.
pub fn theory_rows(pair: &PowerPair, grid_db: &[f64]) -> Result<Vec<[f64; 8]>> {
    grid_db
        .iter()
        .map(|&db| {
            let snr = db_to_linear(db);
            let b = ber_total(snr, pair)?;
            Ok([
                db,
                b.ber_bpsk_low,
                b.ber_bpsk_high,
                b.ber_bpsk_avg,
                b.ber_power,
                b.ber_total,
                rayleigh_bpsk_ber(snr)?,
                2.0 * (1.0 - b.ber_total),
            ])
        })
        .collect()
}

pub fn write_theory_csv<W: Write>(out: &mut W, pair: &PowerPair, grid_db: &[f64]) -> Result<()> {
    writeln!(out, "{THEORY_HEADER}")?;
    for row in theory_rows(pair, grid_db)? {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
