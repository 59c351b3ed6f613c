//! Exhaustive scan over the high level `H` for the pair minimizing an average
//! BER objective under a policy budget.
//!
//! Candidates are `H = h_start + i·h_step` while `H² < budget − 1e-6`, with `L`
//! solved from the budget. Starting points below `sqrt(budget/2)` are allowed;
//! candidates with `L ≥ H` are skipped.

use std::io::Write;

use rayon::prelude::*;

use crate::analysis::{ber_total, db_to_linear};
use crate::error::{invalid, Error, Result};
use crate::harness::config::SimConfig;
use crate::levels::{Policy, PowerPair};

pub const DEFAULT_H_START: f64 = 1.05;
pub const DEFAULT_H_STEP: f64 = 0.01;

const BUDGET_MARGIN: f64 = 1e-6;

/// What the scan minimizes.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Mean closed-form total BER over an SNR grid in dB.
    ClosedForm { snr_db: Vec<f64> },
    /// Mean simulated total BER over the config's SNR grid, with its seed.
    MonteCarlo { config: Box<SimConfig> },
}

impl Default for Objective {
    fn default() -> Self {
        Objective::ClosedForm { snr_db: (0..=30).step_by(5).map(f64::from).collect() }
    }
}

impl Objective {
    pub fn evaluate(&self, pair: &PowerPair) -> Result<f64> {
        match self {
            Objective::ClosedForm { snr_db } => {
                if snr_db.is_empty() {
                    return Err(invalid("objective snr grid is empty"));
                }
                let mut sum = 0.0;
                for &db in snr_db {
                    sum += ber_total(db_to_linear(db), pair)?.ber_total;
                }
                Ok(sum / snr_db.len() as f64)
            }
            Objective::MonteCarlo { config } => {
                let mut sum = 0.0;
                for &db in &config.snr_db_grid {
                    sum += crate::harness::simulate_spm(config, pair, db)?.ber_total();
                }
                Ok(sum / config.snr_db_grid.len() as f64)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanEntry {
    pub high: f64,
    pub low: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub pair: PowerPair,
    pub objective: f64,
    /// Every evaluated candidate, in ascending `H`.
    pub trace: Vec<ScanEntry>,
}

impl ScanResult {
    pub fn write_trace_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "high,low,objective")?;
        for e in &self.trace {
            writeln!(out, "{},{},{}", e.high, e.low, e.objective)?;
        }
        Ok(())
    }
}

/// Feasible candidate pairs for the scan, in ascending `H`.
pub fn candidates(policy: Policy, h_start: f64, h_step: f64) -> Result<Vec<PowerPair>> {
    if !(h_start > 0.0 && h_start.is_finite()) {
        return Err(invalid(format!("h_start must be positive, got {h_start}")));
    }
    if !(h_step > 0.0 && h_step.is_finite()) {
        return Err(invalid(format!("h_step must be positive, got {h_step}")));
    }
    let budget = policy.budget_multiple();
    let mut out = Vec::new();
    for i in 0u64.. {
        // Multiplying instead of accumulating keeps the grid free of drift.
        let high = h_start + i as f64 * h_step;
        if high * high >= budget - BUDGET_MARGIN {
            break;
        }
        match PowerPair::for_budget(budget, high) {
            Ok(pair) => out.push(pair),
            Err(Error::DegeneratePair { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Scans the candidates and returns the argmin; ties go to the smaller `H`.
pub fn scan_levels(policy: Policy, objective: &Objective, h_start: f64, h_step: f64) -> Result<ScanResult> {
    let pairs = candidates(policy, h_start, h_step)?;
    if pairs.is_empty() {
        return Err(Error::NoCandidate);
    }
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|p| objective.evaluate(p))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    let trace = pairs
        .iter()
        .zip(&values)
        .map(|(p, &objective)| ScanEntry { high: p.high(), low: p.low(), objective })
        .collect();
    Ok(ScanResult { pair: pairs[best], objective: values[best], trace })
}
