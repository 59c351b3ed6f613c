//! Simulation configuration and its flat `key = value` file format.
//!
//! ```text
//! # comment
//! policy = saving
//! pair = reference          # reference | auto | H | L,H
//! snr_db_grid = 0:5:30      # start:step:stop or a comma list; `inf` means no noise
//! channel_mode = multipath  # multipath | flat | identity
//! channel_delays = 0,3,5,6,8
//! channel_powers_db = 0,-8,-17,-21,-25
//! ```

use std::path::Path;
use std::str::FromStr;

use crate::channel::{make_profile, ChannelProfile};
use crate::error::{Error, Result};
use crate::levels::{Policy, PowerPair, SubcarrierLayout};
use crate::rx::PowerStatistic;

/// How the simulated channel is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelMode {
    /// Tap delay line with Rayleigh taps, convolved in the time domain.
    #[default]
    Multipath,
    /// Independent unit-variance Rayleigh gain on every data subcarrier.
    FlatRayleighIid,
    /// `h = [1]`.
    Identity,
}

impl FromStr for ChannelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "multipath" | "multipath_table1" | "multipath-table1" => Ok(ChannelMode::Multipath),
            "flat" | "flat_rayleigh_iid" | "flat-rayleigh-iid" => Ok(ChannelMode::FlatRayleighIid),
            "identity" => Ok(ChannelMode::Identity),
            other => Err(Error::Config(format!("unknown channel mode {other:?}"))),
        }
    }
}

/// What the SNR axis measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrConvention {
    /// SNR is the per-subcarrier symbol SNR with unit reference energy:
    /// `N0 = 10^(−snr_db/10)`.
    #[default]
    PerSubcarrier,
    /// SNR is energy per information bit: the mean subcarrier energy is
    /// divided by the bits it carries (two for OFDM-SPM, one for BPSK).
    /// Cyclic-prefix energy is not counted.
    PerBit,
}

impl FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "per-subcarrier" | "per_subcarrier" | "subcarrier" => Ok(SnrConvention::PerSubcarrier),
            "per-bit" | "per_bit" | "bit" => Ok(SnrConvention::PerBit),
            other => Err(Error::Config(format!("unknown snr convention {other:?}"))),
        }
    }
}

/// Which `(L, H)` pair a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PairChoice {
    /// Published pair for the policy.
    #[default]
    Reference,
    /// Run the level scan with the closed-form objective.
    Auto,
    /// `H` given, `L` from the policy budget.
    High(f64),
    /// Both levels given; the budget must match the policy.
    Levels(f64, f64),
}

impl FromStr for PairChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "reference" => return Ok(PairChoice::Reference),
            "auto" => return Ok(PairChoice::Auto),
            _ => {}
        }
        let values = parse_f64_list(s)?;
        match values.as_slice() {
            [h] => Ok(PairChoice::High(*h)),
            [l, h] => Ok(PairChoice::Levels(*l, *h)),
            _ => Err(Error::Config(format!("pair must be reference, auto, H or L,H; got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub fft_size: usize,
    pub data_subcarriers: usize,
    pub cp_len: usize,
    pub guard_count: usize,
    pub ofdm_symbol_count: usize,
    pub policy: Policy,
    pub pair: PairChoice,
    pub snr_db_grid: Vec<f64>,
    pub channel_mode: ChannelMode,
    pub channel_delays: Vec<usize>,
    pub channel_powers_db: Vec<f64>,
    /// OFDM symbols sharing one channel draw.
    pub coherence_block: usize,
    pub master_seed: u64,
    pub snr_convention: SnrConvention,
    pub power_statistic: PowerStatistic,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    pub workers: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        let profile = ChannelProfile::reference();
        Self {
            fft_size: 64,
            data_subcarriers: 52,
            cp_len: 16,
            guard_count: 12,
            ofdm_symbol_count: 50_000,
            policy: Policy::PowerSaving,
            pair: PairChoice::Reference,
            snr_db_grid: (0..=30).step_by(5).map(f64::from).collect(),
            channel_mode: ChannelMode::Multipath,
            channel_delays: profile.delays().to_vec(),
            channel_powers_db: profile.powers_db().to_vec(),
            coherence_block: 1,
            master_seed: 0,
            snr_convention: SnrConvention::PerSubcarrier,
            power_statistic: PowerStatistic::InPhase,
            workers: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.data_subcarriers + self.guard_count != self.fft_size {
            return fail(format!(
                "data subcarriers ({}) + guards ({}) must equal fft size ({})",
                self.data_subcarriers, self.guard_count, self.fft_size
            ));
        }
        if self.ofdm_symbol_count == 0 {
            return fail("ofdm_symbol_count must be at least 1".into());
        }
        if self.snr_db_grid.is_empty() {
            return fail("snr_db_grid is empty".into());
        }
        if let Some(bad) = self.snr_db_grid.iter().find(|v| v.is_nan() || **v == f64::NEG_INFINITY) {
            return fail(format!("invalid snr grid value {bad}"));
        }
        if self.coherence_block == 0 {
            return fail("coherence_block must be at least 1".into());
        }
        if self.cp_len >= self.fft_size {
            return fail(format!("cp_len {} must be below fft_size {}", self.cp_len, self.fft_size));
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        self.layout()?;
        let profile = self.profile()?;
        if self.channel_mode == ChannelMode::Multipath && profile.max_delay() > self.cp_len {
            return fail(format!(
                "channel spans {} samples but the cyclic prefix is only {}",
                profile.max_delay(),
                self.cp_len
            ));
        }
        if self.pair != PairChoice::Auto {
            self.explicit_pair()?;
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<SubcarrierLayout> {
        SubcarrierLayout::centered(self.fft_size, self.data_subcarriers)
    }

    pub fn profile(&self) -> Result<ChannelProfile> {
        make_profile(&self.channel_delays, &self.channel_powers_db)
    }

    /// The pair for every choice except [`PairChoice::Auto`].
    pub(crate) fn explicit_pair(&self) -> Result<PowerPair> {
        match self.pair {
            PairChoice::Reference => Ok(PowerPair::reference(self.policy)),
            PairChoice::High(h) => PowerPair::for_policy(self.policy, h),
            PairChoice::Levels(l, h) => {
                let pair = PowerPair::from_levels(l, h)?;
                let budget = self.policy.budget_multiple();
                // Hand-entered levels are usually rounded.
                if ((pair.budget() - budget) / budget).abs() > 1e-3 {
                    return Err(Error::Config(format!(
                        "L² + H² = {} does not fit the {} budget {budget}",
                        pair.budget(),
                        self.policy
                    )));
                }
                Ok(pair)
            }
            PairChoice::Auto => Err(Error::Config("pair is auto".into())),
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "fft_size" => self.fft_size = parse(key, value)?,
            "data_subcarriers" => self.data_subcarriers = parse(key, value)?,
            "cp_len" => self.cp_len = parse(key, value)?,
            "guard_count" => self.guard_count = parse(key, value)?,
            "ofdm_symbol_count" => self.ofdm_symbol_count = parse_count(key, value)?,
            "policy" => self.policy = value.parse()?,
            "pair" => self.pair = value.parse()?,
            "snr_db_grid" => self.snr_db_grid = parse_grid(value)?,
            "channel_mode" => self.channel_mode = value.parse()?,
            "channel_delays" => {
                self.channel_delays = split_list(value)
                    .map(|v| parse::<usize>(key, v))
                    .collect::<Result<_>>()?
            }
            "channel_powers_db" => self.channel_powers_db = parse_f64_list(value)?,
            "coherence_block" => self.coherence_block = parse(key, value)?,
            "master_seed" | "seed" => self.master_seed = parse(key, value)?,
            "snr_convention" => self.snr_convention = value.parse()?,
            "power_statistic" => self.power_statistic = value.parse()?,
            "workers" => self.workers = Some(parse(key, value)?),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies every setting in a `key = value` text, on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

/// Accepts plain integers and `5e4`-style counts.
fn parse_count(key: &str, value: &str) -> Result<usize> {
    if let Ok(v) = value.parse::<usize>() {
        return Ok(v);
    }
    let f: f64 = parse(key, value)?;
    if f < 0.0 || f.fract() != 0.0 || f > usize::MAX as f64 {
        return Err(Error::Config(format!("bad count {value:?} for {key}")));
    }
    Ok(f as usize)
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value
        .trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split([',', ' '])
        .map(str::trim)
        .filter(|s| !s.is_empty())
}

fn parse_f64_list(value: &str) -> Result<Vec<f64>> {
    split_list(value).map(|v| parse::<f64>("list", v)).collect()
}

/// `start:step:stop` (inclusive) or an explicit list.
pub fn parse_grid(value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() == 3 {
        let start: f64 = parse("grid start", parts[0])?;
        let step: f64 = parse("grid step", parts[1])?;
        let stop: f64 = parse("grid stop", parts[2])?;
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(Error::Config(format!("bad grid range {value:?}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    parse_f64_list(value)
}
