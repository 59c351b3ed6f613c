//! Power levels, payload bits and the four-point OFDM-SPM constellation.
//!
//! Symbol energy `Eb` is normalized to one unless a caller passes another
//! value explicitly. `L` and `H` are amplitude factors relative to a
//! unit-energy BPSK symbol.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const BUDGET_REL_TOL: f64 = 1e-9;

/// Power policy: how much energy the two levels may spend per subcarrier pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    /// `L² + H² = 2·Eb`: average subcarrier energy equals one BPSK symbol.
    PowerSaving,
    /// `L² + H² = 4·Eb` with the low level pinned near unity.
    ReallocNonOptimized,
    /// `L² + H² = 4·Eb` with levels chosen to minimize average BER.
    ReallocOptimized,
}

impl Policy {
    /// Budget `L² + H²` in multiples of `Eb`.
    pub fn budget_multiple(self) -> f64 {
        match self {
            Policy::PowerSaving => 2.0,
            Policy::ReallocNonOptimized | Policy::ReallocOptimized => 4.0,
        }
    }

    /// Published level pair for this policy, as the high factor `H`.
    pub fn reference_high(self) -> f64 {
        match self {
            Policy::PowerSaving => 1.35,
            Policy::ReallocNonOptimized => 1.732,
            Policy::ReallocOptimized => 1.918,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Policy::PowerSaving => "saving",
            Policy::ReallocNonOptimized => "realloc-nonopt",
            Policy::ReallocOptimized => "realloc-opt",
        }
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "saving" | "power-saving" | "powersaving" => Ok(Policy::PowerSaving),
            "realloc-nonopt" | "realloc-non-optimized" | "reallocnonoptimized" => {
                Ok(Policy::ReallocNonOptimized)
            }
            "realloc-opt" | "realloc-optimized" | "reallocoptimized" => {
                Ok(Policy::ReallocOptimized)
            }
            other => Err(Error::Config(format!("unknown policy {other:?}"))),
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Low/high amplitude factors and the energy budget they satisfy.
///
/// Always `0 < low < high`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPair {
    low: f64,
    high: f64,
    budget: f64,
}

impl PowerPair {
    /// Builds a pair and checks `L² + H² = budget` to 1e-9 relative.
    pub fn new(low: f64, high: f64, budget: f64) -> Result<Self> {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(invalid(format!("budget must be positive, got {budget}")));
        }
        let pair = Self::from_levels(low, high)?;
        if ((pair.budget - budget) / budget).abs() > BUDGET_REL_TOL {
            return Err(invalid(format!(
                "L² + H² = {} does not match budget {budget}",
                pair.budget
            )));
        }
        Ok(Self { budget, ..pair })
    }

    /// Builds a pair whose budget is whatever `L² + H²` comes to.
    pub fn from_levels(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite()) || low <= 0.0 {
            return Err(invalid(format!("levels must be finite and positive: L={low}, H={high}")));
        }
        if low >= high {
            return Err(Error::DegeneratePair { low, high });
        }
        Ok(Self { low, high, budget: low * low + high * high })
    }

    /// Solves `L = sqrt(budget − H²)` for the given budget.
    pub fn for_budget(budget: f64, high: f64) -> Result<Self> {
        if !(high.is_finite() && high > 0.0) {
            return Err(invalid(format!("high factor must be positive, got {high}")));
        }
        let high_sq = high * high;
        if high_sq >= budget {
            return Err(Error::NoValidLow { high_sq, budget });
        }
        let low = (budget - high_sq).sqrt();
        if low >= high {
            return Err(Error::DegeneratePair { low, high });
        }
        Ok(Self { low, high, budget })
    }

    /// Pair for `policy` with bit energy `eb`.
    pub fn for_policy_eb(policy: Policy, high: f64, eb: f64) -> Result<Self> {
        if !(eb.is_finite() && eb > 0.0) {
            return Err(invalid(format!("Eb must be positive, got {eb}")));
        }
        Self::for_budget(policy.budget_multiple() * eb, high)
    }

    /// Pair for `policy` with `Eb = 1`.
    pub fn for_policy(policy: Policy, high: f64) -> Result<Self> {
        Self::for_policy_eb(policy, high, 1.0)
    }

    /// The published pair for `policy`, with `L` re-derived from its budget.
    pub fn reference(policy: Policy) -> Self {
        Self::for_policy(policy, policy.reference_high()).expect("reference pairs are valid")
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Mean symbol energy over equiprobable power bits, `(L² + H²) / 2`.
    pub fn mean_symbol_energy(&self) -> f64 {
        0.5 * (self.low * self.low + self.high * self.high)
    }
}

/// Power detection threshold: the power of the midpoint `(L + H) / 2`.
pub fn detection_threshold(pair: &PowerPair) -> f64 {
    let mid = 0.5 * (pair.low + pair.high);
    mid * mid
}

/// BPSK map: `false → −1`, `true → +1`.
pub fn map_bpsk(bit: bool) -> f64 {
    if bit {
        1.0
    } else {
        -1.0
    }
}

/// Constellation point for one subcarrier: `±L` or `±H` on the real axis.
pub fn constellation_point(power_bit: bool, bpsk_bit: bool, pair: &PowerPair) -> Complex64 {
    let amplitude = if power_bit { pair.high } else { pair.low };
    Complex64::new(amplitude * map_bpsk(bpsk_bit), 0.0)
}

/// One OFDM symbol's payload: `n` power bits and `n` BPSK bits.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpmFrameBits {
    pub power_bits: Vec<bool>,
    pub bpsk_bits: Vec<bool>,
}

impl SpmFrameBits {
    pub fn new(power_bits: Vec<bool>, bpsk_bits: Vec<bool>) -> Result<Self> {
        if power_bits.len() != bpsk_bits.len() {
            return Err(Error::LengthMismatch {
                expected: power_bits.len(),
                actual: bpsk_bits.len(),
            });
        }
        Ok(Self { power_bits, bpsk_bits })
    }

    /// Number of data subcarriers.
    pub fn n(&self) -> usize {
        self.power_bits.len()
    }

    /// Concatenates the substreams back into the serial stream.
    pub fn merge(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(2 * self.n());
        out.extend_from_slice(&self.power_bits);
        out.extend_from_slice(&self.bpsk_bits);
        out
    }
}

/// Splits `2n` serial bits: the first `n` drive power, the last `n` drive BPSK.
pub fn split_bitstream(bits: &[bool], n: usize) -> Result<SpmFrameBits> {
    if bits.len() != 2 * n {
        return Err(Error::LengthMismatch { expected: 2 * n, actual: bits.len() });
    }
    let (power, bpsk) = bits.split_at(n);
    Ok(SpmFrameBits { power_bits: power.to_vec(), bpsk_bits: bpsk.to_vec() })
}

/// Which FFT bins carry data and which are nulled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcarrierLayout {
    fft_size: usize,
    data_indices: Vec<usize>,
    guard_indices: Vec<usize>,
}

impl SubcarrierLayout {
    /// Layout with the given data bins; every other bin is a guard.
    pub fn new(fft_size: usize, data_indices: Vec<usize>) -> Result<Self> {
        if fft_size == 0 {
            return Err(invalid("fft size must be positive"));
        }
        let mut used = vec![false; fft_size];
        for &k in &data_indices {
            if k >= fft_size {
                return Err(invalid(format!("data bin {k} outside [0, {fft_size})")));
            }
            if used[k] {
                return Err(invalid(format!("data bin {k} listed twice")));
            }
            used[k] = true;
        }
        let guard_indices = (0..fft_size).filter(|&k| !used[k]).collect();
        Ok(Self { fft_size, data_indices, guard_indices })
    }

    /// DC null, data on bins `±1..=±n/2`, remaining guards at the band edges.
    ///
    /// For 64 bins and 52 data subcarriers this leaves the DC bin, the six
    /// uppermost positive-frequency bins and the five lowermost
    /// negative-frequency bins empty. Data order runs from the most negative
    /// frequency to the most positive.
    pub fn centered(fft_size: usize, data_count: usize) -> Result<Self> {
        if !data_count.is_multiple_of(2) {
            return Err(invalid(format!("centered layout needs an even data count, got {data_count}")));
        }
        if data_count + 1 > fft_size {
            return Err(invalid(format!(
                "{data_count} data bins plus DC do not fit in {fft_size} bins"
            )));
        }
        let half = data_count / 2;
        let negative = (fft_size - half..fft_size).take(half);
        let positive = 1..=half;
        Self::new(fft_size, negative.chain(positive).collect())
    }

    /// 64-point grid with 52 data subcarriers and 12 inactive bins.
    pub fn standard() -> Self {
        Self::centered(64, 52).expect("standard layout is valid")
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn data_indices(&self) -> &[usize] {
        &self.data_indices
    }

    pub fn guard_indices(&self) -> &[usize] {
        &self.guard_indices
    }

    pub fn data_count(&self) -> usize {
        self.data_indices.len()
    }
}
