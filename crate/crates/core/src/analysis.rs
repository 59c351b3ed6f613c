//! Closed-form BER over Rayleigh fading, error counting and throughput.
//!
//! All SNR arguments are linear `Eb/N0` with `Eb = 1`; level factors scale
//! it by their square.

use crate::error::{invalid, Error, Result};
use crate::levels::{PowerPair, SpmFrameBits};

/// `½(1 − sqrt(r / (1 + r)))`, rearranged as `½ / ((1 + r)(1 + sqrt(r / (1 + r))))`
/// so that the high-SNR tail keeps full relative precision.
fn rayleigh_tail(r: f64) -> f64 {
    if r.is_infinite() {
        return 0.0;
    }
    let q = (r / (1.0 + r)).sqrt();
    0.5 / ((1.0 + r) * (1.0 + q))
}

fn check_snr(snr: f64) -> Result<()> {
    if snr.is_nan() || snr < 0.0 {
        return Err(invalid(format!("snr must be non-negative, got {snr}")));
    }
    Ok(())
}

/// BER of coherent BPSK over flat Rayleigh fading at linear SNR `snr`.
pub fn rayleigh_bpsk_ber(snr: f64) -> Result<f64> {
    check_snr(snr)?;
    Ok(rayleigh_tail(snr))
}

/// BPSK BER for a symbol transmitted at amplitude `factor`.
pub fn ber_level(snr: f64, factor: f64) -> Result<f64> {
    if !factor.is_finite() || factor <= 0.0 {
        return Err(invalid(format!("level factor must be positive, got {factor}")));
    }
    rayleigh_bpsk_ber(factor * factor * snr)
}

/// BPSK-stream BER: mean of the low-level and high-level BERs.
pub fn ber_bpsk_avg(snr: f64, pair: &PowerPair) -> Result<f64> {
    Ok(0.5 * (ber_level(snr, pair.low())? + ber_level(snr, pair.high())?))
}

/// Terms of the power-bit BER.
///
/// `a`, `b`, `c` are the collected terms with weights ½, ¼, ¼ at decision
/// distances `(H−L)/2`, `(H+3L)/2`, `(3H+L)/2`. `e1..e4` are the pairwise
/// error events they were collected from: low mistaken for `+H` (`e1`) or
/// `−H` (`e2`); high mistaken for low (`e3`) or for the mirrored high level
/// (`e4`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBerTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

impl PowerBerTerms {
    pub fn compute(snr: f64, pair: &PowerPair) -> Result<Self> {
        check_snr(snr)?;
        let (l, h) = (pair.low(), pair.high());
        let near = (h - l) / 2.0;
        let low_far = (h + 3.0 * l) / 2.0;
        let high_far = (3.0 * h + l) / 2.0;
        let term = |d: f64| rayleigh_tail(d * d * snr);
        // Event probabilities use the textbook form, kept apart from the
        // collected terms so the two can be checked against each other.
        let event = |d: f64| {
            let r = d * d * snr;
            if r.is_infinite() {
                0.0
            } else {
                0.5 * (1.0 - (r / (1.0 + r)).sqrt())
            }
        };
        Ok(Self {
            // rayleigh_tail already carries a factor ½.
            a: term(near),
            b: 0.5 * term(low_far),
            c: 0.5 * term(high_far),
            e1: event(near),
            e2: event(low_far),
            e3: event((h - l) / 2.0),
            e4: event(high_far),
        })
    }

    /// `A + B − C`.
    pub fn collected(&self) -> f64 {
        self.a + self.b - self.c
    }

    /// Per-event sum: `¼(E1 + E2) + ¼(E3 − E4)` over both half planes.
    pub fn from_events(&self) -> f64 {
        2.0 * (0.25 * (self.e1 + self.e2) + 0.25 * (self.e3 - self.e4))
    }
}

/// BER of the power-level stream.
pub fn ber_power(snr: f64, pair: &PowerPair) -> Result<f64> {
    Ok(PowerBerTerms::compute(snr, pair)?.collected())
}

/// Closed-form BER of every stream at one SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerBreakdown {
    pub snr_linear: f64,
    pub ber_bpsk_low: f64,
    pub ber_bpsk_high: f64,
    pub ber_bpsk_avg: f64,
    pub ber_power: f64,
    pub ber_total: f64,
}

/// Total OFDM-SPM BER, the mean of the power and BPSK streams.
pub fn ber_total(snr: f64, pair: &PowerPair) -> Result<BerBreakdown> {
    let ber_bpsk_low = ber_level(snr, pair.low())?;
    let ber_bpsk_high = ber_level(snr, pair.high())?;
    let ber_bpsk_avg = 0.5 * (ber_bpsk_low + ber_bpsk_high);
    let ber_power = ber_power(snr, pair)?;
    Ok(BerBreakdown {
        snr_linear: snr,
        ber_bpsk_low,
        ber_bpsk_high,
        ber_bpsk_avg,
        ber_power,
        ber_total: 0.5 * (ber_power + ber_bpsk_avg),
    })
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Bit error counts for both streams. Merges by summation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorCounts {
    pub power_errors: u64,
    pub bpsk_errors: u64,
    /// Bits sent on each stream.
    pub bits_per_stream: u64,
}

impl ErrorCounts {
    pub fn total_errors(&self) -> u64 {
        self.power_errors + self.bpsk_errors
    }

    pub fn total_bits(&self) -> u64 {
        2 * self.bits_per_stream
    }

    pub fn ber_power(&self) -> f64 {
        self.power_errors as f64 / self.bits_per_stream as f64
    }

    pub fn ber_bpsk(&self) -> f64 {
        self.bpsk_errors as f64 / self.bits_per_stream as f64
    }

    pub fn ber_total(&self) -> f64 {
        self.total_errors() as f64 / self.total_bits() as f64
    }

    /// Adds the mismatches between one sent and one received frame.
    pub fn record(&mut self, sent: &SpmFrameBits, received: &SpmFrameBits) -> Result<()> {
        if sent.n() != received.n() {
            return Err(Error::LengthMismatch { expected: sent.n(), actual: received.n() });
        }
        self.power_errors += hamming(&sent.power_bits, &received.power_bits);
        self.bpsk_errors += hamming(&sent.bpsk_bits, &received.bpsk_bits);
        self.bits_per_stream += sent.n() as u64;
        Ok(())
    }
}

impl std::ops::AddAssign for ErrorCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.power_errors += rhs.power_errors;
        self.bpsk_errors += rhs.bpsk_errors;
        self.bits_per_stream += rhs.bits_per_stream;
    }
}

impl std::iter::Sum for ErrorCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |mut acc, c| {
            acc += c;
            acc
        })
    }
}

pub(crate) fn hamming(a: &[bool], b: &[bool]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Per-stream error counts between two frame sequences.
pub fn count_errors(sent: &[SpmFrameBits], received: &[SpmFrameBits]) -> Result<ErrorCounts> {
    if sent.len() != received.len() {
        return Err(Error::LengthMismatch { expected: sent.len(), actual: received.len() });
    }
    let mut counts = ErrorCounts::default();
    for (s, r) in sent.iter().zip(received) {
        counts.record(s, r)?;
    }
    Ok(counts)
}

/// Goodput in bits/s/Hz of two one-bit streams per subcarrier:
/// `(1 − ber_power) + (1 − ber_bpsk)`.
pub fn throughput(ber_power: f64, ber_bpsk: f64) -> f64 {
    (1.0 - ber_power) + (1.0 - ber_bpsk)
}

/// One row of a sweep: simulated and closed-form BER at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub snr_db: f64,
    /// `None` for conventional OFDM-BPSK, which has no power stream.
    pub ber_power_sim: Option<f64>,
    pub ber_bpsk_sim: f64,
    pub ber_total_sim: f64,
    pub ber_power_theory: Option<f64>,
    pub ber_bpsk_theory: f64,
    pub ber_total_theory: f64,
    pub throughput: f64,
    pub bits_counted: u64,
    pub errors: ErrorCounts,
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Textbook form without the cancellation-safe rearrangement.
    fn naive(r: f64) -> f64 {
        0.5 * (1.0 - (r / (1.0 + r)).sqrt())
    }

    fn saving() -> PowerPair {
        PowerPair::from_levels(0.4213, 1.35).unwrap()
    }

    #[test]
    fn bpsk_reference_values() {
        assert_eq!(rayleigh_bpsk_ber(0.0).unwrap(), 0.5);
        assert!((rayleigh_bpsk_ber(10.0).unwrap() - 0.023_268_705_377).abs() < 1e-10);
        let tail = rayleigh_bpsk_ber(1e4).unwrap();
        assert!((2.49e-5..=2.51e-5).contains(&tail));
        assert!((tail - 2.499_812_515_624e-5).abs() < 1e-15);
        assert!(rayleigh_bpsk_ber(-1.0).is_err());
        assert_eq!(rayleigh_bpsk_ber(f64::INFINITY).unwrap(), 0.0);
        // The naive form loses every digit here.
        let deep = rayleigh_bpsk_ber(1e12).unwrap();
        assert!((deep * 4e12 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn level_values() {
        assert_eq!(ber_level(7.3, 1.0).unwrap(), rayleigh_bpsk_ber(7.3).unwrap());
        assert!((ber_level(10.0, 1.35).unwrap() - 0.013_177_548_967).abs() < 1e-10);
        assert!((ber_level(10.0, 0.4213).unwrap() - 0.100_115_189_926).abs() < 1e-10);
        assert!(ber_level(1.0, 0.0).is_err());
        assert!(ber_level(1.0, -1.0).is_err());
    }

    #[test]
    fn bpsk_average_values() {
        let unit = PowerPair::from_levels(0.999_999_999, 1.000_000_001).unwrap();
        assert!((ber_bpsk_avg(3.0, &unit).unwrap() - rayleigh_bpsk_ber(3.0).unwrap()).abs() < 1e-9);
        assert!((ber_bpsk_avg(10.0, &saving()).unwrap() - 0.056_646_369_446).abs() < 1e-10);
        assert_eq!(ber_bpsk_avg(0.0, &saving()).unwrap(), 0.5);
    }

    #[test]
    fn power_values() {
        let t = PowerBerTerms::compute(10.0, &saving()).unwrap();
        assert!((t.a - 0.086_731_254_602).abs() < 1e-10);
        assert!((t.b - 0.007_011_589_227).abs() < 1e-10);
        assert!((t.c - 0.002_464_021_778).abs() < 1e-10);
        assert!((t.collected() - 0.091_278_822_052).abs() < 1e-10);
        assert!((t.collected() - t.from_events()).abs() < 1e-12);
        assert_eq!(ber_power(0.0, &saving()).unwrap(), 0.5);
        let far = ber_power(1e6, &saving()).unwrap();
        assert!(far > 0.0 && far < 1e-5);
    }

    #[test]
    fn total_values() {
        for pair in [saving(), PowerPair::from_levels(1.0, 1.732).unwrap()] {
            assert_eq!(ber_total(0.0, &pair).unwrap().ber_total, 0.5);
        }
        let b = ber_total(10.0, &saving()).unwrap();
        let by_hand = 0.5 * (0.091_278_822_052 + 0.5 * (0.013_177_548_967 + 0.100_115_189_926));
        assert!((b.ber_total - by_hand).abs() < 1e-10);
        assert!((b.ber_total - 0.073_962_595_749).abs() < 1e-10);
        assert_eq!(b.ber_bpsk_avg, 0.5 * (b.ber_bpsk_low + b.ber_bpsk_high));
    }

    #[test]
    fn total_strictly_decreasing() {
        for pair in [saving(), PowerPair::from_levels(0.5668, 1.918).unwrap()] {
            let values: Vec<f64> = (0..=400)
                .map(|i| ber_total(db_to_linear(i as f64 * 0.1), &pair).unwrap().ber_total)
                .collect();
            assert!(values.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn counting() {
        let a = SpmFrameBits::new(vec![true; 52], vec![false; 52]).unwrap();
        let same = count_errors(std::slice::from_ref(&a), std::slice::from_ref(&a)).unwrap();
        assert_eq!(same.total_errors(), 0);

        let inverse = SpmFrameBits::new(vec![false; 52], vec![true; 52]).unwrap();
        assert_eq!(count_errors(std::slice::from_ref(&a), &[inverse]).unwrap().ber_total(), 1.0);

        let mut one = a.clone();
        one.power_bits[7] = false;
        let c = count_errors(std::slice::from_ref(&a), &[one]).unwrap();
        assert_eq!(c.ber_power(), 1.0 / 52.0);
        assert_eq!(c.ber_total(), 1.0 / 104.0);
        assert_eq!(c.ber_bpsk(), 0.0);

        assert!(count_errors(std::slice::from_ref(&a), &[]).is_err());
        let short = SpmFrameBits::new(vec![true], vec![true]).unwrap();
        assert!(count_errors(&[a], &[short]).is_err());
    }

    #[test]
    fn throughput_values() {
        assert_eq!(throughput(0.0, 0.0), 2.0);
        assert_eq!(throughput(0.5, 0.5), 1.0);
        assert!((throughput(0.03, 0.02) - 1.95).abs() < 1e-12);
    }

    fn triple() -> impl Strategy<Value = (PowerPair, f64)> {
        (0.01f64..3.0, 0.001f64..3.0, -10.0f64..60.0).prop_map(|(low, gap, snr_db)| {
            (PowerPair::from_levels(low, low + gap).unwrap(), db_to_linear(snr_db))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn collected_terms_match_events((pair, snr) in triple()) {
            let t = PowerBerTerms::compute(snr, &pair).unwrap();
            prop_assert!((t.collected() - t.from_events()).abs() < 1e-12);
            prop_assert!((t.collected() - (t.e1 + 0.5 * t.e2 - 0.5 * t.e4)).abs() < 1e-12);
            prop_assert_eq!(t.e1, t.e3);
        }

        #[test]
        fn probabilities_in_range((pair, snr) in triple()) {
            let b = ber_total(snr, &pair).unwrap();
            for p in [b.ber_bpsk_low, b.ber_bpsk_high, b.ber_bpsk_avg, b.ber_power, b.ber_total] {
                prop_assert!(p > 0.0 && p <= 0.5);
            }
            let higher = ber_total(snr * 1.01, &pair).unwrap();
            prop_assert!(higher.ber_total < b.ber_total);
        }

        #[test]
        fn stable_form_agrees_with_textbook(r in 0.0f64..1e4) {
            let stable = rayleigh_bpsk_ber(r).unwrap();
            prop_assert!((stable - naive(r)).abs() < 1e-12);
        }
    }
}
