//! Receiver: CP removal, forward FFT, zero-forcing equalization and the two
//! parallel detectors (power threshold and coherent BPSK).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::levels::{detection_threshold, PowerPair, SpmFrameBits, SubcarrierLayout};
use crate::tx::{FreqGrid, OfdmModem, TimeSymbol};

/// Channel gains below this magnitude erase the subcarrier.
pub const ERASURE_GAIN: f64 = 1e-12;

/// Zero-forced estimates on the data subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedGrid {
    pub symbols: Vec<Complex64>,
    /// Set where the channel gain was too small to invert; the symbol is zero.
    pub erased: Vec<bool>,
}

/// Quantity compared against the power threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerStatistic {
    /// `Re(Ŝ)²`: power of the equalized symbol projected onto the real
    /// constellation axis. Quadrature noise is discarded before thresholding.
    #[default]
    InPhase,
    /// `|Ŝ|²`: full power of the equalized symbol.
    Magnitude,
}

impl std::str::FromStr for PowerStatistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "in-phase" | "inphase" => Ok(PowerStatistic::InPhase),
            "magnitude" => Ok(PowerStatistic::Magnitude),
            other => Err(Error::Config(format!("unknown power statistic {other:?}"))),
        }
    }
}

impl OfdmModem {
    /// Strips the prefix and applies the unitary forward FFT.
    pub fn demodulate(&self, sym: &TimeSymbol, layout: Arc<SubcarrierLayout>) -> Result<FreqGrid> {
        let n = self.fft_size();
        let expected = n + self.cp_len();
        if sym.samples.len() != expected || sym.cp_len != self.cp_len() {
            return Err(Error::LengthMismatch { expected, actual: sym.samples.len() });
        }
        if layout.fft_size() != n {
            return Err(Error::LengthMismatch { expected: n, actual: layout.fft_size() });
        }
        let mut bins = sym.body().to_vec();
        self.fft().forward(&mut bins);
        Ok(FreqGrid { bins, layout })
    }
}

/// One-shot demodulation; see [`OfdmModem::demodulate`].
pub fn ofdm_demodulate(sym: &TimeSymbol, layout: Arc<SubcarrierLayout>) -> Result<FreqGrid> {
    OfdmModem::new(layout.fft_size(), sym.cp_len)?.demodulate(sym, layout)
}

/// Picks the data-bin entries of a full-length frequency response.
pub fn data_gains(freq_response: &[Complex64], layout: &SubcarrierLayout) -> Vec<Complex64> {
    layout.data_indices().iter().map(|&k| freq_response[k]).collect()
}

/// `Ŝ_k = Y_k / H_k` on the data bins. `gains` are in layout data order.
pub fn equalize(received: &FreqGrid, gains: &[Complex64]) -> Result<EqualizedGrid> {
    let data = received.layout.data_indices();
    if gains.len() != data.len() {
        return Err(Error::LengthMismatch { expected: data.len(), actual: gains.len() });
    }
    let mut symbols = Vec::with_capacity(data.len());
    let mut erased = Vec::with_capacity(data.len());
    for (&k, &h) in data.iter().zip(gains) {
        if h.norm() < ERASURE_GAIN {
            symbols.push(Complex64::default());
            erased.push(true);
        } else {
            symbols.push(received.bins[k] / h);
            erased.push(false);
        }
    }
    Ok(EqualizedGrid { symbols, erased })
}

/// `1` iff `|s|² > t`; ties go to `0`.
pub fn detect_power_bit(s: Complex64, t: f64) -> bool {
    s.norm_sqr() > t
}

/// `1` iff `Re(s) > 0`; ties go to `0`.
pub fn detect_bpsk_bit(s: Complex64) -> bool {
    s.re > 0.0
}

/// Power detector input for the chosen statistic.
fn power_input(s: Complex64, statistic: PowerStatistic) -> Complex64 {
    match statistic {
        PowerStatistic::InPhase => Complex64::new(s.re, 0.0),
        PowerStatistic::Magnitude => s,
    }
}

/// Applies both detectors to every equalized symbol, in subcarrier order.
pub fn detect_frame(eq: &EqualizedGrid, threshold: f64, statistic: PowerStatistic) -> SpmFrameBits {
    let mut power_bits = Vec::with_capacity(eq.symbols.len());
    let mut bpsk_bits = Vec::with_capacity(eq.symbols.len());
    for (&s, &erased) in eq.symbols.iter().zip(&eq.erased) {
        if erased {
            power_bits.push(false);
            bpsk_bits.push(false);
        } else {
            power_bits.push(detect_power_bit(power_input(s, statistic), threshold));
            bpsk_bits.push(detect_bpsk_bit(s));
        }
    }
    SpmFrameBits { power_bits, bpsk_bits }
}

/// Full OFDM-SPM receive chain with a reusable FFT plan.
#[derive(Debug, Clone)]
pub struct SpmReceiver {
    modem: OfdmModem,
    layout: Arc<SubcarrierLayout>,
    threshold: f64,
    statistic: PowerStatistic,
}

impl SpmReceiver {
    pub fn new(
        layout: Arc<SubcarrierLayout>,
        cp_len: usize,
        pair: &PowerPair,
        statistic: PowerStatistic,
    ) -> Result<Self> {
        let modem = OfdmModem::new(layout.fft_size(), cp_len)?;
        Ok(Self { modem, layout, threshold: detection_threshold(pair), statistic })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn equalized(&self, sym: &TimeSymbol, gains: &[Complex64]) -> Result<EqualizedGrid> {
        let grid = self.modem.demodulate(sym, self.layout.clone())?;
        equalize(&grid, gains)
    }

    pub fn receive(&self, sym: &TimeSymbol, gains: &[Complex64]) -> Result<SpmFrameBits> {
        let eq = self.equalized(sym, gains)?;
        Ok(detect_frame(&eq, self.threshold, self.statistic))
    }

    /// Conventional OFDM-BPSK reception: sign decisions only.
    pub fn receive_bpsk(&self, sym: &TimeSymbol, gains: &[Complex64]) -> Result<Vec<bool>> {
        let eq = self.equalized(sym, gains)?;
        Ok(eq
            .symbols
            .iter()
            .zip(&eq.erased)
            .map(|(&s, &erased)| !erased && detect_bpsk_bit(s))
            .collect())
    }
}

/// Demodulate, equalize and detect one symbol with the default statistic.
pub fn receive_frame(
    sym: &TimeSymbol,
    gains: &[Complex64],
    pair: &PowerPair,
    layout: Arc<SubcarrierLayout>,
) -> Result<SpmFrameBits> {
    SpmReceiver::new(layout, sym.cp_len, pair, PowerStatistic::default())?.receive(sym, gains)
}
