//! Transmitter: bits onto the subcarrier grid, inverse FFT, cyclic prefix.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft::Fft;
use crate::levels::{constellation_point, map_bpsk, PowerPair, SpmFrameBits, SubcarrierLayout};

/// Frequency-domain OFDM symbol. Guard bins are zero on the transmit side.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqGrid {
    pub bins: Vec<Complex64>,
    pub layout: Arc<SubcarrierLayout>,
}

impl FreqGrid {
    pub fn zeros(layout: Arc<SubcarrierLayout>) -> Self {
        Self { bins: vec![Complex64::default(); layout.fft_size()], layout }
    }

    /// Values on the data bins, in layout order.
    pub fn data(&self) -> Vec<Complex64> {
        self.layout.data_indices().iter().map(|&k| self.bins[k]).collect()
    }

    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|b| b.norm_sqr()).sum()
    }
}

/// Time-domain OFDM symbol with its cyclic prefix in front.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSymbol {
    pub samples: Vec<Complex64>,
    pub cp_len: usize,
}

impl TimeSymbol {
    /// Samples after the prefix.
    pub fn body(&self) -> &[Complex64] {
        &self.samples[self.cp_len..]
    }
}

/// Places `constellation_point(power_bits[i], bpsk_bits[i])` on `data_indices[i]`.
pub fn assemble_grid(
    frame: &SpmFrameBits,
    pair: &PowerPair,
    layout: Arc<SubcarrierLayout>,
) -> Result<FreqGrid> {
    if frame.n() != layout.data_count() {
        return Err(Error::LengthMismatch { expected: layout.data_count(), actual: frame.n() });
    }
    let mut grid = FreqGrid::zeros(layout);
    for (i, &k) in grid.layout.data_indices().iter().enumerate() {
        grid.bins[k] = constellation_point(frame.power_bits[i], frame.bpsk_bits[i], pair);
    }
    Ok(grid)
}

/// Conventional OFDM-BPSK: one unit-energy BPSK symbol per data bin.
pub fn assemble_bpsk_grid(bits: &[bool], layout: Arc<SubcarrierLayout>) -> Result<FreqGrid> {
    if bits.len() != layout.data_count() {
        return Err(Error::LengthMismatch { expected: layout.data_count(), actual: bits.len() });
    }
    let mut grid = FreqGrid::zeros(layout);
    for (i, &k) in grid.layout.data_indices().iter().enumerate() {
        grid.bins[k] = Complex64::new(map_bpsk(bits[i]), 0.0);
    }
    Ok(grid)
}

/// OFDM modulator/demodulator sharing one FFT plan.
#[derive(Debug, Clone)]
pub struct OfdmModem {
    fft: Fft,
    cp_len: usize,
}

impl OfdmModem {
    pub fn new(fft_size: usize, cp_len: usize) -> Result<Self> {
        let fft = Fft::new(fft_size)?;
        if cp_len >= fft_size {
            return Err(invalid(format!("cp length {cp_len} must be below fft size {fft_size}")));
        }
        Ok(Self { fft, cp_len })
    }

    pub fn fft_size(&self) -> usize {
        self.fft.size()
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub(crate) fn fft(&self) -> &Fft {
        &self.fft
    }

    /// Unitary inverse FFT of the grid, prefixed by its last `cp_len` samples.
    pub fn modulate(&self, grid: &FreqGrid) -> Result<TimeSymbol> {
        let n = self.fft.size();
        if grid.bins.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: grid.bins.len() });
        }
        let mut body = grid.bins.clone();
        self.fft.inverse(&mut body);
        let mut samples = Vec::with_capacity(n + self.cp_len);
        samples.extend_from_slice(&body[n - self.cp_len..]);
        samples.extend_from_slice(&body);
        Ok(TimeSymbol { samples, cp_len: self.cp_len })
    }
}

/// One-shot modulation; see [`OfdmModem::modulate`].
pub fn ofdm_modulate(grid: &FreqGrid, cp_len: usize) -> Result<TimeSymbol> {
    OfdmModem::new(grid.bins.len(), cp_len)?.modulate(grid)
}
