//! Iterative radix-2 FFT with unitary (1/√N) scaling in both directions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};

pub const MAX_FFT_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_k = N^{-1/2} Σ x_n e^{-j2πkn/N}`
    Forward,
    /// `x_n = N^{-1/2} Σ X_k e^{+j2πkn/N}`
    Inverse,
}

/// Precomputed plan for one transform size.
#[derive(Debug, Clone)]
pub struct Fft {
    size: usize,
    // e^{-j2πk/N} for k < N/2
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
    scale: f64,
}

impl Fft {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || !size.is_power_of_two() || size > MAX_FFT_SIZE {
            return Err(invalid(format!(
                "fft size must be a power of two in [1, {MAX_FFT_SIZE}], got {size}"
            )));
        }
        let bits = size.trailing_zeros();
        let bitrev = (0..size)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..size / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / size as f64))
            .collect();
        Ok(Self { size, twiddles, bitrev, scale: 1.0 / (size as f64).sqrt() })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Transforms `data` in place. Panics if the length differs from the plan.
    pub fn process(&self, data: &mut [Complex64], direction: Direction) {
        assert_eq!(data.len(), self.size, "buffer length does not match fft plan");
        let n = self.size;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if direction == Direction::Inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
        for x in data.iter_mut() {
            *x *= self.scale;
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.process(data, Direction::Forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.process(data, Direction::Inverse);
    }
}
