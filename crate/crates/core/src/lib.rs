//! Link-level simulation of OFDM with subcarrier power modulation (OFDM-SPM).
//!
//! Each data subcarrier carries two bits: one BPSK bit in its sign and one
//! extra bit in its power level (low `L` or high `H`). The crate provides the
//! transmit and receive chains, Rayleigh channel emulation, closed-form BER
//! expressions, a power-level grid search and a reproducible sweep harness.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod fft;
pub mod harness;
pub mod levels;
pub mod optimize;
pub mod rx;
pub mod tx;

pub use error::{Error, Result};
pub use num_complex::Complex64;
