//! Rayleigh block-fading channel emulation and AWGN.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};

/// Tap delay line profile, normalized to unit total power.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    delays: Vec<usize>,
    powers_db: Vec<f64>,
    linear: Vec<f64>,
}

impl ChannelProfile {
    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn powers_db(&self) -> &[f64] {
        &self.powers_db
    }

    /// Linear tap powers, summing to one.
    pub fn linear_powers(&self) -> &[f64] {
        &self.linear
    }

    pub fn max_delay(&self) -> usize {
        *self.delays.last().expect("profile has at least one tap")
    }

    /// Five-tap exponentially decaying profile used in the reference setup.
    pub fn reference() -> Self {
        make_profile(&[0, 3, 5, 6, 8], &[0.0, -8.0, -17.0, -21.0, -25.0])
            .expect("reference profile is valid")
    }
}

/// Relative dB powers are converted to linear and normalized to sum to one.
pub fn make_profile(delays: &[usize], powers_db: &[f64]) -> Result<ChannelProfile> {
    if delays.len() != powers_db.len() {
        return Err(invalid(format!(
            "{} delays but {} tap powers",
            delays.len(),
            powers_db.len()
        )));
    }
    if delays.is_empty() {
        return Err(invalid("channel profile needs at least one tap"));
    }
    if delays[0] != 0 {
        return Err(invalid("first tap delay must be 0"));
    }
    if delays.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("tap delays must be strictly increasing"));
    }
    if powers_db.iter().any(|p| !p.is_finite()) {
        return Err(invalid("tap powers must be finite"));
    }
    let raw: Vec<f64> = powers_db.iter().map(|db| 10f64.powf(db / 10.0)).collect();
    let total: f64 = raw.iter().sum();
    Ok(ChannelProfile {
        delays: delays.to_vec(),
        powers_db: powers_db.to_vec(),
        linear: raw.iter().map(|p| p / total).collect(),
    })
}

/// One draw of the tap delay line and its frequency response.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Impulse response over `0..=max_delay`, zero between listed delays.
    pub taps: Vec<Complex64>,
    /// `H_k = Σ_l h_l e^{-j2πkl/N}`, the gain seen by bin `k` after unitary
    /// transforms and CP removal.
    pub freq_response: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn from_taps(taps: Vec<Complex64>, fft_size: usize) -> Self {
        let freq_response = frequency_response(&taps, fft_size);
        Self { taps, freq_response }
    }

    pub fn identity(fft_size: usize) -> Self {
        Self::from_taps(vec![Complex64::new(1.0, 0.0)], fft_size)
    }
}

fn frequency_response(taps: &[Complex64], fft_size: usize) -> Vec<Complex64> {
    (0..fft_size)
        .map(|k| {
            taps.iter()
                .enumerate()
                .filter(|(_, h)| h.norm_sqr() > 0.0)
                .map(|(l, &h)| {
                    let phase = -2.0 * PI * ((k * l) % fft_size) as f64 / fft_size as f64;
                    h * Complex64::from_polar(1.0, phase)
                })
                .sum()
        })
        .collect()
}

/// Circularly symmetric complex Gaussian with the given total variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sigma = (0.5 * variance).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * sigma, im * sigma)
}

/// Draws independent Rayleigh taps with variances from the profile.
pub fn draw_channel<R: Rng + ?Sized>(
    profile: &ChannelProfile,
    fft_size: usize,
    rng: &mut R,
) -> ChannelRealization {
    let mut taps = vec![Complex64::default(); profile.max_delay() + 1];
    for (&d, &p) in profile.delays.iter().zip(&profile.linear) {
        taps[d] = complex_gaussian(rng, p);
    }
    ChannelRealization::from_taps(taps, fft_size)
}

/// Linear convolution `y = x ⊛ h`, truncated to the input length.
///
/// Samples before the start of `x` are taken as zero; the cyclic prefix
/// absorbs them as long as it is at least as long as the channel.
pub fn apply_channel(x: &[Complex64], realization: &ChannelRealization) -> Vec<Complex64> {
    let taps = &realization.taps;
    (0..x.len())
        .map(|n| {
            taps.iter()
                .enumerate()
                .take(n + 1)
                .map(|(l, &h)| h * x[n - l])
                .sum()
        })
        .collect()
}

/// Adds i.i.d. circular complex Gaussian noise with variance `n0` per sample.
pub fn add_awgn<R: Rng + ?Sized>(y: &mut [Complex64], n0: f64, rng: &mut R) -> Result<()> {
    if !n0.is_finite() || n0 < 0.0 {
        return Err(invalid(format!("noise density must be finite and non-negative, got {n0}")));
    }
    if n0 == 0.0 {
        return Ok(());
    }
    for s in y.iter_mut() {
        *s += complex_gaussian(rng, n0);
    }
    Ok(())
}

/// `n` i.i.d. unit-variance Rayleigh gains, one per data subcarrier.
pub fn draw_flat_rayleigh<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng, 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn profile_normalization() {
        let single = make_profile(&[0], &[0.0]).unwrap();
        assert_eq!(single.linear_powers(), &[1.0]);

        let p = ChannelProfile::reference();
        let expected = [0.840_656, 0.133_236, 0.016_774, 0.006_678, 0.002_658];
        for (a, b) in p.linear_powers().iter().zip(expected) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
        assert!((p.linear_powers().iter().sum::<f64>() - 1.0).abs() < 1e-9);

        let even = make_profile(&[0, 1], &[0.0, 0.0]).unwrap();
        assert_eq!(even.linear_powers(), &[0.5, 0.5]);
    }

    #[test]
    fn profile_validation() {
        assert!(make_profile(&[0, 1], &[0.0]).is_err());
        assert!(make_profile(&[0, 3, 2], &[0.0, 0.0, 0.0]).is_err());
        assert!(make_profile(&[1, 2], &[0.0, 0.0]).is_err());
        assert!(make_profile(&[], &[]).is_err());
    }

    #[test]
    fn ensemble_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ChannelProfile::reference();
        let draws = 100_000;
        let mut total = 0.0;
        let mut per_bin = vec![0.0; 64];
        for _ in 0..draws {
            let r = draw_channel(&p, 64, &mut rng);
            total += r.taps.iter().map(|t| t.norm_sqr()).sum::<f64>();
            for (acc, h) in per_bin.iter_mut().zip(&r.freq_response) {
                *acc += h.norm_sqr();
            }
        }
        assert!((total / draws as f64 - 1.0).abs() < 0.01);
        for e in per_bin {
            assert!((e / draws as f64 - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn single_tap_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = draw_channel(&make_profile(&[0], &[0.0]).unwrap(), 64, &mut rng);
        let mag = r.freq_response[0].norm();
        assert!(r.freq_response.iter().all(|h| (h.norm() - mag).abs() < 1e-12));
    }

    #[test]
    fn convolution_cases() {
        let x: Vec<Complex64> = (1..=5).map(|v| Complex64::new(v as f64, -(v as f64))).collect();
        let identity = ChannelRealization::identity(8);
        assert_eq!(apply_channel(&x, &identity), x);

        let delay = ChannelRealization::from_taps(vec![Complex64::default(), Complex64::new(1.0, 0.0)], 8);
        let y = apply_channel(&x, &delay);
        assert_eq!(y[0], Complex64::default());
        assert_eq!(&y[1..], &x[..4]);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = draw_channel(&ChannelProfile::reference(), 64, &mut rng);
        let mut impulse = vec![Complex64::default(); 16];
        impulse[0] = Complex64::new(1.0, 0.0);
        let y = apply_channel(&impulse, &r);
        for d in [0, 3, 5, 6, 8] {
            assert_eq!(y[d], r.taps[d]);
            assert!(y[d].norm() > 0.0);
        }
        for d in [1, 2, 4, 7, 9, 10] {
            assert_eq!(y[d], Complex64::default());
        }
    }

    #[test]
    fn awgn_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut y = vec![Complex64::new(0.3, -0.2); 8];
        let orig = y.clone();
        add_awgn(&mut y, 0.0, &mut rng).unwrap();
        assert_eq!(y, orig);
        assert!(add_awgn(&mut y, -1.0, &mut rng).is_err());

        let n = 1_000_000;
        let mut z = vec![Complex64::default(); n];
        add_awgn(&mut z, 0.5, &mut rng).unwrap();
        let mean: Complex64 = z.iter().sum::<Complex64>() / n as f64;
        let var = z.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n as f64;
        assert!((var - 0.5).abs() < 0.01, "variance {var}");
        // Each component has std 0.5, so 3σ/√n = 1.5e-3.
        let bound = 3.0 * 0.5 / (n as f64).sqrt();
        assert!(mean.re.abs() < bound && mean.im.abs() < bound, "mean {mean}");
    }

    #[test]
    fn flat_rayleigh_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = draw_flat_rayleigh(1_000_000, &mut rng);
        let mean = g.iter().map(|v| v.norm_sqr()).sum::<f64>() / g.len() as f64;
        assert!((mean - 1.0).abs() < 0.005);
        let mut p: Vec<f64> = g.iter().map(|v| v.norm_sqr()).collect();
        p.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = p[p.len() / 2];
        assert!((median - std::f64::consts::LN_2).abs() < 0.01);

        let a = draw_flat_rayleigh(16, &mut ChaCha8Rng::seed_from_u64(9));
        let b = draw_flat_rayleigh(16, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
