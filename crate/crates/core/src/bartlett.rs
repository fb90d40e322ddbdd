//! Averaged windowed periodogram with a per-bin threshold.
//!
//! `l_k = (1/T) Σ_s |DFT(w ∘ r_s)[k]|²`. Under noise only each periodogram
//! bin is `σ_n² β′ · Exp(1)`, so `l_k` is a scaled Gamma(T, 1/T); the
//! threshold and ROC here use its normal approximation.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::nearest_bin;
use crate::special::{q, q_inv};
use crate::tensor::{unflatten, ComplexCube, NdFft, RealTensor, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BartlettStats {
    /// Signal gain `|d_k^H W v(ω)|²` at the bin nearest ω.
    pub alpha_prime: f64,
    /// Noise gain `‖w‖²`.
    pub beta_prime: f64,
    pub t: usize,
}

impl BartlettStats {
    /// Gains of a 1-D window for a sinusoid at `omega`.
    pub fn for_window(omega: f64, window: &[f64], t: usize) -> Self {
        let n = window.len();
        let k = nearest_bin(omega, n);
        let g: Complex64 = window
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let ph = (omega * i as f64 - TAU * (k * i) as f64 / n as f64).rem_euclid(TAU);
                Complex64::from_polar(w, ph)
            })
            .sum();
        Self {
            alpha_prime: g.norm_sqr(),
            beta_prime: window.iter().map(|w| w * w).sum(),
            t,
        }
    }

    /// Gains of a separable N-D window: per-axis gains multiply.
    pub fn product(parts: &[BartlettStats], t: usize) -> Self {
        Self {
            alpha_prime: parts.iter().map(|p| p.alpha_prime).product(),
            beta_prime: parts.iter().map(|p| p.beta_prime).product(),
            t,
        }
    }
}

/// Threshold on `l_k` giving per-bin false-alarm rate `pfa` under the
/// normal approximation: `σ_n² β′ (1 + Q⁻¹(pfa)/√T)`.
pub fn bartlett_threshold(noise_var: f64, stats: &BartlettStats, pfa: f64) -> f64 {
    noise_var * stats.beta_prime * (1.0 + q_inv(pfa) / (stats.t as f64).sqrt())
}

/// `P_d = 1 - Φ((β′ Φ⁻¹(1-P_fa) + √T (β′ - SNR α′)) / (SNR α′))`.
pub fn bartlett_roc(snr: f64, stats: &BartlettStats, pfa: f64) -> f64 {
    let (a, b) = (stats.alpha_prime, stats.beta_prime);
    let st = (stats.t as f64).sqrt();
    q((b * q_inv(pfa) + st * (b - snr * a)) / (snr * a))
}

/// Smallest SNR reaching `pd` at `pfa`, inverting [`bartlett_roc`].
pub fn bartlett_snr_min(pd: f64, pfa: f64, stats: &BartlettStats) -> f64 {
    let st = (stats.t as f64).sqrt();
    stats.beta_prime * (q_inv(pfa) + st) / (stats.alpha_prime * (q_inv(pd) + st))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BartlettOutput {
    /// `l_k` over the full grid.
    pub spectrum: RealTensor,
    pub threshold: f64,
    /// Grid indices with `l_k > threshold`, lexicographic.
    pub detections: Vec<Vec<usize>>,
}

fn periodogram(seg: &ComplexCube, window: &RealTensor, fft: &NdFft) -> Result<Vec<f64>> {
    if seg.shape() != window.shape() {
        return Err(Error::ShapeMismatch {
            expected: window.shape().to_vec(),
            actual: seg.shape().to_vec(),
        });
    }
    let mut buf: Vec<Complex64> = seg.data().iter().zip(window.data()).map(|(x, w)| x * w).collect();
    fft.process(&mut buf)?;
    Ok(buf.iter().map(|v| v.norm_sqr()).collect())
}

fn finish(sum: Vec<f64>, t: usize, shape: &[usize], threshold: f64) -> Result<BartlettOutput> {
    let spectrum: Vec<f64> = sum.into_iter().map(|v| v / t as f64).collect();
    let detections = spectrum
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > threshold)
        .map(|(i, _)| unflatten(shape, i))
        .collect();
    Ok(BartlettOutput {
        spectrum: Tensor::new(shape, spectrum)?,
        threshold,
        detections,
    })
}

/// Averaged periodogram of `segments` and its threshold crossings.
pub fn bartlett_run<I>(segments: I, window: &RealTensor, threshold: f64) -> Result<BartlettOutput>
where
    I: IntoIterator<Item = ComplexCube>,
{
    let fft = NdFft::forward(window.shape())?;
    let mut sum = vec![0.0; window.len()];
    let mut t = 0;
    for seg in segments {
        for (s, p) in sum.iter_mut().zip(periodogram(&seg, window, &fft)?) {
            *s += p;
        }
        t += 1;
    }
    if t == 0 {
        return Err(Error::param("segments", "at least one segment required"));
    }
    finish(sum, t, window.shape(), threshold)
}

/// Like [`bartlett_run`], generating the `t` segments on demand in
/// parallel.
pub fn bartlett_run_generated<G>(t: usize, gen: G, window: &RealTensor, threshold: f64) -> Result<BartlettOutput>
where
    G: Fn(usize) -> Result<ComplexCube> + Sync,
{
    if t == 0 {
        return Err(Error::param("t", "at least one segment required"));
    }
    let fft = NdFft::forward(window.shape())?;
    let len = window.len();
    let sum = (0..t)
        .into_par_iter()
        .map(|s| periodogram(&gen(s)?, window, &fft))
        .try_reduce(
            || vec![0.0; len],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    finish(sum, t, window.shape(), threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::{dolph_chebyshev, unit_energy};

    #[test]
    fn zero_input_gives_zero_spectrum() {
        let w = RealTensor::from_vec(vec![1.0; 16]);
        let out = bartlett_run(vec![ComplexCube::zeros(&[16]).unwrap(); 3], &w, 1e-12).unwrap();
        assert!(out.spectrum.data().iter().all(|&v| v == 0.0));
        assert!(out.detections.is_empty());
    }

    #[test]
    fn on_grid_gain_of_rectangular_window() {
        let s = BartlettStats::for_window(TAU * 3.0 / 16.0, &[1.0; 16], 10);
        assert!((s.alpha_prime - 256.0).abs() < 1e-9);
        assert_eq!(s.beta_prime, 16.0);
    }

    #[test]
    fn roc_limits_and_inverse() {
        let w = unit_energy(&dolph_chebyshev(1024, 40.0).unwrap().coeffs);
        let s = BartlettStats::for_window(TAU * 64.0 / 1024.0, &w, 50);
        assert!(bartlett_roc(1e6, &s, 1e-6) > 1.0 - 1e-12);
        let snr = bartlett_snr_min(0.9, 1e-6, &s);
        assert!((bartlett_roc(snr, &s, 1e-6) - 0.9).abs() < 1e-9);
        let mut last = 0.0;
        for db in [-30.0, -28.0, -26.0, -24.0] {
            let pd = bartlett_roc(10f64.powf(db / 10.0), &s, 1e-6);
            assert!(pd > last);
            last = pd;
        }
        assert!(bartlett_roc(snr, &s, 1e-5) > 0.9);
    }

    #[test]
    fn generated_matches_sequential() {
        let n = 32;
        let w = RealTensor::from_vec(unit_energy(&dolph_chebyshev(n, 40.0).unwrap().coeffs));
        let segs: Vec<ComplexCube> = (0..5)
            .map(|s| ComplexCube::from_vec((0..n).map(|i| Complex64::new((i * s) as f64, 1.0)).collect()))
            .collect();
        let a = bartlett_run(segs.clone(), &w, 10.0).unwrap();
        let b = bartlett_run_generated(5, |s| Ok(segs[s].clone()), &w, 10.0).unwrap();
        for (x, y) in a.spectrum.data().iter().zip(b.spectrum.data()) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn shape_mismatch() {
        let w = RealTensor::from_vec(vec![1.0; 8]);
        assert!(bartlett_run(vec![ComplexCube::zeros(&[4]).unwrap()], &w, 1.0).is_err());
    }
}
