//! Segment-wise multi-sinusoid signal with per-segment random amplitudes.
//!
//! Segment `s` is `r_s = Σ_i b_{i,s} v(ω_i) + n_s`, where `b_{i,s}` and the
//! entries of `n_s` are circularly symmetric complex Gaussian. Each segment
//! draws from its own generator stream, so segments can be produced in any
//! order.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidSpec {
    /// Radians per sample in [0, 2π).
    pub omega: f64,
    /// Per-segment complex amplitude variance.
    pub amp_var: f64,
}

impl SinusoidSpec {
    /// Sinusoid at fractional DFT bin `bin` of an `n`-point grid.
    pub fn at_bin(bin: f64, n: usize, amp_var: f64) -> Self {
        Self {
            omega: (bin * TAU / n as f64).rem_euclid(TAU),
            amp_var,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    pub n: usize,
    pub t: usize,
    pub noise_var: f64,
    #[serde(default)]
    pub sinusoids: Vec<SinusoidSpec>,
    #[serde(default)]
    pub seed: u64,
}

/// Two neighboring sinusoids closer than the window's main lobe.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvabilityWarning {
    pub first: usize,
    pub second: usize,
    pub spacing_bins: f64,
    pub required_bins: f64,
}

impl SignalConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() {
            return Err(Error::param("n", format!("{} is not a power of two", self.n)));
        }
        if self.t == 0 {
            return Err(Error::param("t", "at least one segment required"));
        }
        if !(self.noise_var >= 0.0) || !self.noise_var.is_finite() {
            return Err(Error::param("noise_var", "must be finite and non-negative"));
        }
        if self.sinusoids.is_empty() && self.noise_var == 0.0 {
            return Err(Error::param("noise_var", "must be positive when there are no sinusoids"));
        }
        if self.sinusoids.len() >= self.n {
            return Err(Error::param("sinusoids", format!("K = {} must be below n = {}", self.sinusoids.len(), self.n)));
        }
        for s in &self.sinusoids {
            if !(0.0..TAU).contains(&s.omega) {
                return Err(Error::param("sinusoids.omega", format!("{} outside [0, 2π)", s.omega)));
            }
            if !(s.amp_var >= 0.0) || !s.amp_var.is_finite() {
                return Err(Error::param("sinusoids.amp_var", "must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Pairs of circularly neighboring sinusoids spaced less than
    /// `eta_m` bins apart.
    pub fn check_resolvability(&self, eta_m: f64) -> Vec<ResolvabilityWarning> {
        let bin = TAU / self.n as f64;
        let mut order: Vec<usize> = (0..self.sinusoids.len()).collect();
        order.sort_by(|&a, &b| self.sinusoids[a].omega.total_cmp(&self.sinusoids[b].omega));
        let mut out = Vec::new();
        if order.len() < 2 {
            return out;
        }
        for w in 0..order.len() {
            let (a, b) = (order[w], order[(w + 1) % order.len()]);
            if order.len() == 2 && w == 1 {
                break;
            }
            let gap = (self.sinusoids[b].omega - self.sinusoids[a].omega).rem_euclid(TAU);
            let gap = gap.min(TAU - gap) / bin;
            if gap < eta_m {
                out.push(ResolvabilityWarning {
                    first: a,
                    second: b,
                    spacing_bins: gap,
                    required_bins: eta_m,
                });
            }
        }
        out
    }

    /// Segment `s`, deterministic in `(seed, s)`.
    pub fn segment(&self, s: usize) -> Result<Vec<Complex64>> {
        gen_segment(self, s)
    }
}

/// `v(ω)[k] = exp(j k ω)`.
pub fn steering_vector(omega: f64, n: usize) -> Vec<Complex64> {
    let omega = omega.rem_euclid(TAU);
    (0..n)
        .map(|k| Complex64::from_polar(1.0, (k as f64 * omega).rem_euclid(TAU)))
        .collect()
}

/// Circularly symmetric complex Gaussian sample with `E|z|² = var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Generates segment `s` of `config`.
pub fn gen_segment(config: &SignalConfig, s: usize) -> Result<Vec<Complex64>> {
    config.validate()?;
    if s >= config.t {
        return Err(Error::param("s", format!("segment {s} outside [0, {})", config.t)));
    }
    let mut rng = rng::stream(config.seed, rng::DOMAIN_SIGNAL, s as u64);
    let n = config.n;
    let mut out = vec![Complex64::default(); n];
    for sin in &config.sinusoids {
        let b = complex_gaussian(&mut rng, sin.amp_var);
        for (x, v) in out.iter_mut().zip(steering_vector(sin.omega, n)) {
            *x += b * v;
        }
    }
    if config.noise_var > 0.0 {
        for x in out.iter_mut() {
            *x += complex_gaussian(&mut rng, config.noise_var);
        }
    }
    Ok(out)
}
