//! Window construction and spectral measurement.
//!
//! Windows are real and peak-normalized. The detection pipeline works with
//! unit-energy copies (see [`unit_energy`]); only threshold scale depends on
//! the normalization.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{outer_product, RealTensor};

/// Zero-padding factor for every spectral measurement.
pub const OVERSAMPLE: usize = 32;

/// Magnitude level of the 6.0 dB point.
const SIX_DB: f64 = 0.501_187_233_627_272_2;

/// Real symmetric taper with its measured 6 dB main-lobe width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub coeffs: Vec<f64>,
    /// Sidelobe attenuation in dB.
    pub attenuation_db: f64,
    /// 6.0 dB main-lobe width in DFT bins.
    pub eta_m: f64,
}

impl WindowSpec {
    /// Wraps arbitrary coefficients; attenuation is measured.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::param("n", "window needs at least 2 samples"));
        }
        let peak = coeffs.iter().fold(0.0_f64, |m, &c| m.max(c.abs()));
        if peak == 0.0 || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coeffs", "must be finite and not all zero"));
        }
        let coeffs: Vec<f64> = coeffs.iter().map(|c| c / peak).collect();
        let attenuation_db = -max_sidelobe_db(&coeffs, OVERSAMPLE);
        let eta_m = measure_6db_bandwidth(&coeffs);
        Ok(Self {
            coeffs,
            attenuation_db,
            eta_m,
        })
    }

    pub fn rectangular(n: usize) -> Result<Self> {
        Self::from_coeffs(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn unit_energy(&self) -> Vec<f64> {
        unit_energy(&self.coeffs)
    }
}

/// Dolph-Chebyshev window of length `n` with equiripple sidelobes
/// `attenuation_db` below the main lobe.
pub fn dolph_chebyshev(n: usize, attenuation_db: f64) -> Result<WindowSpec> {
    if n < 8 {
        return Err(Error::param("n", format!("{n} < 8")));
    }
    if !(attenuation_db >= 20.0) || !attenuation_db.is_finite() {
        return Err(Error::param("attenuation_db", format!("{attenuation_db} < 20")));
    }
    let coeffs = chebyshev_coeffs(n, attenuation_db);
    let eta_m = measure_6db_bandwidth(&coeffs);
    Ok(WindowSpec {
        coeffs,
        attenuation_db,
        eta_m,
    })
}

/// Chebyshev polynomial `T_order(x)` for any real `x`.
pub fn chebyshev_poly(order: f64, x: f64) -> f64 {
    if x > 1.0 {
        (order * x.acosh()).cosh()
    } else if x < -1.0 {
        let sign = if order.rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
        sign * (order * (-x).acosh()).cosh()
    } else {
        (order * x.acos()).cos()
    }
}

fn chebyshev_coeffs(n: usize, attenuation_db: f64) -> Vec<f64> {
    let order = (n - 1) as f64;
    let beta = ((10f64.powf(attenuation_db / 20.0)).acosh() / order).cosh();
    let mut p: Vec<Complex64> = (0..n)
        .map(|k| {
            let x = beta * (PI * k as f64 / n as f64).cos();
            Complex64::new(chebyshev_poly(order, x), 0.0)
        })
        .collect();
    let odd = n % 2 == 1;
    if !odd {
        for (k, v) in p.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, PI * k as f64 / n as f64);
        }
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut p);
    let w: Vec<f64> = p.iter().map(|c| c.re).collect();
    let mut out = Vec::with_capacity(n);
    if odd {
        let h = n.div_ceil(2);
        out.extend(w[1..h].iter().rev());
        out.extend(&w[..h]);
    } else {
        let h = n / 2 + 1;
        out.extend(w[1..h].iter().rev());
        out.extend(&w[1..h]);
    }
    let peak = out.iter().fold(f64::MIN, |m, &v| m.max(v));
    out.iter().map(|v| v / peak).collect()
}

/// Copy of `coeffs` scaled to unit Euclidean norm.
pub fn unit_energy(coeffs: &[f64]) -> Vec<f64> {
    let e = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    coeffs.iter().map(|c| c / e).collect()
}

/// Magnitude of the `oversample`-times zero-padded DFT of `coeffs`.
pub fn spectrum_magnitude(coeffs: &[f64], oversample: usize) -> Vec<f64> {
    let m = coeffs.len() * oversample.max(1);
    let mut buf = vec![Complex64::default(); m];
    for (b, &c) in buf.iter_mut().zip(coeffs) {
        b.re = c;
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf.iter().map(|c| c.norm()).collect()
}

/// `|Σ_t w_t e^{-jωt}|` evaluated directly.
pub fn response_at(coeffs: &[f64], omega: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(t, &c)| Complex64::from_polar(c, -(omega * t as f64).rem_euclid(TAU)))
        .sum::<Complex64>()
        .norm()
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::MIN), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}

/// Width in bins of the region around the main-lobe peak whose magnitude
/// stays above peak - 6.0 dB, measured on a 32x zero-padded spectrum with
/// linear interpolation at the crossings.
pub fn measure_6db_bandwidth(coeffs: &[f64]) -> f64 {
    let mag = spectrum_magnitude(coeffs, OVERSAMPLE);
    let m = mag.len();
    let pk = argmax(&mag);
    let level = mag[pk] * SIX_DB;
    let crossing = |dir: isize| -> f64 {
        let at = |k: usize| mag[(pk as isize + dir * k as isize).rem_euclid(m as isize) as usize];
        for k in 1..m {
            let (a, b) = (at(k - 1), at(k));
            if b < level {
                return (k - 1) as f64 + (a - level) / (a - b);
            }
        }
        m as f64
    };
    (crossing(1) + crossing(-1)) / OVERSAMPLE as f64
}

/// Highest sidelobe relative to the main-lobe peak, in dB (negative).
pub fn max_sidelobe_db(coeffs: &[f64], oversample: usize) -> f64 {
    let mag = spectrum_magnitude(coeffs, oversample);
    let m = mag.len() as isize;
    let pk = argmax(&mag) as isize;
    let at = |k: isize| mag[(pk + k).rem_euclid(m) as usize];
    let null = |dir: isize| -> isize {
        let mut k = 1;
        while k < m && at(dir * k) <= at(dir * (k - 1)) {
            k += 1;
        }
        k - 1
    };
    let (right, left) = (null(1), null(-1));
    let mut side = 0.0_f64;
    for k in right..(m - left) {
        side = side.max(at(k));
    }
    20.0 * (side / at(0)).log10()
}

/// Length-`n` taper whose response approximates a boxcar covering one
/// bucket of width 2π/b plus a guard bin on each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatWindowSpec {
    /// Real, symmetric, peak-normalized taper centered on DC.
    pub coeffs: Vec<f64>,
    pub b: usize,
    pub attenuation_db: f64,
    /// Passband width of the boxcar in bins.
    pub passband_bins: usize,
    /// Peak-to-trough ripple over |ω| < π/b, measured.
    pub passband_ripple_db: f64,
    /// Bins from the passband edge until the response stays below
    /// `-attenuation_db + 1` dB, measured.
    pub transition_bins: f64,
}

impl FlatWindowSpec {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Bins per bucket.
    pub fn l(&self) -> usize {
        self.coeffs.len() / self.b
    }

    /// The taper modulated so its passband covers bucket offsets `[0, L)`,
    /// matching floor-based bucket mapping.
    pub fn bucket_aligned(&self) -> Vec<Complex64> {
        let n = self.coeffs.len() as f64;
        let shift = (self.l() as f64 - 1.0) / 2.0;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(t, &c)| Complex64::from_polar(c, -(TAU * shift * t as f64 / n).rem_euclid(TAU)))
            .collect()
    }
}

/// Flat window: Dolph-Chebyshev prototype times a Dirichlet kernel, i.e.
/// the prototype spectrum circularly convolved with a boxcar of `L + 2`
/// bins (`L = n/b`; a single bin when `b = n`).
pub fn flat_window(n: usize, b: usize, attenuation_db: f64) -> Result<FlatWindowSpec> {
    if !n.is_power_of_two() || !b.is_power_of_two() {
        return Err(Error::param("b", format!("n = {n} and b = {b} must be powers of two")));
    }
    if b > n {
        return Err(Error::param("b", format!("{b} > n = {n}")));
    }
    let proto = dolph_chebyshev(n, attenuation_db)?;
    let l = n / b;
    let width = if l > 1 { l + 2 } else { 1 };
    let c = (n as f64 - 1.0) / 2.0;
    let mut coeffs: Vec<f64> = proto
        .coeffs
        .iter()
        .enumerate()
        .map(|(t, &p)| {
            let x = t as f64 - c;
            let den = (PI * x / n as f64).sin();
            let d = if den.abs() < 1e-300 {
                width as f64
            } else {
                (PI * width as f64 * x / n as f64).sin() / den
            };
            p * d
        })
        .collect();
    let peak = coeffs.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    coeffs.iter_mut().for_each(|v| *v /= peak);

    let mag = spectrum_magnitude(&coeffs, OVERSAMPLE);
    let m = mag.len();
    let dc = mag[0];
    let db = |k: usize| 20.0 * (mag[k % m] / dc).log10();
    let half = (OVERSAMPLE * l) / 2;
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for k in 0..half {
        for v in [db(k), db(m - k)] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let edge = OVERSAMPLE * width / 2;
    let stop = (0..=m / 2)
        .rev()
        .find(|&k| db(k) > -attenuation_db + 1.0 || db(m - k) > -attenuation_db + 1.0)
        .unwrap_or(0);
    let transition_bins = (stop.saturating_sub(edge)) as f64 / OVERSAMPLE as f64;
    Ok(FlatWindowSpec {
        coeffs,
        b,
        attenuation_db,
        passband_bins: width,
        passband_ripple_db: hi - lo,
        transition_bins,
    })
}

/// Outer product of per-axis windows.
pub fn compound_window(per_axis: &[&[f64]]) -> Result<RealTensor> {
    outer_product(per_axis)
}
