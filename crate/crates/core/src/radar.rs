//! LFMCW array radar: de-chirped data cubes and their processing.
//!
//! A burst is an `R × N × M` cube (fast time × array element × repetition
//! interval). A target at range `r`, radial velocity `v` and direction `θ`
//! contributes a 3-D complex exponential with
//!
//! ```text
//!   fast time     f_r + f_d,   f_r = 2ρr/c,  f_d = 2v/λ      (Hz, sampled at f_s)
//!   element       π sin θ                                   (rad / element)
//!   slow time     2π f_d T_p                                (rad / interval)
//! ```
//!
//! Amplitudes are complex Gaussian, fixed within a burst and independent
//! across bursts; noise is unit-variance complex Gaussian.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bartlett::{bartlett_run_generated, bartlett_threshold, BartlettOutput, BartlettStats};
use crate::error::{Error, Result};
use crate::optimizer::{average_alpha_beta, optimize, AveragingMode, DesignParams, EtaP, OperatingPoint, StageOneStats};
use crate::pipeline::{AxisPlan, DetectionReport, Rsft, RsftConfig};
use crate::rng;
use crate::signal::complex_gaussian;
use crate::tensor::{outer_product, ComplexCube, RealTensor};
use crate::window::{dolph_chebyshev, unit_energy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarParams {
    /// Fast-time samples per repetition interval.
    pub r_bins: usize,
    /// Array elements.
    pub n_elems: usize,
    /// Repetition intervals per burst.
    pub m_ri: usize,
    /// Wavelength, m.
    pub lambda: f64,
    /// Propagation speed, m/s.
    pub c: f64,
    /// Sweep bandwidth, Hz.
    pub bandwidth: f64,
    /// Repetition interval, s.
    pub t_p: f64,
    /// Maximum range, m.
    pub r_max: f64,
    /// Chirp rate, Hz/s.
    pub chirp_rate: f64,
    /// Fast-time sampling rate, Hz.
    pub f_s: f64,
}

impl RadarParams {
    /// Full-scale short-range system.
    pub fn full_scale() -> Self {
        Self {
            r_bins: 2048,
            n_elems: 64,
            m_ri: 32,
            lambda: 0.03,
            c: 3e8,
            bandwidth: 150e6,
            t_p: 5e-5,
            r_max: 1500.0,
            chirp_rate: 3e12,
            f_s: 41e6,
        }
    }

    /// Same waveform with a smaller cube.
    pub fn desk_scale() -> Self {
        Self {
            r_bins: 256,
            n_elems: 16,
            m_ri: 8,
            ..Self::full_scale()
        }
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.r_bins, self.n_elems, self.m_ri]
    }

    pub fn validate(&self) -> Result<()> {
        for (field, n) in [("r_bins", self.r_bins), ("n_elems", self.n_elems), ("m_ri", self.m_ri)] {
            if !n.is_power_of_two() || n < 2 {
                return Err(Error::param(field, format!("{n} is not a power of two >= 2")));
            }
        }
        for (field, v) in [
            ("lambda", self.lambda),
            ("c", self.c),
            ("bandwidth", self.bandwidth),
            ("t_p", self.t_p),
            ("r_max", self.r_max),
            ("chirp_rate", self.chirp_rate),
            ("f_s", self.f_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(field, "must be positive"));
            }
        }
        let rate = self.bandwidth / self.t_p;
        if ((self.chirp_rate - rate) / rate).abs() > 1e-6 {
            return Err(Error::param("chirp_rate", format!("{} != bandwidth / t_p = {rate}", self.chirp_rate)));
        }
        if 2.0 * self.chirp_rate * self.r_max / self.c >= self.f_s {
            return Err(Error::param("f_s", "maximum-range beat frequency is not below f_s"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub doa_deg: f64,
    /// Per-sample SNR against unit noise.
    pub snr_db: f64,
}

impl Target {
    pub fn validate(&self, p: &RadarParams) -> Result<()> {
        if !(self.range_m >= 0.0 && self.range_m < p.r_max) {
            return Err(Error::param("range_m", format!("{} outside [0, {})", self.range_m, p.r_max)));
        }
        if !(self.velocity_mps.abs() <= 300.0) {
            return Err(Error::param("velocity_mps", format!("|{}| > 300", self.velocity_mps)));
        }
        if !(self.doa_deg > -90.0 && self.doa_deg < 90.0) {
            return Err(Error::param("doa_deg", format!("{} outside (-90, 90)", self.doa_deg)));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::param("snr_db", "must be finite"));
        }
        Ok(())
    }
}

/// The four-target scene: equal SNR (-10 dB each) or mixed (0/-10/-20/-20 dB).
pub fn reference_targets(equal_snr: bool) -> Vec<Target> {
    let snr = if equal_snr { [-10.0; 4] } else { [0.0, -10.0, -20.0, -20.0] };
    let geom = [(1000.0, 100.0, 30.0), (500.0, 50.0, 0.0), (350.0, 240.0, -16.0), (350.0, 240.0, -20.0)];
    geom.iter()
        .zip(snr)
        .map(|(&(range_m, velocity_mps, doa_deg), snr_db)| Target {
            range_m,
            velocity_mps,
            doa_deg,
            snr_db,
        })
        .collect()
}

/// `(f_r, f_d, spatial)`: range beat (Hz), Doppler (Hz), element phase step (rad).
pub fn target_to_freqs(t: &Target, p: &RadarParams) -> (f64, f64, f64) {
    let f_r = 2.0 * p.chirp_rate * t.range_m / p.c;
    let f_d = 2.0 * t.velocity_mps / p.lambda;
    (f_r, f_d, PI * t.doa_deg.to_radians().sin())
}

/// Per-axis phase increments (rad / sample) of a target.
pub fn target_omegas(t: &Target, p: &RadarParams) -> [f64; 3] {
    let (f_r, f_d, sp) = target_to_freqs(t, p);
    [
        (TAU * (f_r + f_d) / p.f_s).rem_euclid(TAU),
        sp.rem_euclid(TAU),
        (TAU * f_d * p.t_p).rem_euclid(TAU),
    ]
}

/// Fractional (range, angle, Doppler) bin of a target.
pub fn expected_bins(t: &Target, p: &RadarParams) -> [f64; 3] {
    let om = target_omegas(t, p);
    let shape = p.shape();
    [0, 1, 2].map(|a| om[a] * shape[a] as f64 / TAU)
}

/// Targets plus noise; produces bursts on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub params: RadarParams,
    pub targets: Vec<Target>,
    pub noise_var: f64,
    pub seed: u64,
}

impl Scene {
    pub fn new(params: RadarParams, targets: Vec<Target>, seed: u64) -> Result<Self> {
        let s = Self {
            params,
            targets,
            noise_var: 1.0,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.noise_var >= 0.0) {
            return Err(Error::param("noise_var", "must be non-negative"));
        }
        for (i, t) in self.targets.iter().enumerate() {
            t.validate(&self.params)?;
            let (f_r, f_d, _) = target_to_freqs(t, &self.params);
            let beat = f_r + f_d;
            if !(0.0..self.params.f_s).contains(&beat) {
                return Err(Error::Ambiguous {
                    index: i,
                    reason: format!("beat frequency {beat} Hz outside [0, f_s)"),
                });
            }
        }
        Ok(())
    }

    /// De-chirped cube of burst `burst`.
    pub fn burst(&self, burst: usize) -> Result<ComplexCube> {
        dechirped_cube(self, burst)
    }
}

/// `x[u,i,v] = Σ_k a_k e^{j(ω_r u + ω_a i + ω_d v)} + noise`.
pub fn dechirped_cube(scene: &Scene, burst: usize) -> Result<ComplexCube> {
    scene.validate()?;
    let p = &scene.params;
    let [r, n, m] = p.shape();
    let mut rng = rng::stream(scene.seed, rng::DOMAIN_RADAR, burst as u64);
    let amps: Vec<Complex64> = scene
        .targets
        .iter()
        .map(|t| complex_gaussian(&mut rng, 10f64.powf(t.snr_db / 10.0)))
        .collect();
    let mut data = vec![Complex64::default(); r * n * m];
    if scene.noise_var > 0.0 {
        // Noise comes from per-row sub-streams so rows fill in parallel.
        let base = scene.seed ^ (burst as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        data.par_chunks_mut(n * m).enumerate().for_each(|(u, row)| {
            let mut g = rng::stream(base, rng::DOMAIN_RADAR ^ 1, u as u64);
            for x in row.iter_mut() {
                *x = complex_gaussian(&mut g, scene.noise_var);
            }
        });
    }
    for (t, a) in scene.targets.iter().zip(&amps) {
        let om = target_omegas(t, p);
        let tone = |w: f64, len: usize| -> Vec<Complex64> {
            (0..len).map(|k| Complex64::from_polar(1.0, (w * k as f64).rem_euclid(TAU))).collect()
        };
        let (eu, ei, ev) = (tone(om[0], r), tone(om[1], n), tone(om[2], m));
        let eiv: Vec<Complex64> = ei.iter().flat_map(|x| ev.iter().map(move |y| x * y)).collect();
        data.par_chunks_mut(n * m).zip(eu.par_iter()).for_each(|(row, &u)| {
            let au = a * u;
            for (x, e) in row.iter_mut().zip(&eiv) {
                *x += au * e;
            }
        });
    }
    ComplexCube::new(&[r, n, m], data)
}

/// Thresholds and windows for the sparse path.
#[derive(Debug, Clone)]
pub struct RsftDesign {
    pub config: RsftConfig,
    pub operating_point: OperatingPoint,
    pub stats: StageOneStats,
    /// Product of the per-axis 6 dB widths.
    pub eta_m: f64,
}

/// Design options for [`design_rsft`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsftDesignSpec {
    pub reduced: [usize; 3],
    pub t: usize,
    pub k: usize,
    pub pd: f64,
    pub pfa: f64,
    pub eta_p: EtaP,
    pub pre_db: f64,
    pub flat_db: f64,
    pub seed: u64,
}

/// Optimizer thresholds for the 3-D pipeline at the worst-case (mid-bin)
/// frequency on every axis.
pub fn design_rsft(p: &RadarParams, d: &RsftDesignSpec) -> Result<RsftDesign> {
    p.validate()?;
    let shape = p.shape();
    let mut parts = Vec::with_capacity(3);
    let mut eta_m = 1.0;
    for (&n, &b) in shape.iter().zip(&d.reduced) {
        let plan = AxisPlan::chebyshev(n, b, d.pre_db, d.flat_db)?;
        let omega = TAU * 0.5 / n as f64;
        parts.push(average_alpha_beta(omega, &plan, AveragingMode::Exhaustive)?);
        eta_m *= dolph_chebyshev(n, d.pre_db)?.eta_m;
    }
    let stats = StageOneStats::product(&parts);
    let params = DesignParams {
        pd: d.pd,
        pfa: d.pfa,
        t: d.t,
        k: d.k,
        eta_m,
        eta_p: d.eta_p,
        b: d.reduced.iter().product(),
        noise_var: 1.0,
    };
    let op = optimize(&params, &stats)?;
    let config = RsftConfig::chebyshev(&shape, &d.reduced, d.t, op.gamma, op.mu, d.pre_db, d.flat_db, d.seed)?;
    Ok(RsftDesign {
        config,
        operating_point: op,
        stats,
        eta_m,
    })
}

/// Sparse-pipeline processing of `cfg.t` bursts.
pub fn process_rsft(scene: &Scene, cfg: RsftConfig) -> Result<DetectionReport> {
    let rs = Rsft::new(cfg)?;
    rs.run_generated(|b| scene.burst(b))
}

/// Peak-counting comparison: `top_first` cells per burst, `top_final`
/// most frequent indices reported.
pub fn process_sft_peak_counting(scene: &Scene, cfg: RsftConfig, top_first: usize, top_final: usize) -> Result<DetectionReport> {
    let rs = Rsft::new(cfg)?;
    rs.run_peak_counting(|b| scene.burst(b), top_first, top_final)
}

/// Unit-energy compound Chebyshev window over the cube.
pub fn cube_window(p: &RadarParams, attenuation_db: f64) -> Result<RealTensor> {
    let ws: Vec<Vec<f64>> = p
        .shape()
        .iter()
        .map(|&n| dolph_chebyshev(n, attenuation_db).map(|w| unit_energy(&w.coeffs)))
        .collect::<Result<_>>()?;
    outer_product(&[&ws[0], &ws[1], &ws[2]])
}

/// Periodogram gains of the compound window at the worst-case (mid-bin)
/// frequency.
pub fn cube_bartlett_stats(p: &RadarParams, attenuation_db: f64, t: usize) -> Result<BartlettStats> {
    let parts = p
        .shape()
        .iter()
        .map(|&n| {
            let w = unit_energy(&dolph_chebyshev(n, attenuation_db)?.coeffs);
            Ok(BartlettStats::for_window(TAU * 0.5 / n as f64, &w, t))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BartlettStats::product(&parts, t))
}

/// Averaged 3-D periodogram over `t` bursts, thresholded for per-cell
/// false-alarm rate `pfa`.
pub fn process_conventional(scene: &Scene, t: usize, attenuation_db: f64, pfa: f64) -> Result<BartlettOutput> {
    let window = cube_window(&scene.params, attenuation_db)?;
    let stats = cube_bartlett_stats(&scene.params, attenuation_db, t)?;
    let threshold = bartlett_threshold(scene.noise_var.max(f64::MIN_POSITIVE), &stats, pfa);
    bartlett_run_generated(t, |b| scene.burst(b), &window, threshold)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Score {
    pub hits: Vec<bool>,
    pub false_count: usize,
}

impl Score {
    pub fn all_hit(&self) -> bool {
        self.hits.iter().all(|&h| h)
    }
}

fn circular_distance(a: f64, b: f64, n: usize) -> f64 {
    let d = (a - b).rem_euclid(n as f64);
    d.min(n as f64 - d)
}

/// A target is hit when some detection is within one bin of its fractional
/// position on every axis. Detections farther than `eta_m[a]` bins on some
/// axis from every target are false.
pub fn score_reconstruction(detections: &[Vec<usize>], targets: &[Target], p: &RadarParams, eta_m: [f64; 3]) -> Score {
    let shape = p.shape();
    let truth: Vec<[f64; 3]> = targets.iter().map(|t| expected_bins(t, p)).collect();
    let within = |d: &[usize], tb: &[f64; 3], tol: [f64; 3]| {
        (0..3).all(|a| circular_distance(d[a] as f64, tb[a], shape[a]) <= tol[a])
    };
    let hits = truth
        .iter()
        .map(|tb| detections.iter().any(|d| within(d, tb, [1.0; 3])))
        .collect();
    let false_count = detections
        .iter()
        .filter(|d| !truth.iter().any(|tb| within(d, tb, eta_m)))
        .count();
    Score { hits, false_count }
}
