//! Signal gain α and noise gain β of the reduced spectrum, and the
//! first-stage marking rates they imply.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::{mod_inverse, peak_bucket, random_sigma};
use crate::pipeline::AxisPlan;
use crate::rng;
use crate::signal::steering_vector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaStats {
    pub sigma: usize,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOneStats {
    pub alpha_bar: f64,
    pub beta_bar: f64,
    /// Per-dilation gains the means were taken over, when kept.
    pub per_sigma: Option<Vec<SigmaStats>>,
}

impl StageOneStats {
    pub fn new(alpha_bar: f64, beta_bar: f64) -> Result<Self> {
        if !(alpha_bar > 0.0) || !(beta_bar > 0.0) {
            return Err(Error::param("alpha_bar", "gains must be positive"));
        }
        Ok(Self {
            alpha_bar,
            beta_bar,
            per_sigma: None,
        })
    }

    /// Gains of a separable N-D pipeline: per-axis gains multiply and the
    /// per-axis dilations are independent, so the means multiply too.
    pub fn product(parts: &[StageOneStats]) -> Self {
        Self {
            alpha_bar: parts.iter().map(|p| p.alpha_bar).product(),
            beta_bar: parts.iter().map(|p| p.beta_bar).product(),
            per_sigma: None,
        }
    }

    /// `10 log10(ᾱ/β̄)`: the processing gain of the first stage.
    pub fn gain_db(&self) -> f64 {
        10.0 * (self.alpha_bar / self.beta_bar).log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AveragingMode {
    /// Every odd dilation in `[n]`.
    Exhaustive,
    /// `count` dilations drawn uniformly with replacement.
    Sampled { count: usize, seed: u64 },
}

/// `(α, β)` of a sinusoid at `omega` under dilation `sigma`: the squared
/// projection of the windowed, permuted and folded steering vector onto the
/// DFT row of its peak bucket, and the noise gain of that cell.
pub fn compute_alpha_beta(omega: f64, sigma: usize, plan: &AxisPlan) -> Result<(f64, f64)> {
    mod_inverse(sigma, plan.n)?;
    let x = steering_vector(omega, plan.n);
    let folded = plan.fold(&x, sigma)?;
    let p = peak_bucket(omega, sigma, plan.n, plan.b);
    let b = plan.b as f64;
    let f: Complex64 = folded
        .iter()
        .enumerate()
        .map(|(i, v)| v * Complex64::from_polar(1.0, -(TAU * (p * i) as f64 / b).rem_euclid(TAU)))
        .sum();
    Ok((f.norm_sqr(), plan.beta(sigma)))
}

/// Means of α and β over dilations.
pub fn average_alpha_beta(omega: f64, plan: &AxisPlan, mode: AveragingMode) -> Result<StageOneStats> {
    let sigmas: Vec<usize> = match mode {
        AveragingMode::Exhaustive => (1..plan.n.max(2)).step_by(2).collect(),
        AveragingMode::Sampled { count, seed } => {
            if count == 0 {
                return Err(Error::param("count", "at least one sample required"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| random_sigma(plan.n, &mut rng)).collect()
        }
    };
    let per: Vec<SigmaStats> = sigmas
        .par_iter()
        .map(|&sigma| compute_alpha_beta(omega, sigma, plan).map(|(alpha, beta)| SigmaStats { sigma, alpha, beta }))
        .collect::<Result<_>>()?;
    let m = per.len() as f64;
    let alpha_bar = per.iter().map(|s| s.alpha).sum::<f64>() / m;
    let beta_bar = per.iter().map(|s| s.beta).sum::<f64>() / m;
    let mut s = StageOneStats::new(alpha_bar, beta_bar)?;
    s.per_sigma = Some(per);
    Ok(s)
}

/// Exact marking rates of one cell under a fixed dilation:
/// `(exp(-γ/(σ_n² β)), exp(-γ/(σ_n² (α·snr + β))))`.
pub fn per_sigma_rates(gamma: f64, noise_var: f64, alpha: f64, beta: f64, snr: f64) -> (f64, f64) {
    let pfa = (-gamma / (noise_var * beta)).exp();
    let pd = (-gamma / (noise_var * (alpha * snr + beta))).exp();
    (pfa, pd)
}

/// Dilation-averaged first-stage rates in closed form:
/// `P̄_fa = exp(-γ/(σ_n² β̄))`, `P̄_d = P̄_fa^{β̄/(ᾱ·snr + β̄)}`.
pub fn stage1_roc(gamma: f64, noise_var: f64, stats: &StageOneStats, snr: f64) -> (f64, f64) {
    let pfa = (-gamma / (noise_var * stats.beta_bar)).exp();
    let pd = pfa.powf(stats.beta_bar / (stats.alpha_bar * snr + stats.beta_bar));
    (pfa, pd)
}

/// Dilation averages of the exact per-σ rates, `(E_σ P̃_fa, E_σ P̃_d)`.
/// Needs `per_sigma`.
pub fn averaged_rates(gamma: f64, noise_var: f64, stats: &StageOneStats, snr: f64) -> Option<(f64, f64)> {
    let per = stats.per_sigma.as_ref()?;
    let m = per.len() as f64;
    let (a, b) = per.iter().fold((0.0, 0.0), |(a, b), s| {
        let (pf, pd) = per_sigma_rates(gamma, noise_var, s.alpha, s.beta, snr);
        (a + pf, b + pd)
    });
    Some((a / m, b / m))
}

/// One row of [`variance_gap`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceGap {
    pub t: usize,
    /// `T P̄_d (1 - P̄_d)` with `P̄_d` the exact dilation mean.
    pub bound: f64,
    /// Mean over runs of `Σ_s P̃_d(σ_s)(1 - P̃_d(σ_s))`.
    pub variance: f64,
    /// Mean over runs of `(bound - variance) / variance`.
    pub rel_gap: f64,
}

/// How far the occurrence-count variance at a sinusoid sits below its
/// upper bound, for random dilation schedules of each length in `ts`.
/// Schedules are nested (shorter ones are prefixes of the longest). Needs
/// `per_sigma` from exhaustive averaging.
pub fn variance_gap(
    stats: &StageOneStats,
    gamma: f64,
    noise_var: f64,
    snr: f64,
    ts: &[usize],
    runs: usize,
    seed: u64,
) -> Result<Vec<VarianceGap>> {
    let per = stats
        .per_sigma
        .as_ref()
        .ok_or_else(|| Error::param("stats", "per-dilation gains required"))?;
    if per.iter().enumerate().any(|(i, s)| s.sigma != 2 * i + 1) {
        return Err(Error::param("stats", "exhaustive averaging required"));
    }
    if runs == 0 || ts.is_empty() || ts.contains(&0) {
        return Err(Error::param("runs", "need runs >= 1 and positive lengths"));
    }
    let n = 2 * per.len();
    let pd: Vec<f64> = per
        .iter()
        .map(|s| per_sigma_rates(gamma, noise_var, s.alpha, s.beta, snr).1)
        .collect();
    let pd_bar = pd.iter().sum::<f64>() / pd.len() as f64;
    let tmax = *ts.iter().max().expect("non-empty");
    let sums: Vec<Vec<(f64, f64)>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, rng::DOMAIN_SIGMA, r as u64);
            let sched: Vec<f64> = (0..tmax).map(|_| pd[random_sigma(n, &mut rng) / 2]).collect();
            ts.iter()
                .map(|&t| {
                    let var: f64 = sched[..t].iter().map(|p| p * (1.0 - p)).sum();
                    let bound = t as f64 * pd_bar * (1.0 - pd_bar);
                    (var, (bound - var) / var)
                })
                .collect()
        })
        .collect();
    Ok(ts
        .iter()
        .enumerate()
        .map(|(i, &t)| VarianceGap {
            t,
            bound: t as f64 * pd_bar * (1.0 - pd_bar),
            variance: sums.iter().map(|r| r[i].0).sum::<f64>() / runs as f64,
            rel_gap: sums.iter().map(|r| r[i].1).sum::<f64>() / runs as f64,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::{flat_window, WindowSpec};

    fn bin(k: f64, n: usize) -> f64 {
        TAU * k / n as f64
    }

    #[test]
    fn rectangular_full_band_gains() {
        // Unnormalized all-ones windows give the plain DFT gains.
        let n = 64;
        let pre = WindowSpec::rectangular(n).unwrap();
        let flat = flat_window(n, n, 40.0).unwrap();
        let mut plan = AxisPlan::new(&pre, &flat).unwrap();
        plan.flat = vec![Complex64::new(1.0, 0.0); n];
        plan.pre = vec![1.0; n];
        for sigma in [1, 7, 63] {
            let (a, b) = compute_alpha_beta(bin(5.0, n), sigma, &plan).unwrap();
            assert!((a - (n * n) as f64).abs() < 1e-8);
            assert!((b - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn variance_gap_vanishes_for_dilation_free_gains() {
        let n = 64;
        let pre = WindowSpec::rectangular(n).unwrap();
        let flat = flat_window(n, n, 40.0).unwrap();
        let mut plan = AxisPlan::new(&pre, &flat).unwrap();
        plan.flat = vec![Complex64::new(1.0, 0.0); n];
        plan.pre = vec![1.0; n];
        let s = average_alpha_beta(bin(5.0, n), &plan, AveragingMode::Exhaustive).unwrap();
        let rows = variance_gap(&s, 3.0 * n as f64, 1.0, 0.05, &[4, 16], 5, 1).unwrap();
        for r in rows {
            assert!(r.rel_gap.abs() < 1e-12 && (r.bound - r.variance).abs() < 1e-9);
        }
        let sampled = average_alpha_beta(bin(5.0, n), &plan, AveragingMode::Sampled { count: 8, seed: 0 }).unwrap();
        assert!(variance_gap(&sampled, 1.0, 1.0, 1.0, &[4], 5, 1).is_err());
        assert!(variance_gap(&s, 1.0, 1.0, 1.0, &[4], 0, 1).is_err());
    }

    /// Dense operator `A W̄ P_σ W` as a B×N matrix, projected onto DFT row p.
    fn dense_oracle(omega: f64, sigma: usize, plan: &AxisPlan) -> (f64, f64) {
        let (n, b) = (plan.n, plan.b);
        let mut w = vec![vec![Complex64::default(); n]; n];
        let mut wb = vec![vec![Complex64::default(); n]; n];
        let mut p = vec![vec![Complex64::default(); n]; n];
        for i in 0..n {
            w[i][i] = Complex64::new(plan.pre[i], 0.0);
            wb[i][i] = plan.flat[i];
            p[i][(sigma * i) % n] = Complex64::new(1.0, 0.0);
        }
        let mut a = vec![vec![Complex64::default(); n]; b];
        for i in 0..b {
            for j in 0..n / b {
                a[i][i + b * j] = Complex64::new(1.0, 0.0);
            }
        }
        let mul = |x: &Vec<Vec<Complex64>>, y: &Vec<Vec<Complex64>>| {
            let (r, k, c) = (x.len(), y.len(), y[0].len());
            let mut out = vec![vec![Complex64::default(); c]; r];
            for i in 0..r {
                for m in 0..k {
                    let xv = x[i][m];
                    if xv == Complex64::default() {
                        continue;
                    }
                    for j in 0..c {
                        out[i][j] += xv * y[m][j];
                    }
                }
            }
            out
        };
        let v = mul(&mul(&mul(&a, &wb), &p), &w);
        let k = crate::modular::peak_bucket(omega, sigma, n, b);
        let row: Vec<Complex64> = (0..n)
            .map(|c| (0..b).map(|i| Complex64::from_polar(1.0, -TAU * (k * i) as f64 / b as f64) * v[i][c]).sum())
            .collect();
        let x = steering_vector(omega, n);
        let alpha = row.iter().zip(&x).map(|(r, x)| r * x).sum::<Complex64>().norm_sqr();
        let beta = row.iter().map(|r| r.norm_sqr()).sum();
        (alpha, beta)
    }

    #[test]
    fn gains_match_dense_operator() {
        let plan = AxisPlan::chebyshev(128, 16, 40.0, 40.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let sigma = random_sigma(128, &mut rng);
            let omega = rand::Rng::random_range(&mut rng, 0.0..TAU);
            let (a, b) = compute_alpha_beta(omega, sigma, &plan).unwrap();
            let (ao, bo) = dense_oracle(omega, sigma, &plan);
            assert!((a - ao).abs() <= 1e-8 * ao, "alpha {a} vs {ao}");
            assert!((b - bo).abs() <= 1e-8 * bo, "beta {b} vs {bo}");
        }
    }

    #[test]
    fn beta_nearly_symmetric_in_sigma() {
        let n = 1024;
        let plan = AxisPlan::chebyshev(n, 64, 40.0, 40.0).unwrap();
        let worst = (1..n / 2)
            .step_by(2)
            .map(|s| {
                let (a, b) = (plan.beta(s), plan.beta(n - s));
                (a - b).abs() / a
            })
            .fold(0.0, f64::max);
        assert!(worst < 0.02, "worst relative asymmetry {worst}");
    }

    #[test]
    fn sampled_mean_close_to_exhaustive() {
        let n = 1024;
        let plan = AxisPlan::chebyshev(n, 64, 40.0, 40.0).unwrap();
        let om = bin(64.5, n);
        let ex = average_alpha_beta(om, &plan, AveragingMode::Exhaustive).unwrap();
        let sa = average_alpha_beta(om, &plan, AveragingMode::Sampled { count: 500, seed: 9 }).unwrap();
        assert!((sa.alpha_bar / ex.alpha_bar - 1.0).abs() < 0.01);
        assert!((sa.beta_bar / ex.beta_bar - 1.0).abs() < 0.01);
        let on = average_alpha_beta(bin(64.0, n), &plan, AveragingMode::Exhaustive).unwrap();
        assert_eq!(on.beta_bar, ex.beta_bar);
        assert!(on.alpha_bar > ex.alpha_bar);
    }

    #[test]
    fn roc_limits_and_monotonicity() {
        let s = StageOneStats::new(50.0, 1e-3).unwrap();
        let (pf, pd) = stage1_roc(0.0, 1.0, &s, 0.1);
        assert_eq!((pf, pd), (1.0, 1.0));
        let (pf, pd) = stage1_roc(3e-3, 1.0, &s, 1e12);
        assert!(pf > 0.0 && pf < 1.0 && pd > 1.0 - 1e-9);
        let mut last = 1.0;
        for g in [1e-4, 1e-3, 3e-3, 1e-2] {
            let (pf, _) = stage1_roc(g, 1.0, &s, 0.1);
            assert!(pf < last);
            last = pf;
        }
        let mut last = 0.0;
        for snr in [1e-4, 1e-3, 1e-2, 1e-1] {
            let (_, pd) = stage1_roc(3e-3, 1.0, &s, snr);
            assert!(pd > last);
            last = pd;
        }
    }

    #[test]
    fn product_of_stats() {
        let a = StageOneStats::new(2.0, 0.5).unwrap();
        let b = StageOneStats::new(3.0, 0.25).unwrap();
        let p = StageOneStats::product(&[a, b]);
        assert_eq!((p.alpha_bar, p.beta_bar), (6.0, 0.125));
    }
}
