//! Second-stage normal approximations and the joint threshold design.
//!
//! For each occurrence threshold μ ∈ [1, T] the detection constraint
//! `Q((μ - T P̄_d)/σ_a1) = P_d` fixes `P̄_d`, the false-alarm constraint
//! `Q((μ - μ_a0)/σ_a0) = P_fa` then fixes `P̄_fa`, and the first-stage power
//! law gives the SNR that links them. The design keeps the μ with the
//! smallest SNR.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::StageOneStats;
use crate::error::{Error, Result};
use crate::special::{bisect, q};

/// Calibration of the co-existing sinusoids' marking rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EtaP {
    /// Fixed factor; 1 means every sinusoid sits at the design SNR.
    Fixed(f64),
    /// `1/P̄_d`: co-existing sinusoids are always marked.
    InverseDetection,
}

impl EtaP {
    pub fn value(&self, pd_bar: f64) -> f64 {
        match *self {
            EtaP::Fixed(v) => v,
            EtaP::InverseDetection => 1.0 / pd_bar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondStageDists {
    pub mu_a0: f64,
    pub var_a0: f64,
    pub mu_a1: f64,
    pub var_a1: f64,
    /// Expected number of segments in which an empty index shares its
    /// bucket with a sinusoid.
    pub f: f64,
}

/// Normal approximations of the occurrence count at an empty index (`a0`)
/// and at a sinusoid (`a1`), variances at their upper bounds.
pub fn stage2_dists(
    pd_bar: f64,
    pfa_bar: f64,
    t: usize,
    k: usize,
    eta_m: f64,
    eta_p: f64,
    b: usize,
) -> Result<SecondStageDists> {
    let load = k as f64 * eta_m;
    if load >= b as f64 {
        return Err(Error::Infeasible { load, b });
    }
    let t = t as f64;
    let f = t * load / b as f64;
    let hp = (eta_p * pd_bar).min(1.0);
    Ok(SecondStageDists {
        mu_a0: f * hp + (t - f) * pfa_bar,
        var_a0: f * hp * (1.0 - hp) + (t - f) * pfa_bar * (1.0 - pfa_bar),
        mu_a1: t * pd_bar,
        var_a1: t * pd_bar * (1.0 - pd_bar),
        f,
    })
}

/// Upper tail of a normal, degenerating to a step at zero variance.
fn normal_tail(x: f64, mean: f64, var: f64) -> f64 {
    if var <= 0.0 {
        return if x < mean { 1.0 } else { 0.0 };
    }
    q((x - mean) / var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    /// Target overall detection probability.
    pub pd: f64,
    /// Target overall false-alarm probability per index.
    pub pfa: f64,
    pub t: usize,
    /// Sparsity budget.
    pub k: usize,
    /// 6 dB bandwidth of the pre-permutation window, in bins.
    pub eta_m: f64,
    pub eta_p: EtaP,
    /// Reduced size (product over axes).
    pub b: usize,
    pub noise_var: f64,
}

impl DesignParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.pfa && self.pfa < self.pd && self.pd < 1.0) {
            return Err(Error::param("pd", format!("need 0 < pfa < pd < 1, got pfa = {}, pd = {}", self.pfa, self.pd)));
        }
        if self.t == 0 {
            return Err(Error::param("t", "at least one segment required"));
        }
        if !(self.eta_m > 0.0) {
            return Err(Error::param("eta_m", "must be positive"));
        }
        if let EtaP::Fixed(v) = self.eta_p {
            if !(v >= 1.0) {
                return Err(Error::param("eta_p", format!("{v} < 1")));
            }
        }
        if self.b == 0 {
            return Err(Error::param("b", "must be positive"));
        }
        if !(self.noise_var > 0.0) {
            return Err(Error::param("noise_var", "must be positive"));
        }
        let load = self.k as f64 * self.eta_m;
        if load >= self.b as f64 {
            return Err(Error::Infeasible { load, b: self.b });
        }
        Ok(())
    }
}

/// Best design for one occurrence threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuCandidate {
    pub mu: usize,
    /// Linear SNR.
    pub snr_min: f64,
    pub pfa_bar: f64,
    pub pd_bar: f64,
    pub eta_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub snr_min: f64,
    pub snr_min_db: f64,
    /// First-stage threshold on |f̂|².
    pub gamma: f64,
    pub mu: usize,
    pub pfa_bar: f64,
    pub pd_bar: f64,
    pub eta_p: f64,
    pub feasible: bool,
}

const TOL: f64 = 1e-12;
/// Smallest first-stage false-alarm rate searched, as a natural log.
const LOG_PFA_FLOOR: f64 = -700.0;

/// `P̄_d` meeting the detection constraint at threshold `mu`.
fn solve_pd_bar(mu: usize, p: &DesignParams) -> Option<f64> {
    let t = p.t as f64;
    let g = |pd: f64| normal_tail(mu as f64, t * pd, t * pd * (1.0 - pd)) - p.pd;
    bisect(g, 1e-15, 1.0 - 1e-15, TOL)
}

fn candidate(mu: usize, p: &DesignParams, s: &StageOneStats) -> Option<MuCandidate> {
    let pd_bar = solve_pd_bar(mu, p)?;
    let eta_p = p.eta_p.value(pd_bar);
    let h = |u: f64| {
        let d = stage2_dists(pd_bar, u.exp(), p.t, p.k, p.eta_m, eta_p, p.b).expect("feasibility checked");
        normal_tail(mu as f64, d.mu_a0, d.var_a0) - p.pfa
    };
    // Monotone increasing in log P̄_fa; P̄_fa < P̄_d keeps the SNR positive.
    let u = bisect(h, LOG_PFA_FLOOR, pd_bar.ln(), TOL)?;
    let pfa_bar = u.exp();
    let snr_min = s.beta_bar / s.alpha_bar * (pfa_bar.ln() / pd_bar.ln() - 1.0);
    (snr_min.is_finite() && snr_min > 0.0).then_some(MuCandidate {
        mu,
        snr_min,
        pfa_bar,
        pd_bar,
        eta_p,
    })
}

/// The per-μ designs; `None` where the constraints cannot both be met.
pub fn mu_table(p: &DesignParams, s: &StageOneStats) -> Result<Vec<Option<MuCandidate>>> {
    p.validate()?;
    Ok((1..=p.t).into_par_iter().map(|mu| candidate(mu, p, s)).collect())
}

/// Minimum-SNR thresholds `(γ*, μ*)`; ties go to the smaller μ.
pub fn optimize(p: &DesignParams, s: &StageOneStats) -> Result<OperatingPoint> {
    let table = mu_table(p, s)?;
    let best = table
        .iter()
        .flatten()
        .fold(None::<&MuCandidate>, |best, c| match best {
            Some(b) if b.snr_min <= c.snr_min => Some(b),
            _ => Some(c),
        })
        .ok_or(Error::NoSolution {
            pd: p.pd,
            pfa: p.pfa,
            t: p.t,
        })?;
    Ok(OperatingPoint {
        snr_min: best.snr_min,
        snr_min_db: 10.0 * best.snr_min.log10(),
        gamma: -p.noise_var * s.beta_bar * best.pfa_bar.ln(),
        mu: best.mu,
        pfa_bar: best.pfa_bar,
        pd_bar: best.pd_bar,
        eta_p: best.eta_p,
        feasible: true,
    })
}

/// Overall detection probability at a fixed SNR and false-alarm target,
/// maximized over μ. `p.pfa` is replaced by `pfa`; `p.pd` is unused.
pub fn rsft_roc(snr: f64, pfa: f64, p: &DesignParams, s: &StageOneStats) -> Result<f64> {
    let load = p.k as f64 * p.eta_m;
    if load >= p.b as f64 {
        return Err(Error::Infeasible { load, b: p.b });
    }
    let t = p.t as f64;
    let expo = s.beta_bar / (s.alpha_bar * snr + s.beta_bar);
    let best = (1..=p.t)
        .into_par_iter()
        .map(|mu| {
            let h = |u: f64| {
                let pf = u.exp();
                let pd = pf.powf(expo);
                let eta = p.eta_p.value(pd);
                let d = stage2_dists(pd, pf, p.t, p.k, p.eta_m, eta, p.b).expect("feasibility checked");
                normal_tail(mu as f64, d.mu_a0, d.var_a0) - pfa
            };
            let hi = -1e-12;
            let u = if h(hi) <= 0.0 {
                hi
            } else {
                match bisect(h, LOG_PFA_FLOOR, hi, TOL) {
                    Some(u) => u,
                    None => return 0.0,
                }
            };
            let pd = u.exp().powf(expo);
            normal_tail(mu as f64, t * pd, t * pd * (1.0 - pd))
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}
