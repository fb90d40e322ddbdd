//! Operation counts of the sparse pipeline and the averaged periodogram.
//!
//! Counts are per-procedure rows; [`RsftCost::total`] and
//! [`BartlettCost::total`] sum them. The asymptotic forms drop the constant
//! factors and are what the minimum-cost reduced size is read from.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsftCost {
    pub prewindow: f64,
    pub permutation: f64,
    pub flat_window: f64,
    pub aliasing: f64,
    pub fft: f64,
    pub square: f64,
    pub first_stage: f64,
    pub reverse_map: f64,
    pub second_stage: f64,
}

impl RsftCost {
    pub fn total(&self) -> f64 {
        self.prewindow
            + self.permutation
            + self.flat_window
            + self.aliasing
            + self.fft
            + self.square
            + self.first_stage
            + self.reverse_map
            + self.second_stage
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BartlettCost {
    pub windowing: f64,
    pub fft: f64,
    pub square: f64,
    pub detection: f64,
}

impl BartlettCost {
    pub fn total(&self) -> f64 {
        self.windowing + self.fft + self.square + self.detection
    }
}

/// Per-procedure counts of the sparse pipeline over `t` segments.
pub fn rsft_cost(n: usize, b: usize, t: usize, k: usize, eta_m: f64, eta_p: f64) -> RsftCost {
    let (n, b, t) = (n as f64, b as f64, t as f64);
    RsftCost {
        prewindow: t * n,
        permutation: t * n,
        flat_window: t * n,
        aliasing: t * b * (n / b - 1.0),
        fft: t * b / 2.0 * b.log2(),
        square: t * b,
        first_stage: t * b,
        reverse_map: t * k as f64 * eta_m * n / (b * eta_p),
        second_stage: n,
    }
}

/// `T(N + B + B log2 B + K η_m N/(B η_p)) + N`.
pub fn rsft_cost_asymptotic(n: usize, b: usize, t: usize, k: usize, eta_m: f64, eta_p: f64) -> f64 {
    let (n, b, t) = (n as f64, b as f64, t as f64);
    t * (n + b + b * b.log2() + k as f64 * eta_m * n / (b * eta_p)) + n
}

/// Per-procedure counts of the averaged periodogram over `t` segments.
pub fn bartlett_cost(n: usize, t: usize) -> BartlettCost {
    let (n, t) = (n as f64, t as f64);
    BartlettCost {
        windowing: t * n,
        fft: t * n / 2.0 * n.log2(),
        square: t * n,
        detection: n,
    }
}

/// `T N (1 + log2 N) + N`.
pub fn bartlett_cost_asymptotic(n: usize, t: usize) -> f64 {
    let (n, t) = (n as f64, t as f64);
    t * n * (1.0 + n.log2()) + n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_band_costs_more_than_periodogram() {
        let r = rsft_cost(1024, 1024, 50, 5, 1.4, 1.0).total();
        let b = bartlett_cost(1024, 50).total();
        assert!(r > b);
        assert!(rsft_cost_asymptotic(1024, 1024, 50, 5, 1.4, 1.0) > bartlett_cost_asymptotic(1024, 50));
    }

    #[test]
    fn periodogram_rows() {
        let c = bartlett_cost(16, 2);
        assert_eq!((c.windowing, c.fft, c.square, c.detection), (32.0, 64.0, 32.0, 16.0));
        assert_eq!(c.total(), 2.0 * 16.0 * (2.0 + 0.5 * 4.0) + 16.0);
    }
}
