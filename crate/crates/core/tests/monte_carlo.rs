//! Monte Carlo checks of the detectors against exact finite-T distributions.

use rsft::bartlett::{bartlett_run_generated, bartlett_threshold, BartlettStats};
use rsft::pipeline::{Rsft, RsftConfig};
use rsft::signal::{gen_segment, SignalConfig, SinusoidSpec};
use rsft::window::compound_window;
use rsft::ComplexCube;
use statrs::function::gamma::gamma_ur;

fn within(obs: f64, exp: f64, sd: f64, k: f64) -> bool {
    (obs - exp).abs() <= k * sd
}

/// Averaged periodogram bin with a rectangular window is exactly
/// `(a n² + n)·Gamma(T, 1/T)` for unit noise and a CN(0, a) amplitude.
fn bartlett_rates(amp_var: f64, trials: u64) -> (f64, f64, f64) {
    let (n, t, k) = (64, 4, 10usize);
    let ones = vec![1.0; n];
    let window = compound_window(&[&ones]).unwrap();
    let stats = BartlettStats::for_window(0.0, &ones, t);
    let thr = bartlett_threshold(1.0, &stats, 0.05);
    let sinusoids = if amp_var > 0.0 { vec![SinusoidSpec::at_bin(k as f64, n, amp_var)] } else { vec![] };
    let (mut hits, mut total) = (0u64, 0u64);
    for trial in 0..trials {
        let cfg = SignalConfig { n, t, noise_var: 1.0, sinusoids: sinusoids.clone(), seed: trial };
        let out = bartlett_run_generated(t, |s| Ok(ComplexCube::from_vec(gen_segment(&cfg, s)?)), &window, thr).unwrap();
        if amp_var > 0.0 {
            hits += (out.spectrum.data()[k] > thr) as u64;
            total += 1;
        } else {
            hits += out.detections.len() as u64;
            total += n as u64;
        }
    }
    let scale = amp_var * (n * n) as f64 + n as f64;
    let exact = gamma_ur(t as f64, t as f64 * thr / scale);
    (hits as f64 / total as f64, exact, total as f64)
}

#[test]
fn bartlett_false_alarms_follow_exact_gamma_tail() {
    let (rate, exact, total) = bartlett_rates(0.0, 3000);
    let sd = (exact * (1.0 - exact) / total).sqrt();
    println!("bartlett noise: empirical {rate:.5}, exact {exact:.5}, nominal 0.05");
    assert!(within(rate, exact, sd, 4.0), "{rate} vs {exact}");
    // the normal approximation under-states the tail at small T
    assert!(exact > 0.06);
}

#[test]
fn bartlett_detection_follows_exact_gamma_tail() {
    let (rate, exact, total) = bartlett_rates(0.03, 4000);
    let sd = (exact * (1.0 - exact) / total).sqrt();
    println!("bartlett signal: empirical {rate:.4}, exact {exact:.4}");
    assert!(exact > 0.2 && exact < 0.8);
    assert!(within(rate, exact, sd, 4.0), "{rate} vs {exact}");
}

/// P(at least `mu` successes) for independent trials with rates `p`.
fn poisson_binomial_tail(p: &[f64], mu: usize) -> f64 {
    let mut dist = vec![1.0];
    for &pi in p {
        let mut next = vec![0.0; dist.len() + 1];
        for (k, &d) in dist.iter().enumerate() {
            next[k] += d * (1.0 - pi);
            next[k + 1] += d * pi;
        }
        dist = next;
    }
    dist[mu.min(dist.len())..].iter().sum()
}

// Every reduced cell sees CN(0, β(σ)) noise, so a cell is marked with
// probability exp(-γ/β(σ)) and the end-to-end false count per run is a
// Poisson-binomial tail given that run's dilations.
#[test]
fn pipeline_false_detections_match_exact_count_distribution() {
    let (n, b, t, mu, runs) = (256, 32, 8, 4, 300u64);
    let probe = Rsft::new(RsftConfig::chebyshev(&[n], &[b], t, 1.0, 1, 40.0, 40.0, 0).unwrap()).unwrap();
    let mean_beta = (0..n / 2).map(|h| probe.axes()[0].beta(2 * h + 1)).sum::<f64>() / (n / 2) as f64;
    let gamma = mean_beta * 5f64.ln();

    let (mut observed, mut expected) = (0usize, 0.0);
    for r in 0..runs {
        let rs = Rsft::new(RsftConfig::chebyshev(&[n], &[b], t, gamma, mu, 40.0, 40.0, r).unwrap()).unwrap();
        let sig = SignalConfig { n, t, noise_var: 1.0, sinusoids: vec![], seed: 10_000 + r };
        let report = rs.run_generated(|s| Ok(ComplexCube::from_vec(gen_segment(&sig, s)?))).unwrap();
        let p: Vec<f64> = report.sigmas.iter().map(|sg| (-gamma / rs.beta(sg)).exp()).collect();
        expected += n as f64 * poisson_binomial_tail(&p, mu);
        observed += report.detections.len();
    }
    // cells sharing a bucket are marked together: clusters of size L
    let sd = (expected * (n / b) as f64).sqrt();
    println!("pipeline noise: observed {observed}, expected {expected:.1}, sd {sd:.1}");
    assert!(within(observed as f64, expected, sd, 4.0));
}

#[test]
fn poisson_binomial_matches_binomial() {
    let p = vec![0.3; 6];
    // P(X >= 4), X ~ Bin(6, 0.3)
    let want = 15.0 * 0.3f64.powi(4) * 0.49 + 6.0 * 0.3f64.powi(5) * 0.7 + 0.3f64.powi(6);
    assert!((poisson_binomial_tail(&p, 4) - want).abs() < 1e-15);
    assert!((poisson_binomial_tail(&p, 0) - 1.0).abs() < 1e-15);
}
