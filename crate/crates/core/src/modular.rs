//! Modular index arithmetic: permutation, aliasing, bucket mapping and its
//! L-fold inverse.
//!
//! With `L = n/b`, index `i` of an `n`-point spectrum lands in bucket
//! `⌊((σ·i) mod n) / L⌋` after permuting the time samples by `σ` and
//! folding them to length `b`. Every bucket pulls from exactly `L` indices,
//! and the buckets partition `[n]`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Multiplicative inverse of `sigma` modulo `n`.
pub fn mod_inverse(sigma: usize, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::NonInvertible { value: sigma, modulus: n });
    }
    if n == 1 {
        return Ok(0);
    }
    let (mut r0, mut r1) = (n as i128, (sigma % n) as i128);
    let (mut t0, mut t1) = (0_i128, 1_i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(Error::NonInvertible { value: sigma, modulus: n });
    }
    Ok(t0.rem_euclid(n as i128) as usize)
}

/// Uniform odd integer in `[0, n)`; `n` must be a power of two.
pub fn random_sigma<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    if n <= 2 {
        return 1 % n.max(1);
    }
    2 * rng.random_range(0..n / 2) + 1
}

/// Dilation `σ`, its inverse and offset `τ` over `[n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationParam {
    pub sigma: usize,
    pub sigma_inv: usize,
    pub tau: usize,
    pub n: usize,
}

impl PermutationParam {
    pub fn new(sigma: usize, n: usize) -> Result<Self> {
        Self::with_tau(sigma, 0, n)
    }

    pub fn with_tau(sigma: usize, tau: usize, n: usize) -> Result<Self> {
        let sigma_inv = mod_inverse(sigma, n)?;
        Ok(Self {
            sigma: sigma % n,
            sigma_inv,
            tau: tau % n,
            n,
        })
    }

    /// The permutation undoing this one: `x_i = y_{σ⁻¹(i - τ)}`.
    pub fn inverse(&self) -> Self {
        let n = self.n as u128;
        let tau = (n - (self.sigma_inv as u128 * self.tau as u128) % n) % n;
        Self {
            sigma: self.sigma_inv,
            sigma_inv: self.sigma,
            tau: tau as usize,
            n: self.n,
        }
    }

    /// Source index feeding output `i`.
    pub fn source(&self, i: usize) -> usize {
        ((self.sigma as u128 * i as u128 + self.tau as u128) % self.n as u128) as usize
    }
}

/// `out[i] = x[(σ·i + τ) mod n]`.
pub fn permute(x: &[Complex64], p: &PermutationParam) -> Result<Vec<Complex64>> {
    if x.len() != p.n {
        return Err(Error::LengthMismatch {
            expected: p.n,
            actual: x.len(),
        });
    }
    Ok((0..p.n).map(|i| x[p.source(i)]).collect())
}

/// Fold of an `n`-vector to `b` entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AliasShape {
    pub n: usize,
    pub b: usize,
}

impl AliasShape {
    pub fn new(n: usize, b: usize) -> Result<Self> {
        if !n.is_power_of_two() || !b.is_power_of_two() || b > n {
            return Err(Error::param("b", format!("need powers of two with b <= n, got n = {n}, b = {b}")));
        }
        Ok(Self { n, b })
    }

    pub fn l(&self) -> usize {
        self.n / self.b
    }
}

/// `out[i] = Σ_j x[i + b·j]`.
pub fn alias(x: &[Complex64], shape: &AliasShape) -> Result<Vec<Complex64>> {
    if x.len() != shape.n {
        return Err(Error::LengthMismatch {
            expected: shape.n,
            actual: x.len(),
        });
    }
    let mut out = vec![Complex64::default(); shape.b];
    for chunk in x.chunks_exact(shape.b) {
        for (o, v) in out.iter_mut().zip(chunk) {
            *o += v;
        }
    }
    Ok(out)
}

/// Bucket of index `i`: `⌊(b/n)·((i·σ) mod n)⌋`.
pub fn map_index(i: usize, sigma: usize, n: usize, b: usize) -> usize {
    let u = (i as u128 * sigma as u128 % n as u128) as usize;
    u / (n / b)
}

/// All `L = n/b` indices of `[n]` that map to bucket `j`.
pub fn reverse_map(j: usize, sigma_inv: usize, n: usize, b: usize) -> impl Iterator<Item = usize> {
    let l = n / b;
    (j * l..(j + 1) * l).map(move |u| (sigma_inv as u128 * u as u128 % n as u128) as usize)
}

/// Nearest grid point of `omega` on an `n`-point DFT grid, ties upward.
pub fn nearest_bin(omega: f64, n: usize) -> usize {
    let x = omega.rem_euclid(std::f64::consts::TAU) * n as f64 / std::f64::consts::TAU;
    ((x + 0.5).floor() as usize) % n
}

/// Bucket holding the peak of a sinusoid at `omega` under dilation `sigma`.
pub fn peak_bucket(omega: f64, sigma: usize, n: usize, b: usize) -> usize {
    map_index(nearest_bin(omega, n), sigma, n, b)
}

/// Cartesian product of per-axis index lists, yielded as row-major flat
/// offsets into `shape`.
pub fn cartesian_flat(per_axis: &[Vec<usize>], shape: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (list, &n) in per_axis.iter().zip(shape) {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for &base in &out {
            for &i in list {
                next.push(base * n + i);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rustfft::FftPlanner;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(3, 8).unwrap(), 3);
        assert_eq!(mod_inverse(1, 1024).unwrap(), 1);
        assert_eq!(mod_inverse(4, 8), Err(Error::NonInvertible { value: 4, modulus: 8 }));
        for n in [8usize, 64, 1024] {
            for s in (1..n).step_by(2) {
                let inv = mod_inverse(s, n).unwrap();
                assert_eq!(s * inv % n, 1);
            }
        }
    }

    #[test]
    fn random_sigma_odd_and_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 8;
        let mut hist = [0usize; 8];
        let draws = 100_000;
        for _ in 0..draws {
            let s = random_sigma(n, &mut rng);
            assert!(s % 2 == 1 && s < n);
            assert!(mod_inverse(s, n).is_ok());
            hist[s] += 1;
        }
        let e = draws as f64 / 4.0;
        let chi2: f64 = [1, 3, 5, 7].iter().map(|&k| (hist[k] as f64 - e).powi(2) / e).sum();
        // 1% critical value of chi-square with 3 degrees of freedom.
        assert!(chi2 < 11.345, "chi2 = {chi2}");
    }

    #[test]
    fn permute_examples() {
        let x: Vec<Complex64> = (0..4).map(|i| c(i as f64)).collect();
        let p = PermutationParam::new(1, 4).unwrap();
        assert_eq!(permute(&x, &p).unwrap(), x);
        let p = PermutationParam::new(3, 4).unwrap();
        assert_eq!(permute(&x, &p).unwrap(), vec![c(0.0), c(3.0), c(2.0), c(1.0)]);
        assert!(permute(&x[..3], &p).is_err());
    }

    #[test]
    fn permute_inverse_is_identity() {
        let n = 64;
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        for s in (1..n).step_by(2) {
            for tau in [0, 5, 63] {
                let p = PermutationParam::with_tau(s, tau, n).unwrap();
                let y = permute(&permute(&x, &p).unwrap(), &p.inverse()).unwrap();
                assert_eq!(y, x, "sigma={s} tau={tau}");
            }
        }
    }

    #[test]
    fn alias_examples() {
        let x = vec![c(1.0), c(2.0), c(3.0), c(4.0)];
        assert_eq!(alias(&x, &AliasShape::new(4, 2).unwrap()).unwrap(), vec![c(4.0), c(6.0)]);
        assert_eq!(alias(&x, &AliasShape::new(4, 4).unwrap()).unwrap(), x);
        assert!(AliasShape::new(4, 8).is_err());
    }

    #[test]
    fn alias_downsamples_spectrum() {
        let (n, b) = (64, 8);
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut planner = FftPlanner::new();
        let mut big = x.clone();
        planner.plan_fft_forward(n).process(&mut big);
        let mut small = alias(&x, &AliasShape::new(n, b).unwrap()).unwrap();
        planner.plan_fft_forward(b).process(&mut small);
        for i in 0..b {
            assert!((small[i] - big[i * n / b]).norm() <= 1e-10 * big[i * n / b].norm().max(1.0));
        }
    }

    #[test]
    fn map_index_examples() {
        assert_eq!(map_index(0, 7, 64, 16), 0);
        assert_eq!(map_index(5, 3, 8, 4), 3);
        for s in (1..64).step_by(2) {
            for i in 0..64 {
                assert!(map_index(i, s, 64, 16) < 16);
            }
        }
    }

    #[test]
    fn reverse_map_examples() {
        let r: Vec<usize> = reverse_map(3, 3, 8, 4).collect();
        assert_eq!(r, vec![2, 5]);
        assert!(r.contains(&5));
        let r: Vec<usize> = reverse_map(5, 3, 8, 8).collect();
        assert_eq!(r, vec![15 % 8]);
    }

    #[test]
    fn nearest_bin_rounds_half_up() {
        let bin = std::f64::consts::TAU / 1024.0;
        assert_eq!(nearest_bin(64.5 * bin, 1024), 65);
        assert_eq!(nearest_bin(64.49 * bin, 1024), 64);
        assert_eq!(nearest_bin(1023.7 * bin, 1024), 0);
    }

    #[test]
    fn cartesian_flat_order() {
        let got = cartesian_flat(&[vec![0, 1], vec![2, 3]], &[2, 4]);
        assert_eq!(got, vec![2, 3, 6, 7]);
    }
}
