//! The N-D detection pipeline.
//!
//! ```text
//!   segment (N_1 × … × N_d)
//!      │  per axis: x[σ t] · w[σ t] · w̄[t]        window, permute, flat window
//!      ▼
//!   fold t_d → t_d mod B_d                        alias to B_1 × … × B_d
//!      │
//!      ▼
//!   FFT over every axis, |·|² > γ                 first stage: reduced mask
//!      │
//!      ▼
//!   reverse-map each marked cell (L_1 × … × L_d tuples), count over T segments
//!      │
//!      ▼
//!   count ≥ μ                                     second stage: detections
//! ```
//!
//! Both windows are applied with unit energy, so with unit noise variance
//! every reduced cell has noise power `β(σ) = Σ_t |w̄_t|² w²_{σt}` (per axis,
//! multiplied across axes).

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modular::{cartesian_flat, mod_inverse, random_sigma, reverse_map};
use crate::rng;
use crate::tensor::{unflatten, ComplexCube, NdFft, MAX_AXES};
use crate::window::{dolph_chebyshev, flat_window, unit_energy, FlatWindowSpec, WindowSpec};

/// Accumulators over at most this many full-space cells are dense.
pub const DENSE_LIMIT: usize = 1 << 20;

/// Unit-energy windows for one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisPlan {
    pub n: usize,
    pub b: usize,
    /// Pre-permutation window, unit energy.
    pub pre: Vec<f64>,
    /// Bucket-aligned flat window, unit energy.
    pub flat: Vec<Complex64>,
}

impl AxisPlan {
    pub fn new(pre: &WindowSpec, flat: &FlatWindowSpec) -> Result<Self> {
        let n = pre.len();
        if flat.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: flat.len(),
            });
        }
        let e = flat.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        Ok(Self {
            n,
            b: flat.b,
            pre: unit_energy(&pre.coeffs),
            flat: flat.bucket_aligned().into_iter().map(|c| c / e).collect(),
        })
    }

    /// Dolph-Chebyshev pre-window and Chebyshev-prototype flat window.
    pub fn chebyshev(n: usize, b: usize, pre_db: f64, flat_db: f64) -> Result<Self> {
        Self::new(&dolph_chebyshev(n, pre_db)?, &flat_window(n, b, flat_db)?)
    }

    pub fn l(&self) -> usize {
        self.n / self.b
    }

    /// Noise gain of every reduced cell under dilation `sigma`.
    pub fn beta(&self, sigma: usize) -> f64 {
        let n = self.n;
        self.flat
            .iter()
            .enumerate()
            .map(|(t, f)| {
                let w = self.pre[(sigma as u128 * t as u128 % n as u128) as usize];
                f.norm_sqr() * w * w
            })
            .sum()
    }

    /// Per-sample gather table: source index and complex weight.
    fn gather(&self, sigma: usize) -> (Vec<usize>, Vec<Complex64>) {
        let n = self.n;
        (0..n)
            .map(|t| {
                let src = (sigma as u128 * t as u128 % n as u128) as usize;
                (src, self.flat[t] * self.pre[src])
            })
            .unzip()
    }

    /// Windowed, permuted and folded 1-D input (before the B-point FFT).
    pub fn fold(&self, x: &[Complex64], sigma: usize) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        let (src, wgt) = self.gather(sigma);
        let mut out = vec![Complex64::default(); self.b];
        for t in 0..self.n {
            out[t % self.b] += wgt[t] * x[src[t]];
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsftConfig {
    pub dims: Vec<usize>,
    pub reduced: Vec<usize>,
    pub t: usize,
    /// First-stage threshold on |f̂|².
    pub gamma: f64,
    /// Second-stage occurrence threshold.
    pub mu: usize,
    pub prewindows: Vec<WindowSpec>,
    pub flatwindows: Vec<FlatWindowSpec>,
    pub seed: u64,
}

impl RsftConfig {
    /// Chebyshev windows on every axis.
    #[allow(clippy::too_many_arguments)]
    pub fn chebyshev(
        dims: &[usize],
        reduced: &[usize],
        t: usize,
        gamma: f64,
        mu: usize,
        pre_db: f64,
        flat_db: f64,
        seed: u64,
    ) -> Result<Self> {
        if dims.len() != reduced.len() {
            return Err(Error::ShapeMismatch {
                expected: dims.to_vec(),
                actual: reduced.to_vec(),
            });
        }
        let prewindows = dims.iter().map(|&n| dolph_chebyshev(n, pre_db)).collect::<Result<_>>()?;
        let flatwindows = dims
            .iter()
            .zip(reduced)
            .map(|(&n, &b)| flat_window(n, b, flat_db))
            .collect::<Result<_>>()?;
        let cfg = Self {
            dims: dims.to_vec(),
            reduced: reduced.to_vec(),
            t,
            gamma,
            mu,
            prewindows,
            flatwindows,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dims.len();
        if d == 0 || d > MAX_AXES {
            return Err(Error::param("dims", format!("1 to {MAX_AXES} axes required")));
        }
        if self.reduced.len() != d || self.prewindows.len() != d || self.flatwindows.len() != d {
            return Err(Error::param("reduced", "one reduced size and one window pair per axis required"));
        }
        for a in 0..d {
            let (n, b) = (self.dims[a], self.reduced[a]);
            if !n.is_power_of_two() || !b.is_power_of_two() || b > n {
                return Err(Error::param("reduced", format!("axis {a}: need powers of two with B | N, got N = {n}, B = {b}")));
            }
            if self.prewindows[a].len() != n || self.flatwindows[a].len() != n || self.flatwindows[a].b != b {
                return Err(Error::param("prewindow", format!("axis {a}: windows do not match N = {n}, B = {b}")));
            }
        }
        if self.t == 0 {
            return Err(Error::param("t", "at least one segment required"));
        }
        if self.mu == 0 || self.mu > self.t {
            return Err(Error::param("mu", format!("{} outside [1, {}]", self.mu, self.t)));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::param("gamma", "must be positive"));
        }
        Ok(())
    }
}

/// Marked cells of one segment's reduced spectrum, as sorted row-major
/// offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedMask {
    pub shape: Vec<usize>,
    pub cells: Vec<usize>,
}

impl ReducedMask {
    pub fn contains(&self, cell: usize) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Counts {
    Dense(Vec<u32>),
    Sparse(HashMap<usize, u32>),
}

/// Occurrence counts over the full index space.
#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceMap {
    dims: Vec<usize>,
    counts: Counts,
}

impl OccurrenceMap {
    pub fn new(dims: &[usize]) -> Self {
        let total: usize = dims.iter().product();
        let counts = if total <= DENSE_LIMIT {
            Counts::Dense(vec![0; total])
        } else {
            Counts::Sparse(HashMap::new())
        };
        Self {
            dims: dims.to_vec(),
            counts,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn increment(&mut self, flat: usize) {
        match &mut self.counts {
            Counts::Dense(v) => v[flat] += 1,
            Counts::Sparse(m) => *m.entry(flat).or_insert(0) += 1,
        }
    }

    pub fn count_flat(&self, flat: usize) -> u32 {
        match &self.counts {
            Counts::Dense(v) => v.get(flat).copied().unwrap_or(0),
            Counts::Sparse(m) => m.get(&flat).copied().unwrap_or(0),
        }
    }

    pub fn count(&self, index: &[usize]) -> u32 {
        crate::tensor::flat_index(&self.dims, index).map_or(0, |f| self.count_flat(f))
    }

    /// Non-zero entries in row-major (lexicographic) order.
    pub fn entries(&self) -> Vec<(usize, u32)> {
        match &self.counts {
            Counts::Dense(v) => v.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i, c)).collect(),
            Counts::Sparse(m) => {
                let mut e: Vec<(usize, u32)> = m.iter().filter(|(_, &c)| c > 0).map(|(&i, &c)| (i, c)).collect();
                e.sort_unstable();
                e
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.counts {
            Counts::Dense(v) => v.iter().all(|&c| c == 0),
            Counts::Sparse(m) => m.values().all(|&c| c == 0),
        }
    }

    pub fn max_count(&self) -> u32 {
        self.entries().iter().map(|e| e.1).max().unwrap_or(0)
    }

    /// Adds every count of `other`.
    pub fn merge(&mut self, other: &OccurrenceMap) {
        for (i, c) in other.entries() {
            match &mut self.counts {
                Counts::Dense(v) => v[i] += c,
                Counts::Sparse(m) => *m.entry(i).or_insert(0) += c,
            }
        }
    }

    /// Counts every full-space index reverse-mapped from `mask` under the
    /// per-axis dilations `sigmas`.
    pub fn add_mask(&mut self, mask: &ReducedMask, sigmas: &[usize]) -> Result<()> {
        let inv: Vec<usize> = sigmas
            .iter()
            .zip(&self.dims)
            .map(|(&s, &n)| mod_inverse(s, n))
            .collect::<Result<_>>()?;
        for &cell in &mask.cells {
            let j = unflatten(&mask.shape, cell);
            let lists: Vec<Vec<usize>> = (0..self.dims.len())
                .map(|a| reverse_map(j[a], inv[a], self.dims[a], mask.shape[a]).collect())
                .collect();
            for flat in cartesian_flat(&lists, &self.dims) {
                self.increment(flat);
            }
        }
        Ok(())
    }
}

/// Reverse-maps and counts every segment's mask.
pub fn accumulate(masks: &[ReducedMask], sigmas: &[Vec<usize>], dims: &[usize]) -> Result<OccurrenceMap> {
    if masks.len() != sigmas.len() {
        return Err(Error::LengthMismatch {
            expected: masks.len(),
            actual: sigmas.len(),
        });
    }
    let mut acc = OccurrenceMap::new(dims);
    for (m, s) in masks.iter().zip(sigmas) {
        acc.add_mask(m, s)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    pub index: Vec<usize>,
    pub count: u32,
}

/// All indices counted at least `mu` times, in lexicographic order.
pub fn second_stage(acc: &OccurrenceMap, mu: usize) -> Vec<Detection> {
    acc.entries()
        .into_iter()
        .filter(|&(_, c)| c as usize >= mu)
        .map(|(i, count)| Detection {
            index: unflatten(acc.dims(), i),
            count,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub t: usize,
    pub mu: usize,
    /// Per-segment, per-axis dilations.
    pub sigmas: Vec<Vec<usize>>,
    pub first_stage_masks: Vec<ReducedMask>,
    pub accumulator: OccurrenceMap,
    pub detections: Vec<Detection>,
}

impl DetectionReport {
    pub fn detected(&self, index: &[usize]) -> bool {
        self.detections.iter().any(|d| d.index == index)
    }
}

/// Prepared pipeline for one configuration.
#[derive(Debug, Clone)]
pub struct Rsft {
    cfg: RsftConfig,
    axes: Vec<AxisPlan>,
    fft: NdFft,
}

impl Rsft {
    pub fn new(cfg: RsftConfig) -> Result<Self> {
        cfg.validate()?;
        let axes = cfg
            .prewindows
            .iter()
            .zip(&cfg.flatwindows)
            .map(|(p, f)| AxisPlan::new(p, f))
            .collect::<Result<_>>()?;
        let fft = NdFft::forward(&cfg.reduced)?;
        Ok(Self { cfg, axes, fft })
    }

    pub fn config(&self) -> &RsftConfig {
        &self.cfg
    }

    pub fn axes(&self) -> &[AxisPlan] {
        &self.axes
    }

    /// Per-axis dilations of segment `s`, deterministic in `(seed, s)`.
    pub fn sigmas_for(&self, s: usize) -> Vec<usize> {
        let mut r = rng::stream(self.cfg.seed, rng::DOMAIN_SIGMA, s as u64);
        self.cfg.dims.iter().map(|&n| random_sigma(n, &mut r)).collect()
    }

    /// Noise gain of every reduced cell for the given dilations.
    pub fn beta(&self, sigmas: &[usize]) -> f64 {
        self.axes.iter().zip(sigmas).map(|(a, &s)| a.beta(s)).product()
    }

    /// Complex reduced spectrum f̂ of one segment.
    pub fn reduced_spectrum(&self, segment: &ComplexCube, sigmas: &[usize]) -> Result<Vec<Complex64>> {
        if segment.shape() != self.cfg.dims.as_slice() {
            return Err(Error::ShapeMismatch {
                expected: self.cfg.dims.clone(),
                actual: segment.shape().to_vec(),
            });
        }
        if sigmas.len() != self.axes.len() {
            return Err(Error::LengthMismatch {
                expected: self.axes.len(),
                actual: sigmas.len(),
            });
        }
        for (&s, a) in sigmas.iter().zip(&self.axes) {
            mod_inverse(s, a.n)?;
        }
        // Pad to three axes; leading unit axes gather a single sample.
        let pad = MAX_AXES - self.axes.len();
        let mut n = [1usize; MAX_AXES];
        let mut b = [1usize; MAX_AXES];
        let mut src: [Vec<usize>; MAX_AXES] = [vec![0], vec![0], vec![0]];
        let mut wgt: [Vec<Complex64>; MAX_AXES] = [vec![Complex64::new(1.0, 0.0)], vec![Complex64::new(1.0, 0.0)], vec![Complex64::new(1.0, 0.0)]];
        for (a, plan) in self.axes.iter().enumerate() {
            n[pad + a] = plan.n;
            b[pad + a] = plan.b;
            let (s, w) = plan.gather(sigmas[a]);
            src[pad + a] = s;
            wgt[pad + a] = w;
        }
        let x = segment.data();
        let mut out = vec![Complex64::default(); b.iter().product()];
        for t0 in 0..n[0] {
            let s0 = src[0][t0] * n[1] * n[2];
            let d0 = (t0 % b[0]) * b[1] * b[2];
            let w0 = wgt[0][t0];
            for t1 in 0..n[1] {
                let s01 = s0 + src[1][t1] * n[2];
                let d01 = d0 + (t1 % b[1]) * b[2];
                let w01 = w0 * wgt[1][t1];
                let row = &mut out[d01..d01 + b[2]];
                let (s2, w2) = (&src[2], &wgt[2]);
                for t2 in 0..n[2] {
                    row[t2 % b[2]] += w01 * w2[t2] * x[s01 + s2[t2]];
                }
            }
        }
        self.fft.process(&mut out)?;
        Ok(out)
    }

    /// Cells of the reduced spectrum with |f̂|² above the first-stage threshold.
    pub fn first_stage(&self, segment: &ComplexCube, sigmas: &[usize]) -> Result<ReducedMask> {
        let f = self.reduced_spectrum(segment, sigmas)?;
        let gamma = self.cfg.gamma;
        Ok(ReducedMask {
            shape: self.cfg.reduced.clone(),
            cells: f.iter().enumerate().filter(|(_, v)| v.norm_sqr() > gamma).map(|(i, _)| i).collect(),
        })
    }

    /// The `p` largest cells of the reduced spectrum (ties to lower index).
    pub fn first_stage_top(&self, segment: &ComplexCube, sigmas: &[usize], p: usize) -> Result<ReducedMask> {
        let f = self.reduced_spectrum(segment, sigmas)?;
        let mut order: Vec<usize> = (0..f.len()).collect();
        order.sort_by(|&a, &b| f[b].norm_sqr().total_cmp(&f[a].norm_sqr()).then(a.cmp(&b)));
        order.truncate(p);
        order.sort_unstable();
        Ok(ReducedMask {
            shape: self.cfg.reduced.clone(),
            cells: order,
        })
    }

    fn finish(&self, masks: Vec<ReducedMask>, sigmas: Vec<Vec<usize>>) -> Result<DetectionReport> {
        let accumulator = accumulate(&masks, &sigmas, &self.cfg.dims)?;
        let detections = second_stage(&accumulator, self.cfg.mu);
        Ok(DetectionReport {
            t: self.cfg.t,
            mu: self.cfg.mu,
            sigmas,
            first_stage_masks: masks,
            accumulator,
            detections,
        })
    }

    /// Runs the full pipeline over exactly `t` segments.
    pub fn run<I>(&self, segments: I) -> Result<DetectionReport>
    where
        I: IntoIterator<Item = ComplexCube>,
    {
        let mut masks = Vec::with_capacity(self.cfg.t);
        let mut sigmas = Vec::with_capacity(self.cfg.t);
        for (s, seg) in segments.into_iter().enumerate() {
            if s >= self.cfg.t {
                return Err(Error::param("segments", format!("more than t = {} segments", self.cfg.t)));
            }
            let sg = self.sigmas_for(s);
            masks.push(self.first_stage(&seg, &sg)?);
            sigmas.push(sg);
        }
        if masks.len() != self.cfg.t {
            return Err(Error::LengthMismatch {
                expected: self.cfg.t,
                actual: masks.len(),
            });
        }
        self.finish(masks, sigmas)
    }

    /// Like [`Rsft::run`], generating segment `s` on demand with `gen(s)`
    /// and processing segments in parallel. Segments are dropped after their
    /// first stage.
    pub fn run_generated<G>(&self, gen: G) -> Result<DetectionReport>
    where
        G: Fn(usize) -> Result<ComplexCube> + Sync,
    {
        let out: Vec<(ReducedMask, Vec<usize>)> = (0..self.cfg.t)
            .into_par_iter()
            .map(|s| {
                let seg = gen(s)?;
                let sg = self.sigmas_for(s);
                Ok((self.first_stage(&seg, &sg)?, sg))
            })
            .collect::<Result<_>>()?;
        let (masks, sigmas) = out.into_iter().unzip();
        self.finish(masks, sigmas)
    }

    /// Peak-counting variant: each segment marks its `top_first` largest
    /// cells; the `top_final` most frequent indices are reported.
    pub fn run_peak_counting<G>(&self, gen: G, top_first: usize, top_final: usize) -> Result<DetectionReport>
    where
        G: Fn(usize) -> Result<ComplexCube> + Sync,
    {
        let out: Vec<(ReducedMask, Vec<usize>)> = (0..self.cfg.t)
            .into_par_iter()
            .map(|s| {
                let seg = gen(s)?;
                let sg = self.sigmas_for(s);
                Ok((self.first_stage_top(&seg, &sg, top_first)?, sg))
            })
            .collect::<Result<_>>()?;
        let (masks, sigmas): (Vec<_>, Vec<_>) = out.into_iter().unzip();
        let accumulator = accumulate(&masks, &sigmas, &self.cfg.dims)?;
        let mut entries = accumulator.entries();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        entries.truncate(top_final);
        entries.sort_unstable();
        let detections = entries
            .into_iter()
            .map(|(i, count)| Detection {
                index: unflatten(&self.cfg.dims, i),
                count,
            })
            .collect();
        Ok(DetectionReport {
            t: self.cfg.t,
            mu: self.cfg.mu,
            sigmas,
            first_stage_masks: masks,
            accumulator,
            detections,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::{alias, map_index, permute, AliasShape, PermutationParam};
    use crate::signal::steering_vector;
    use rustfft::FftPlanner;

    fn cfg_1d(n: usize, b: usize, t: usize, gamma: f64, mu: usize) -> RsftConfig {
        RsftConfig::chebyshev(&[n], &[b], t, gamma, mu, 40.0, 40.0, 3).unwrap()
    }

    /// Reduced spectrum through the module-level primitives.
    fn oracle_1d(plan: &AxisPlan, x: &[Complex64], sigma: usize) -> Vec<Complex64> {
        let n = plan.n;
        let w: Vec<Complex64> = x.iter().zip(&plan.pre).map(|(v, &p)| v * p).collect();
        let p = PermutationParam::new(sigma, n).unwrap();
        let z: Vec<Complex64> = permute(&w, &p).unwrap().iter().zip(&plan.flat).map(|(a, f)| a * f).collect();
        let mut y = alias(&z, &AliasShape::new(n, plan.b).unwrap()).unwrap();
        FftPlanner::new().plan_fft_forward(plan.b).process(&mut y);
        y
    }

    #[test]
    fn reduced_spectrum_matches_primitives() {
        let rs = Rsft::new(cfg_1d(256, 16, 1, 1.0, 1)).unwrap();
        let x: Vec<Complex64> = (0..256).map(|i| Complex64::new((i as f64 * 0.11).sin(), (i as f64 * 0.7).cos())).collect();
        for sigma in [1, 3, 77, 255] {
            let got = rs.reduced_spectrum(&ComplexCube::from_vec(x.clone()), &[sigma]).unwrap();
            let want = oracle_1d(&rs.axes()[0], &x, sigma);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_input_marks_nothing() {
        let rs = Rsft::new(cfg_1d(1024, 64, 1, 1e-9, 1)).unwrap();
        let m = rs.first_stage(&ComplexCube::zeros(&[1024]).unwrap(), &[5]).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let rs = Rsft::new(cfg_1d(64, 8, 1, 1.0, 1)).unwrap();
        assert!(rs.first_stage(&ComplexCube::zeros(&[32]).unwrap(), &[1]).is_err());
        assert!(rs.first_stage(&ComplexCube::zeros(&[64]).unwrap(), &[2]).is_err());
    }

    #[test]
    fn accumulate_example() {
        let mask = ReducedMask { shape: vec![4], cells: vec![3] };
        // sigma = 3 has inverse 3 modulo 8.
        let acc = accumulate(&[mask], &[vec![3]], &[8]).unwrap();
        assert_eq!(acc.entries(), vec![(2, 1), (5, 1)]);
        let acc = accumulate(&[], &[], &[8]).unwrap();
        assert!(acc.is_empty());
    }

    #[test]
    fn second_stage_thresholds() {
        let mut acc = OccurrenceMap::new(&[8]);
        for (i, c) in [(1usize, 3u32), (4, 1), (6, 2)] {
            for _ in 0..c {
                acc.increment(i);
            }
        }
        assert_eq!(second_stage(&acc, 4), vec![]);
        assert_eq!(second_stage(&acc, 1).len(), 3);
        let d = second_stage(&acc, 2);
        assert_eq!(d.iter().map(|d| d.index[0]).collect::<Vec<_>>(), vec![1, 6]);
    }

    #[test]
    fn sparse_and_dense_accumulators_agree() {
        let dims = [2048, 1024];
        let mut sparse = OccurrenceMap::new(&dims);
        assert!(matches!(sparse.counts, Counts::Sparse(_)));
        let mut dense = OccurrenceMap::new(&[8, 8]);
        let mask = ReducedMask { shape: vec![4, 4], cells: vec![1, 6] };
        dense.add_mask(&mask, &[3, 5]).unwrap();
        sparse.add_mask(&ReducedMask { shape: vec![1024, 512], cells: vec![7] }, &[3, 5]).unwrap();
        assert_eq!(dense.entries().len(), 8);
        assert_eq!(sparse.entries().len(), 4);
        let mut m = dense.clone();
        m.merge(&dense);
        assert!(m.entries().iter().all(|e| e.1 == 2));
    }

    #[test]
    fn on_grid_sinusoid_marks_its_bucket() {
        let (n, b) = (1024, 64);
        let rs = Rsft::new(cfg_1d(n, b, 1, 1.0, 1)).unwrap();
        let k = 200;
        let x = steering_vector(std::f64::consts::TAU * k as f64 / n as f64, n);
        for sigma in [1usize, 3, 511, 1023] {
            let f = rs.reduced_spectrum(&ComplexCube::from_vec(x.clone()), &[sigma]).unwrap();
            let p = map_index(k, sigma, n, b);
            let mut pw: Vec<(usize, f64)> = f.iter().map(|v| v.norm_sqr()).enumerate().collect();
            pw.sort_by(|a, b| b.1.total_cmp(&a.1));
            assert_eq!(pw[0].0, p);
            let rs2 = Rsft::new(cfg_1d(n, b, 1, pw[0].1 * 0.999, 1)).unwrap();
            let m = rs2.first_stage(&ComplexCube::from_vec(x.clone()), &[sigma]).unwrap();
            assert_eq!(m.cells, vec![p]);
        }
    }

    #[test]
    fn scaling_input_scales_power() {
        let rs = Rsft::new(cfg_1d(256, 16, 1, 1.0, 1)).unwrap();
        let x: Vec<Complex64> = (0..256).map(|i| Complex64::new((i as f64).cos(), 0.2)).collect();
        let c = Complex64::new(0.3, -2.0);
        let y: Vec<Complex64> = x.iter().map(|v| v * c).collect();
        let fx = rs.reduced_spectrum(&ComplexCube::from_vec(x), &[9]).unwrap();
        let fy = rs.reduced_spectrum(&ComplexCube::from_vec(y), &[9]).unwrap();
        for (a, b) in fx.iter().zip(&fy) {
            assert!((a.norm_sqr() * c.norm_sqr() - b.norm_sqr()).abs() < 1e-10 * (1.0 + b.norm_sqr()));
        }
    }

    #[test]
    fn separable_2d_marks_product_of_1d() {
        let (nx, ny, bx, by) = (64, 128, 8, 16);
        let kx = 10.0;
        let ky = 77.0;
        let vx = steering_vector(std::f64::consts::TAU * kx / nx as f64, nx);
        let vy = steering_vector(std::f64::consts::TAU * ky / ny as f64, ny);
        let data: Vec<Complex64> = vx.iter().flat_map(|a| vy.iter().map(move |b| a * b)).collect();
        let cube = ComplexCube::new(&[nx, ny], data).unwrap();
        let rs = Rsft::new(RsftConfig::chebyshev(&[nx, ny], &[bx, by], 1, 1.0, 1, 40.0, 40.0, 0).unwrap()).unwrap();
        let sig = [5usize, 37];
        let f = rs.reduced_spectrum(&cube, &sig).unwrap();
        let px = rs.axes()[0].fold(&vx, sig[0]).unwrap();
        let py = rs.axes()[1].fold(&vy, sig[1]).unwrap();
        let mut planner = FftPlanner::new();
        let (mut fx, mut fy) = (px, py);
        planner.plan_fft_forward(bx).process(&mut fx);
        planner.plan_fft_forward(by).process(&mut fy);
        for i in 0..bx {
            for j in 0..by {
                assert!((f[i * by + j] - fx[i] * fy[j]).norm() < 1e-10);
            }
        }
        // Threshold between the top product and the rest marks one cell.
        let mut p: Vec<f64> = f.iter().map(|v| v.norm_sqr()).collect();
        p.sort_by(|a, b| b.total_cmp(a));
        let mut c = rs.config().clone();
        c.gamma = 0.5 * (p[0] + p[1]);
        let m = Rsft::new(c).unwrap().first_stage(&cube, &sig).unwrap();
        let gx = map_index(10, sig[0], nx, bx);
        let gy = map_index(77, sig[1], ny, by);
        assert_eq!(m.cells, vec![gx * by + gy]);
    }

    #[test]
    fn parallel_and_sequential_runs_agree() {
        let n = 256;
        let cfg = cfg_1d(n, 16, 6, 0.05, 4);
        let rs = Rsft::new(cfg).unwrap();
        let sc = crate::signal::SignalConfig {
            n,
            t: 6,
            noise_var: 1.0,
            sinusoids: vec![crate::signal::SinusoidSpec::at_bin(40.0, n, 2.0)],
            seed: 1,
        };
        let segs: Vec<ComplexCube> = (0..6).map(|s| ComplexCube::from_vec(sc.segment(s).unwrap())).collect();
        let a = rs.run(segs.clone()).unwrap();
        let b = rs.run_generated(|s| Ok(segs[s].clone())).unwrap();
        assert_eq!(a, b);
        assert!(rs.run(segs[..5].to_vec()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(RsftConfig::chebyshev(&[64], &[8], 10, 1.0, 11, 40.0, 40.0, 0).is_err());
        assert!(RsftConfig::chebyshev(&[64], &[8], 10, 0.0, 1, 40.0, 40.0, 0).is_err());
        assert!(RsftConfig::chebyshev(&[64], &[128], 10, 1.0, 1, 40.0, 40.0, 0).is_err());
        assert!(RsftConfig::chebyshev(&[64, 8], &[8], 10, 1.0, 1, 40.0, 40.0, 0).is_err());
    }
}
