//! Dense row-major arrays of 1 to 3 axes and an N-D FFT over them.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const MAX_AXES: usize = 3;

/// Dense row-major array; the last axis is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

pub type ComplexCube = Tensor<Complex64>;
pub type RealTensor = Tensor<f64>;

impl<T: Clone + Default> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Result<Self> {
        check_shape(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![T::default(); shape.iter().product()],
        })
    }
}

impl<T> Tensor<T> {
    pub fn new(shape: &[usize], data: Vec<T>) -> Result<Self> {
        check_shape(shape)?;
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: data.len(),
            });
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    /// One-dimensional tensor owning `data`.
    pub fn from_vec(data: Vec<T>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> Option<&T> {
        self.flat_index(index).map(|i| &self.data[i])
    }

    pub fn flat_index(&self, index: &[usize]) -> Option<usize> {
        flat_index(&self.shape, index)
    }
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.len() > MAX_AXES {
        return Err(Error::param("shape", format!("1 to {MAX_AXES} axes required, got {}", shape.len())));
    }
    if shape.contains(&0) {
        return Err(Error::param("shape", "axes must be non-empty"));
    }
    Ok(())
}

/// Row-major flat offset of `index` in `shape`, or `None` when out of range.
pub fn flat_index(shape: &[usize], index: &[usize]) -> Option<usize> {
    if index.len() != shape.len() {
        return None;
    }
    let mut flat = 0;
    for (&i, &n) in index.iter().zip(shape) {
        if i >= n {
            return None;
        }
        flat = flat * n + i;
    }
    Some(flat)
}

/// Inverse of [`flat_index`].
pub fn unflatten(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut index = vec![0; shape.len()];
    for d in (0..shape.len()).rev() {
        index[d] = flat % shape[d];
        flat /= shape[d];
    }
    index
}

/// Outer product of per-axis real sequences.
pub fn outer_product(per_axis: &[&[f64]]) -> Result<RealTensor> {
    let shape: Vec<usize> = per_axis.iter().map(|w| w.len()).collect();
    check_shape(&shape)?;
    let mut data = vec![1.0; shape.iter().product()];
    let mut stride = data.len();
    for w in per_axis {
        let n = w.len();
        stride /= n;
        for (flat, v) in data.iter_mut().enumerate() {
            *v *= w[(flat / stride) % n];
        }
    }
    Tensor::new(&shape, data)
}

/// Unnormalized forward FFT along every axis of a fixed shape.
#[derive(Clone)]
pub struct NdFft {
    shape: Vec<usize>,
    plans: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("shape", &self.shape).finish()
    }
}

impl NdFft {
    pub fn forward(shape: &[usize]) -> Result<Self> {
        check_shape(shape)?;
        let mut planner = FftPlanner::new();
        let plans = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        Ok(Self {
            shape: shape.to_vec(),
            plans,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Transforms `data` (row-major, this plan's shape) in place.
    pub fn process(&self, data: &mut [Complex64]) -> Result<()> {
        if data.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: data.len(),
            });
        }
        let ndim = self.shape.len();
        let mut stride = 1;
        let mut line = Vec::new();
        for d in (0..ndim).rev() {
            let n = self.shape[d];
            let plan = &self.plans[d];
            if n > 1 {
                if stride == 1 {
                    plan.process(data);
                } else {
                    line.resize(n, Complex64::default());
                    let block = n * stride;
                    for outer in (0..data.len()).step_by(block) {
                        for inner in 0..stride {
                            let base = outer + inner;
                            for (k, v) in line.iter_mut().enumerate() {
                                *v = data[base + k * stride];
                            }
                            plan.process(&mut line);
                            for (k, v) in line.iter().enumerate() {
                                data[base + k * stride] = *v;
                            }
                        }
                    }
                }
            }
            stride *= n;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft_2d(x: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); rows * cols];
        for k0 in 0..rows {
            for k1 in 0..cols {
                let mut acc = Complex64::default();
                for t0 in 0..rows {
                    for t1 in 0..cols {
                        let ph = -2.0 * PI * ((k0 * t0) as f64 / rows as f64 + (k1 * t1) as f64 / cols as f64);
                        acc += x[t0 * cols + t1] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[k0 * cols + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn nd_fft_matches_naive_2d() {
        let (rows, cols) = (4, 8);
        let x: Vec<Complex64> = (0..rows * cols)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut y = x.clone();
        NdFft::forward(&[rows, cols]).unwrap().process(&mut y).unwrap();
        let z = naive_dft_2d(&x, rows, cols);
        for (a, b) in y.iter().zip(&z) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn nd_fft_of_3d_impulse_is_flat() {
        let shape = [2, 4, 8];
        let mut x = vec![Complex64::default(); 64];
        x[0] = Complex64::new(1.0, 0.0);
        NdFft::forward(&shape).unwrap().process(&mut x).unwrap();
        assert!(x.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn flat_index_roundtrip() {
        let shape = [3, 5, 7];
        for flat in 0..105 {
            let idx = unflatten(&shape, flat);
            assert_eq!(flat_index(&shape, &idx), Some(flat));
        }
        assert_eq!(flat_index(&shape, &[3, 0, 0]), None);
    }

    #[test]
    fn outer_product_of_ones() {
        let t = outer_product(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert_eq!(t.shape(), &[2, 2]);
        assert!(t.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ComplexCube::zeros(&[]).is_err());
        assert!(ComplexCube::zeros(&[2, 2, 2, 2]).is_err());
        assert!(ComplexCube::new(&[2, 3], vec![Complex64::default(); 5]).is_err());
    }
}
