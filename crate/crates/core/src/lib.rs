//! Sparse Fourier transform with pre-permutation windowing and two-stage
//! Neyman-Pearson detection.
//!
//! ```text
//!  segment r_s ──► w ∘ r ──► permute(σ_s) ──► w̄ ∘ · ──► alias N→B ──► FFT_B
//!                                                                     │
//!                                             |f̂|² > γ  (first stage) ◄┘
//!                                                   │
//!          reverse-map, accumulate over T segments ◄┘
//!                                                   │
//!                          ā_i ≥ μ  (second stage) ◄┘
//! ```
//!
//! Modules:
//! - [`signal`]: multi-sinusoid segments with per-segment random amplitudes.
//! - [`window`]: Dolph-Chebyshev and flat windows, 6 dB bandwidth.
//! - [`modular`]: permutation, aliasing, mapping and reverse mapping.
//! - [`pipeline`]: the N-D detection pipeline.
//! - [`optimizer`]: first/second stage statistics, threshold design, complexity.
//! - [`bartlett`]: averaged periodogram baseline.
//! - [`radar`]: LFMCW data cube synthesis and processing.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bartlett;
pub mod error;
pub mod modular;
pub mod optimizer;
pub mod pipeline;
pub mod radar;
pub mod rng;
pub mod signal;
pub mod special;
pub mod tensor;
pub mod window;

pub use error::{Error, Result};
pub use tensor::{ComplexCube, RealTensor, Tensor};

pub use num_complex::Complex64;
