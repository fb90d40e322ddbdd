//! Detection statistics, threshold design and operation counts.
//!
//! First stage: under a fixed dilation σ a reduced cell holding noise only
//! has `|f̂|² ~ Exp(σ_n² β(σ))`, and the cell holding a sinusoid of
//! variance `σ_b²` has `|f̂|² ~ Exp(σ_b² α(σ) + σ_n² β(σ))`. Averaging the
//! gains over σ gives the marking rates `P̄_fa` and `P̄_d`.
//!
//! Second stage: occurrence counts over T segments are approximated by
//! normals whose parameters depend on `P̄_fa`, `P̄_d` and the expected
//! number of segments `F = T K η_m / B` in which an index shares its bucket
//! with another sinusoid.

pub mod complexity;
pub mod design;
pub mod stats;

pub use complexity::{
    bartlett_cost, bartlett_cost_asymptotic, rsft_cost, rsft_cost_asymptotic, BartlettCost, RsftCost,
};
pub use design::{
    mu_table, optimize, rsft_roc, stage2_dists, DesignParams, EtaP, MuCandidate, OperatingPoint, SecondStageDists,
};
pub use stats::{
    average_alpha_beta, averaged_rates, compute_alpha_beta, per_sigma_rates, stage1_roc, variance_gap, AveragingMode, SigmaStats,
    StageOneStats, VarianceGap,
};
