//! Experiment configuration. Every section is optional; missing fields
//! take the defaults below, which reproduce the reference parameter set.

use std::path::PathBuf;

use rsft::optimizer::EtaP;
use rsft::radar::{reference_targets, RadarParams, Target};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    #[serde(alias = "rsft-run")]
    Run,
    Optimize,
    Roc,
    Complexity,
    FreqSweep,
    VarianceCheck,
    Bartlett,
    RadarSim,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Run => "run",
            Kind::Optimize => "optimize",
            Kind::Roc => "roc",
            Kind::Complexity => "complexity",
            Kind::FreqSweep => "freq-sweep",
            Kind::VarianceCheck => "variance-check",
            Kind::Bartlett => "bartlett",
            Kind::RadarSim => "radar-sim",
        }
    }
}

/// `eta_p` in a config file: a number ≥ 1 or `"inverse"` for `1/P̄_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaPValue {
    Value(f64),
    Named(String),
}

impl EtaPValue {
    pub fn resolve(&self, field: &str) -> Result<EtaP, String> {
        match self {
            EtaPValue::Value(v) if *v >= 1.0 && v.is_finite() => Ok(EtaP::Fixed(*v)),
            EtaPValue::Value(v) => Err(format!("{field}: {v} is below 1")),
            EtaPValue::Named(s) if s == "inverse" => Ok(EtaP::InverseDetection),
            EtaPValue::Named(s) => Err(format!("{field}: expected a number >= 1 or \"inverse\", got \"{s}\"")),
        }
    }

    pub fn label(&self) -> String {
        match self {
            EtaPValue::Value(v) => format!("{v}"),
            EtaPValue::Named(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSection {
    pub n: usize,
    pub b: usize,
    pub t: usize,
    pub k: usize,
    pub eta_m: f64,
    /// Use the measured 6 dB width of the pre-window instead of `eta_m`.
    pub measure_eta_m: bool,
    pub eta_p: EtaPValue,
    pub pd: f64,
    pub pfa: f64,
    /// Design frequency in (fractional) bins.
    pub omega_bins: f64,
    pub pre_db: f64,
    pub flat_db: f64,
    pub noise_var: f64,
    /// Dilations sampled for the gain averages; 0 means all of them.
    pub sigma_samples: usize,
}

impl Default for DesignSection {
    fn default() -> Self {
        Self {
            n: 1024,
            b: 64,
            t: 50,
            k: 4,
            eta_m: 1.8,
            measure_eta_m: false,
            eta_p: EtaPValue::Value(1.0),
            pd: 0.9,
            pfa: 1e-6,
            omega_bins: 64.5,
            pre_db: 40.0,
            flat_db: 40.0,
            noise_var: 1.0,
            sigma_samples: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinusoidEntry {
    pub bin: f64,
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalSection {
    pub sinusoids: Vec<SinusoidEntry>,
    /// Fixed thresholds; the optimizer's are used when absent.
    pub gamma: Option<f64>,
    pub mu: Option<usize>,
}

impl Default for SignalSection {
    fn default() -> Self {
        Self {
            sinusoids: vec![SinusoidEntry { bin: 64.5, snr_db: -10.0 }],
            gamma: None,
            mu: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RocSection {
    pub snr_db: f64,
    pub pfa_min: f64,
    pub pfa_max: f64,
    pub points: usize,
    pub b_values: Vec<usize>,
    pub k_values: Vec<usize>,
    pub eta_p_values: Vec<EtaPValue>,
    pub bartlett: bool,
}

impl Default for RocSection {
    fn default() -> Self {
        Self {
            snr_db: -12.0,
            pfa_min: 1e-8,
            pfa_max: 1e-2,
            points: 13,
            b_values: vec![32, 64, 128, 256],
            k_values: vec![1, 4, 8, 16],
            eta_p_values: vec![EtaPValue::Value(1.0), EtaPValue::Value(1.25), EtaPValue::Named("inverse".into())],
            bartlett: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexitySection {
    pub eta_m: f64,
    pub eta_p: f64,
    pub b_values: Vec<usize>,
    pub k_values: Vec<usize>,
    /// Also report SNR_min* of every feasible (K, B) at the half-bin frequency.
    pub with_snr: bool,
}

impl Default for ComplexitySection {
    fn default() -> Self {
        Self {
            eta_m: 1.4,
            eta_p: 1.0,
            b_values: (3..=10).map(|e| 1 << e).collect(),
            k_values: vec![5, 10, 50, 100],
            with_snr: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub from_bin: f64,
    pub to_bin: f64,
    pub steps: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            from_bin: 64.0,
            to_bin: 65.0,
            steps: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceSection {
    pub t_values: Vec<usize>,
    pub runs: usize,
}

impl Default for VarianceSection {
    fn default() -> Self {
        Self {
            t_values: vec![10, 50, 100, 200],
            runs: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadarScale {
    Desk,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarSection {
    pub scale: RadarScale,
    /// Scene targets; the four reference targets when absent.
    pub targets: Option<Vec<Target>>,
    /// Reference targets at equal SNR (otherwise the mixed-SNR set).
    pub equal_snr: bool,
    pub reduced: [usize; 3],
    pub t: usize,
    pub k: usize,
    pub pd: f64,
    pub pfa: f64,
    pub eta_p: EtaPValue,
    pub pre_db: f64,
    pub flat_db: f64,
    /// Periodogram path for comparison.
    pub conventional: bool,
    pub conventional_db: f64,
    /// `[top_first, top_final]` for the peak-counting comparison.
    pub peak_counting: Option<[usize; 2]>,
}

impl Default for RadarSection {
    fn default() -> Self {
        Self {
            scale: RadarScale::Desk,
            targets: None,
            equal_snr: true,
            reduced: [64, 8, 4],
            t: 10,
            k: 4,
            pd: 0.9,
            pfa: 1e-7,
            eta_p: EtaPValue::Value(1.0),
            pre_db: 60.0,
            flat_db: 60.0,
            conventional: true,
            conventional_db: 60.0,
            peak_counting: None,
        }
    }
}

impl RadarSection {
    pub fn params(&self) -> RadarParams {
        match self.scale {
            RadarScale::Desk => RadarParams::desk_scale(),
            RadarScale::Full => RadarParams::full_scale(),
        }
    }

    pub fn scene_targets(&self) -> Vec<Target> {
        self.targets.clone().unwrap_or_else(|| reference_targets(self.equal_snr))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Kind>,
    pub seed: u64,
    /// Excluded from the config hash.
    pub out_dir: Option<PathBuf>,
    pub design: DesignSection,
    pub signal: SignalSection,
    pub roc: RocSection,
    pub complexity: ComplexitySection,
    pub sweep: SweepSection,
    pub variance: VarianceSection,
    pub radar: RadarSection,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical TOML form, output directory excluded.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut c = self.clone();
        c.out_dir = None;
        let text = toml::to_string(&c).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Field-level checks for the sections `kind` reads.
    pub fn validate(&self, kind: Kind) -> Result<(), CliError> {
        let mut errs = Vec::new();
        fn check(errs: &mut Vec<String>, ok: bool, msg: String) {
            if !ok {
                errs.push(msg);
            }
        }
        let d = &self.design;
        let prob = |v: f64| v > 0.0 && v < 1.0;
        if kind != Kind::RadarSim {
            check(&mut errs, d.n.is_power_of_two() && d.n >= 8, format!("design.n: {} is not a power of two >= 8", d.n));
            check(
                &mut errs,
                d.b.is_power_of_two() && d.b <= d.n,
                format!("design.b: {} is not a power of two <= design.n", d.b),
            );
            check(&mut errs, d.t >= 1, "design.t: at least one segment required".into());
            check(&mut errs, d.eta_m > 0.0, format!("design.eta_m: {} is not positive", d.eta_m));
            check(&mut errs, prob(d.pd), format!("design.pd: {} outside (0, 1)", d.pd));
            check(&mut errs, prob(d.pfa) && d.pfa < d.pd, format!("design.pfa: {} outside (0, design.pd)", d.pfa));
            check(&mut errs, d.pre_db >= 20.0, format!("design.pre_db: {} below 20 dB", d.pre_db));
            check(&mut errs, d.flat_db >= 20.0, format!("design.flat_db: {} below 20 dB", d.flat_db));
            check(&mut errs, d.noise_var > 0.0, format!("design.noise_var: {} is not positive", d.noise_var));
            check(
                &mut errs,
                (0.0..d.n as f64).contains(&d.omega_bins),
                format!("design.omega_bins: {} outside [0, design.n)", d.omega_bins),
            );
            if let Err(e) = d.eta_p.resolve("design.eta_p") {
                errs.push(e);
            }
        }
        match kind {
            Kind::Run | Kind::Bartlett => {
                let s = &self.signal;
                check(&mut errs, !s.sinusoids.is_empty(), "signal.sinusoids: at least one sinusoid required".into());
                for (i, e) in s.sinusoids.iter().enumerate() {
                    check(
                        &mut errs,
                        (0.0..d.n as f64).contains(&e.bin),
                        format!("signal.sinusoids[{i}].bin: {} outside [0, design.n)", e.bin),
                    );
                    check(&mut errs, e.snr_db.is_finite(), format!("signal.sinusoids[{i}].snr_db: not finite"));
                }
                if let Some(g) = s.gamma {
                    check(&mut errs, g > 0.0 && g.is_finite(), format!("signal.gamma: {g} is not positive"));
                }
                if let Some(m) = s.mu {
                    check(&mut errs, m >= 1 && m <= d.t, format!("signal.mu: {m} outside [1, design.t]"));
                }
                check(
                    &mut errs,
                    s.gamma.is_some() == s.mu.is_some(),
                    "signal.gamma / signal.mu: give both or neither".into(),
                );
            }
            Kind::Roc => {
                let r = &self.roc;
                check(&mut errs, prob(r.pfa_min), format!("roc.pfa_min: {} outside (0, 1)", r.pfa_min));
                check(
                    &mut errs,
                    prob(r.pfa_max) && r.pfa_max > r.pfa_min,
                    format!("roc.pfa_max: {} outside (roc.pfa_min, 1)", r.pfa_max),
                );
                check(&mut errs, r.points >= 2, "roc.points: at least 2 required".into());
                check(&mut errs, r.snr_db.is_finite(), "roc.snr_db: not finite".into());
                for &b in &r.b_values {
                    check(&mut errs, b.is_power_of_two() && b <= d.n, format!("roc.b_values: {b} is not a power of two <= design.n"));
                }
                for (i, e) in r.eta_p_values.iter().enumerate() {
                    if let Err(m) = e.resolve(&format!("roc.eta_p_values[{i}]")) {
                        errs.push(m);
                    }
                }
            }
            Kind::Complexity => {
                let c = &self.complexity;
                check(&mut errs, c.eta_m > 0.0, format!("complexity.eta_m: {} is not positive", c.eta_m));
                check(&mut errs, c.eta_p >= 1.0, format!("complexity.eta_p: {} is below 1", c.eta_p));
                check(&mut errs, !c.b_values.is_empty(), "complexity.b_values: empty".into());
                for &b in &c.b_values {
                    check(
                        &mut errs,
                        b.is_power_of_two() && b >= 2 && b <= d.n,
                        format!("complexity.b_values: {b} is not a power of two in [2, design.n]"),
                    );
                }
            }
            Kind::FreqSweep => {
                let s = &self.sweep;
                check(&mut errs, s.steps >= 2, "sweep.steps: at least 2 required".into());
                check(
                    &mut errs,
                    s.from_bin >= 0.0 && s.to_bin > s.from_bin && s.to_bin < d.n as f64,
                    format!("sweep.to_bin: need 0 <= from_bin < to_bin < design.n, got {} .. {}", s.from_bin, s.to_bin),
                );
            }
            Kind::VarianceCheck => {
                let v = &self.variance;
                check(&mut errs, v.runs >= 1, "variance.runs: at least 1 required".into());
                check(
                    &mut errs,
                    !v.t_values.is_empty() && !v.t_values.contains(&0),
                    "variance.t_values: need positive lengths".into(),
                );
                check(&mut errs, d.sigma_samples == 0, "design.sigma_samples: variance-check needs exhaustive averaging (0)".into());
            }
            Kind::RadarSim => {
                let r = &self.radar;
                let p = r.params();
                for (a, (&b, n)) in r.reduced.iter().zip(p.shape()).enumerate() {
                    check(
                        &mut errs,
                        b.is_power_of_two() && b <= n,
                        format!("radar.reduced[{a}]: {b} is not a power of two <= {n}"),
                    );
                }
                check(&mut errs, r.t >= 1, "radar.t: at least one burst required".into());
                check(&mut errs, prob(r.pd), format!("radar.pd: {} outside (0, 1)", r.pd));
                check(&mut errs, prob(r.pfa) && r.pfa < r.pd, format!("radar.pfa: {} outside (0, radar.pd)", r.pfa));
                for (f, v) in [("pre_db", r.pre_db), ("flat_db", r.flat_db), ("conventional_db", r.conventional_db)] {
                    check(&mut errs, v >= 20.0, format!("radar.{f}: {v} below 20 dB"));
                }
                if let Err(e) = r.eta_p.resolve("radar.eta_p") {
                    errs.push(e);
                }
                for (i, t) in r.scene_targets().iter().enumerate() {
                    if let Err(e) = t.validate(&p) {
                        errs.push(format!("radar.targets[{i}].{e}"));
                    }
                }
                if let Some([a, b]) = r.peak_counting {
                    check(&mut errs, a >= 1 && b >= 1, "radar.peak_counting: both counts must be >= 1".into());
                }
            }
            Kind::Optimize => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(errs.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = ExperimentConfig::parse("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        for k in [Kind::Run, Kind::Optimize, Kind::Roc, Kind::Complexity, Kind::FreqSweep, Kind::VarianceCheck, Kind::Bartlett, Kind::RadarSim] {
            c.validate(k).unwrap();
        }
    }

    #[test]
    fn eta_p_forms() {
        let c = ExperimentConfig::parse("[design]\neta_p = \"inverse\"\n").unwrap();
        assert_eq!(c.design.eta_p.resolve("x").unwrap(), EtaP::InverseDetection);
        let c = ExperimentConfig::parse("[design]\neta_p = 1.5\n").unwrap();
        assert_eq!(c.design.eta_p.resolve("x").unwrap(), EtaP::Fixed(1.5));
        let c = ExperimentConfig::parse("[design]\neta_p = 0.5\n").unwrap();
        assert!(c.validate(Kind::Optimize).is_err());
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(ExperimentConfig::parse("[design]\nbee = 3\n").is_err());
    }

    #[test]
    fn field_errors_name_the_field() {
        let c = ExperimentConfig::parse("[design]\nb = 48\npd = 1.5\n").unwrap();
        let msg = c.validate(Kind::Optimize).unwrap_err().to_string();
        assert!(msg.contains("design.b") && msg.contains("design.pd"), "{msg}");
    }

    #[test]
    fn hash_ignores_out_dir_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.out_dir = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 7;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn kind_names_round_trip() {
        let c = ExperimentConfig::parse("experiment = \"rsft-run\"\n").unwrap();
        assert_eq!(c.experiment, Some(Kind::Run));
        let c = ExperimentConfig::parse("experiment = \"freq-sweep\"\n").unwrap();
        assert_eq!(c.experiment.unwrap().name(), "freq-sweep");
    }
}
