//! One function per subcommand. Each computes every table in memory so a
//! failure leaves no partial output behind.

use std::f64::consts::TAU;

use rsft::bartlett::{bartlett_roc, bartlett_run_generated, bartlett_snr_min, bartlett_threshold, BartlettStats};
use rsft::modular::nearest_bin;
use rsft::optimizer::{
    average_alpha_beta, bartlett_cost, bartlett_cost_asymptotic, mu_table, optimize, rsft_cost, rsft_cost_asymptotic,
    rsft_roc, variance_gap, AveragingMode, DesignParams, EtaP, OperatingPoint, StageOneStats,
};
use rsft::pipeline::{AxisPlan, Rsft, RsftConfig};
use rsft::radar::{
    design_rsft, expected_bins, process_conventional, process_rsft, process_sft_peak_counting, score_reconstruction,
    RsftDesignSpec, Scene,
};
use rsft::signal::{gen_segment, SignalConfig, SinusoidSpec};
use rsft::window::{dolph_chebyshev, unit_energy};
use rsft::{ComplexCube, RealTensor};

use crate::config::{DesignSection, ExperimentConfig, Kind};
use crate::error::CliError;
use crate::output::{num, Table};

pub struct Outcome {
    pub tables: Vec<Table>,
    /// Lines for stdout.
    pub summary: Vec<String>,
}

pub fn run(kind: Kind, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match kind {
        Kind::Run => rsft_run(cfg),
        Kind::Optimize => optimize_exp(cfg),
        Kind::Roc => roc(cfg),
        Kind::Complexity => complexity(cfg),
        Kind::FreqSweep => freq_sweep(cfg),
        Kind::VarianceCheck => variance_check(cfg),
        Kind::Bartlett => bartlett(cfg),
        Kind::RadarSim => radar_sim(cfg),
    }
}

fn db(v: f64) -> f64 {
    10.0 * v.log10()
}

fn eta_m(d: &DesignSection) -> Result<f64, CliError> {
    if d.measure_eta_m {
        Ok(dolph_chebyshev(d.n, d.pre_db)?.eta_m)
    } else {
        Ok(d.eta_m)
    }
}

fn stats(d: &DesignSection, b: usize, omega_bins: f64, seed: u64) -> Result<StageOneStats, CliError> {
    let plan = AxisPlan::chebyshev(d.n, b, d.pre_db, d.flat_db)?;
    let mode = match d.sigma_samples {
        0 => AveragingMode::Exhaustive,
        count => AveragingMode::Sampled { count, seed },
    };
    Ok(average_alpha_beta(TAU * omega_bins / d.n as f64, &plan, mode)?)
}

fn params(d: &DesignSection, b: usize, k: usize, eta_m: f64, eta_p: EtaP) -> DesignParams {
    DesignParams {
        pd: d.pd,
        pfa: d.pfa,
        t: d.t,
        k,
        eta_m,
        eta_p,
        b,
        noise_var: d.noise_var,
    }
}

fn base(cfg: &ExperimentConfig) -> Result<(DesignParams, StageOneStats), CliError> {
    let d = &cfg.design;
    let eta_p = d.eta_p.resolve("design.eta_p").map_err(CliError::Config)?;
    let p = params(d, d.b, d.k, eta_m(d)?, eta_p);
    p.validate()?;
    Ok((p, stats(d, d.b, d.omega_bins, cfg.seed)?))
}

fn op_row(t: &mut Table, op: &OperatingPoint, p: &DesignParams, s: &StageOneStats) {
    t.push(vec![
        num(op.snr_min_db),
        num(op.gamma),
        op.mu.to_string(),
        num(op.mu as f64 / p.t as f64),
        num(op.pfa_bar),
        num(op.pd_bar),
        num(op.eta_p),
        num(s.alpha_bar),
        num(s.beta_bar),
    ]);
}

const OP_COLUMNS: [&str; 9] = ["snr_min_db", "gamma", "mu", "mu_over_t", "pfa_bar", "pd_bar", "eta_p", "alpha_bar", "beta_bar"];

fn optimize_exp(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (p, s) = base(cfg)?;
    let op = optimize(&p, &s)?;
    let mut table = Table::new("mu_table", &["mu", "feasible", "snr_min_db", "pfa_bar", "pd_bar", "eta_p"]);
    for (i, c) in mu_table(&p, &s)?.iter().enumerate() {
        match c {
            Some(c) => table.push(vec![
                c.mu.to_string(),
                "true".into(),
                num(db(c.snr_min)),
                num(c.pfa_bar),
                num(c.pd_bar),
                num(c.eta_p),
            ]),
            None => table.push(vec![(i + 1).to_string(), "false".into(), String::new(), String::new(), String::new(), String::new()]),
        }
    }
    let mut point = Table::new("operating_point", &OP_COLUMNS);
    op_row(&mut point, &op, &p, &s);
    Ok(Outcome {
        tables: vec![point, table],
        summary: vec![format!(
            "SNR_min* = {:.3} dB, gamma* = {:.4e}, mu* = {}/{}",
            op.snr_min_db, op.gamma, op.mu, p.t
        )],
    })
}

fn signal(cfg: &ExperimentConfig) -> SignalConfig {
    let d = &cfg.design;
    SignalConfig {
        n: d.n,
        t: d.t,
        noise_var: d.noise_var,
        sinusoids: cfg
            .signal
            .sinusoids
            .iter()
            .map(|e| SinusoidSpec::at_bin(e.bin, d.n, d.noise_var * 10f64.powf(e.snr_db / 10.0)))
            .collect(),
        seed: cfg.seed,
    }
}

fn sinusoid_table(cfg: &ExperimentConfig, detected: impl Fn(usize) -> bool) -> Table {
    let n = cfg.design.n;
    let mut t = Table::new("sinusoids", &["bin", "snr_db", "nearest_index", "detected"]);
    for e in &cfg.signal.sinusoids {
        let k = nearest_bin(TAU * e.bin / n as f64, n);
        t.push(vec![num(e.bin), num(e.snr_db), k.to_string(), detected(k).to_string()]);
    }
    t
}

fn rsft_run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let d = &cfg.design;
    let sig = signal(cfg);
    sig.validate()?;
    let (gamma, mu, note) = match (cfg.signal.gamma, cfg.signal.mu) {
        (Some(g), Some(m)) => (g, m, "fixed thresholds".to_string()),
        _ => {
            let (p, s) = base(cfg)?;
            let op = optimize(&p, &s)?;
            (op.gamma, op.mu, format!("optimizer thresholds, SNR_min* = {:.3} dB", op.snr_min_db))
        }
    };
    let rc = RsftConfig::chebyshev(&[d.n], &[d.b], d.t, gamma, mu, d.pre_db, d.flat_db, cfg.seed)?;
    let rep = Rsft::new(rc)?.run_generated(|s| Ok(ComplexCube::from_vec(gen_segment(&sig, s)?)))?;
    let mut acc = Table::new("accumulator", &["index", "count"]);
    for (i, c) in rep.accumulator.entries() {
        acc.push(vec![i.to_string(), c.to_string()]);
    }
    let mut det = Table::new("detections", &["index", "count"]);
    for x in &rep.detections {
        det.push(vec![x.index[0].to_string(), x.count.to_string()]);
    }
    let sins = sinusoid_table(cfg, |k| rep.detected(&[k]));
    let mut summary = vec![format!("gamma = {gamma:.4e}, mu = {mu}/{} ({note})", d.t)];
    summary.push(format!("{} detections", rep.detections.len()));
    for w in sig.check_resolvability(eta_m(d)?) {
        summary.push(format!(
            "warning: sinusoids {} and {} are {:.2} bins apart, below eta_m = {:.2}",
            w.first, w.second, w.spacing_bins, w.required_bins
        ));
    }
    Ok(Outcome {
        tables: vec![det, sins, acc],
        summary,
    })
}

fn bartlett(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let d = &cfg.design;
    let sig = signal(cfg);
    sig.validate()?;
    let w = unit_energy(&dolph_chebyshev(d.n, d.pre_db)?.coeffs);
    let st = BartlettStats::for_window(TAU * d.omega_bins / d.n as f64, &w, d.t);
    let threshold = bartlett_threshold(d.noise_var, &st, d.pfa);
    let out = bartlett_run_generated(
        d.t,
        |s| Ok(ComplexCube::from_vec(gen_segment(&sig, s)?)),
        &RealTensor::from_vec(w),
        threshold,
    )?;
    let mut spec = Table::new("spectrum", &["index", "power"]);
    for (i, v) in out.spectrum.data().iter().enumerate() {
        spec.push(vec![i.to_string(), num(*v)]);
    }
    let mut det = Table::new("detections", &["index", "power"]);
    for idx in &out.detections {
        det.push(vec![idx[0].to_string(), num(out.spectrum.data()[idx[0]])]);
    }
    let snr = bartlett_snr_min(d.pd, d.pfa, &st);
    let sins = sinusoid_table(cfg, |k| out.detections.iter().any(|x| x[0] == k));
    Ok(Outcome {
        tables: vec![det, sins, spec],
        summary: vec![
            format!("threshold = {threshold:.4e}, SNR_min = {:.3} dB", db(snr)),
            format!("{} detections", out.detections.len()),
        ],
    })
}

fn roc(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let d = &cfg.design;
    let r = &cfg.roc;
    let snr = 10f64.powf(r.snr_db / 10.0);
    let em = eta_m(d)?;
    let eta_p = d.eta_p.resolve("design.eta_p").map_err(CliError::Config)?;
    let (lo, hi) = (r.pfa_min.log10(), r.pfa_max.log10());
    let pfas: Vec<f64> = (0..r.points)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (r.points - 1) as f64))
        .collect();
    let mut t = Table::new("roc", &["family", "value", "pfa", "pd"]);
    let mut curve = |family: &str, value: String, p: &DesignParams, s: &StageOneStats| -> Result<(), CliError> {
        for &f in &pfas {
            t.push(vec![family.into(), value.clone(), num(f), num(rsft_roc(snr, f, p, s)?)]);
        }
        Ok(())
    };
    for &b in &r.b_values {
        let p = params(d, b, d.k, em, eta_p);
        p.validate()?;
        curve("B", b.to_string(), &p, &stats(d, b, d.omega_bins, cfg.seed)?)?;
    }
    let s = stats(d, d.b, d.omega_bins, cfg.seed)?;
    for &k in &r.k_values {
        let p = params(d, d.b, k, em, eta_p);
        p.validate()?;
        curve("K", k.to_string(), &p, &s)?;
    }
    for (i, e) in r.eta_p_values.iter().enumerate() {
        let ep = e.resolve(&format!("roc.eta_p_values[{i}]")).map_err(CliError::Config)?;
        curve("eta_p", e.label(), &params(d, d.b, d.k, em, ep), &s)?;
    }
    if r.bartlett {
        let w = unit_energy(&dolph_chebyshev(d.n, d.pre_db)?.coeffs);
        let st = BartlettStats::for_window(TAU * d.omega_bins / d.n as f64, &w, d.t);
        for &f in &pfas {
            t.push(vec!["bartlett".into(), d.n.to_string(), num(f), num(bartlett_roc(snr, &st, f))]);
        }
    }
    let rows = t.rows.len();
    Ok(Outcome {
        tables: vec![t],
        summary: vec![format!("{rows} ROC points at {} dB", r.snr_db)],
    })
}

fn complexity(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let d = &cfg.design;
    let c = &cfg.complexity;
    let mut t = Table::new(
        "complexity",
        &["k", "b", "feasible", "rsft_rows", "rsft_asymptotic", "snr_min_db"],
    );
    let mut minima = Table::new("minimum", &["k", "b_min_asymptotic", "b_min_rows"]);
    let stats_by_b: Vec<Option<StageOneStats>> = c
        .b_values
        .iter()
        .map(|&b| c.with_snr.then(|| stats(d, b, 0.5, cfg.seed)).transpose())
        .collect::<Result<_, _>>()?;
    for &k in &c.k_values {
        let mut best_asym = (f64::INFINITY, 0);
        let mut best_rows = (f64::INFINITY, 0);
        for (&b, st) in c.b_values.iter().zip(&stats_by_b) {
            let rows = rsft_cost(d.n, b, d.t, k, c.eta_m, c.eta_p).total();
            let asym = rsft_cost_asymptotic(d.n, b, d.t, k, c.eta_m, c.eta_p);
            if asym < best_asym.0 {
                best_asym = (asym, b);
            }
            if rows < best_rows.0 {
                best_rows = (rows, b);
            }
            let feasible = (k as f64) * c.eta_m < b as f64;
            let snr = match (feasible, st) {
                (true, Some(s)) => match optimize(&params(d, b, k, c.eta_m, EtaP::Fixed(c.eta_p)), s) {
                    Ok(op) => num(op.snr_min_db),
                    Err(_) => String::new(),
                },
                _ => String::new(),
            };
            t.push(vec![k.to_string(), b.to_string(), feasible.to_string(), num(rows), num(asym), snr]);
        }
        minima.push(vec![k.to_string(), best_asym.1.to_string(), best_rows.1.to_string()]);
    }
    let w = unit_energy(&dolph_chebyshev(d.n, d.pre_db)?.coeffs);
    let st = BartlettStats::for_window(TAU * 0.5 / d.n as f64, &w, d.t);
    let mut bart = Table::new("bartlett", &["n", "t", "rows", "asymptotic", "snr_min_db"]);
    bart.push(vec![
        d.n.to_string(),
        d.t.to_string(),
        num(bartlett_cost(d.n, d.t).total()),
        num(bartlett_cost_asymptotic(d.n, d.t)),
        num(db(bartlett_snr_min(d.pd, d.pfa, &st))),
    ]);
    let summary = minima
        .rows
        .iter()
        .map(|r| format!("K = {}: minimum-cost B = {} (asymptotic), {} (row sums)", r[0], r[1], r[2]))
        .collect();
    Ok(Outcome {
        tables: vec![t, minima, bart],
        summary,
    })
}

fn freq_sweep(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let d = &cfg.design;
    let sw = &cfg.sweep;
    let (p, _) = base(cfg)?;
    let mut t = Table::new("freq_sweep", &["bin", "snr_min_db", "mu", "gamma", "alpha_bar", "beta_bar"]);
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for i in 0..sw.steps {
        let bin = sw.from_bin + (sw.to_bin - sw.from_bin) * i as f64 / (sw.steps - 1) as f64;
        let s = stats(d, d.b, bin, cfg.seed)?;
        let op = optimize(&p, &s)?;
        if op.snr_min_db > worst.0 {
            worst = (op.snr_min_db, bin);
        }
        t.push(vec![num(bin), num(op.snr_min_db), op.mu.to_string(), num(op.gamma), num(s.alpha_bar), num(s.beta_bar)]);
    }
    Ok(Outcome {
        tables: vec![t],
        summary: vec![format!("worst case {:.3} dB at bin {}", worst.0, worst.1)],
    })
}

fn variance_check(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (p, s) = base(cfg)?;
    let op = optimize(&p, &s)?;
    let v = &cfg.variance;
    let rows = variance_gap(&s, op.gamma, p.noise_var, op.snr_min, &v.t_values, v.runs, cfg.seed)?;
    let mut t = Table::new("variance", &["t", "bound", "variance", "rel_gap"]);
    let mut summary = Vec::new();
    for r in &rows {
        t.push(vec![r.t.to_string(), num(r.bound), num(r.variance), num(r.rel_gap)]);
        summary.push(format!("T = {}: relative gap {:.3}%", r.t, 100.0 * r.rel_gap));
    }
    Ok(Outcome { tables: vec![t], summary })
}

fn detection_table(name: &str, last: &'static str, rows: impl Iterator<Item = (Vec<usize>, String)>) -> Table {
    let mut t = Table::new(name, &["range_bin", "angle_bin", "doppler_bin", last]);
    for (idx, v) in rows {
        t.push(vec![idx[0].to_string(), idx[1].to_string(), idx[2].to_string(), v]);
    }
    t
}

fn radar_sim(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let r = &cfg.radar;
    let p = r.params();
    let scene = Scene::new(p, r.scene_targets(), cfg.seed)?;
    let eta_p = r.eta_p.resolve("radar.eta_p").map_err(CliError::Config)?;
    let design = design_rsft(
        &p,
        &RsftDesignSpec {
            reduced: r.reduced,
            t: r.t,
            k: r.k,
            pd: r.pd,
            pfa: r.pfa,
            eta_p,
            pre_db: r.pre_db,
            flat_db: r.flat_db,
            seed: cfg.seed,
        },
    )?;
    let tol: [f64; 3] = p.shape().map(|n| dolph_chebyshev(n, r.pre_db).map(|w| w.eta_m.ceil()).unwrap_or(1.0));
    let op = design.operating_point;
    let rep = process_rsft(&scene, design.config.clone())?;
    let rsft_idx: Vec<Vec<usize>> = rep.detections.iter().map(|d| d.index.clone()).collect();
    let rsft_score = score_reconstruction(&rsft_idx, &scene.targets, &p, tol);
    let mut tables = vec![detection_table(
        "rsft_detections",
        "count",
        rep.detections.iter().map(|d| (d.index.clone(), d.count.to_string())),
    )];
    let mut summary_t = Table::new("summary", &["method", "detections", "targets_hit", "false_detections"]);
    let mut push_summary = |m: &str, n: usize, s: &rsft::radar::Score| {
        summary_t.push(vec![
            m.into(),
            n.to_string(),
            s.hits.iter().filter(|h| **h).count().to_string(),
            s.false_count.to_string(),
        ]);
    };
    push_summary("rsft", rsft_idx.len(), &rsft_score);
    let mut lines = vec![format!(
        "rsft: SNR_min* = {:.2} dB, mu = {}/{}, {} detections, {}/{} targets hit, {} false",
        op.snr_min_db,
        op.mu,
        r.t,
        rsft_idx.len(),
        rsft_score.hits.iter().filter(|h| **h).count(),
        scene.targets.len(),
        rsft_score.false_count
    )];
    let conv_hits = if r.conventional {
        let out = process_conventional(&scene, r.t, r.conventional_db, r.pfa)?;
        let conv_tol = p.shape().map(|n| dolph_chebyshev(n, r.conventional_db).map(|w| w.eta_m.ceil()).unwrap_or(1.0));
        let s = score_reconstruction(&out.detections, &scene.targets, &p, conv_tol);
        push_summary("conventional", out.detections.len(), &s);
        lines.push(format!(
            "conventional: {} detections, {}/{} targets hit, {} false",
            out.detections.len(),
            s.hits.iter().filter(|h| **h).count(),
            scene.targets.len(),
            s.false_count
        ));
        let shape = out.spectrum.shape().to_vec();
        tables.push(detection_table(
            "conventional_detections",
            "power",
            out.detections.iter().map(|idx| {
                let v = out.spectrum.get(idx).copied().unwrap_or(f64::NAN);
                debug_assert_eq!(idx.len(), shape.len());
                (idx.clone(), num(v))
            }),
        ));
        Some(s.hits)
    } else {
        None
    };
    if let Some([top_first, top_final]) = r.peak_counting {
        let rep = process_sft_peak_counting(&scene, design.config.clone(), top_first, top_final)?;
        let idx: Vec<Vec<usize>> = rep.detections.iter().map(|d| d.index.clone()).collect();
        let s = score_reconstruction(&idx, &scene.targets, &p, [1.0; 3]);
        push_summary("peak_counting", idx.len(), &s);
        tables.push(detection_table(
            "peak_counting_detections",
            "count",
            rep.detections.iter().map(|d| (d.index.clone(), d.count.to_string())),
        ));
    }
    let mut targets = Table::new(
        "targets",
        &["target", "range_bin", "angle_bin", "doppler_bin", "rsft_hit", "conventional_hit"],
    );
    for (i, t) in scene.targets.iter().enumerate() {
        let e = expected_bins(t, &p);
        targets.push(vec![
            i.to_string(),
            num(e[0]),
            num(e[1]),
            num(e[2]),
            rsft_score.hits[i].to_string(),
            conv_hits.as_ref().map(|h| h[i].to_string()).unwrap_or_default(),
        ]);
    }
    tables.push(targets);
    tables.push(summary_t);
    Ok(Outcome { tables, summary: lines })
}
