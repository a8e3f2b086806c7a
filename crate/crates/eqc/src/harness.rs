//! Experiment configs, sweeps, CSV output, and gnuplot script emission.
//!
//! A config names one experiment and its parameter grid; [`run`] executes the
//! sweep deterministically (given the seed) and returns one record per swept
//! point. Records serialize to CSV with a fixed header; [`emit_plot_script`]
//! writes a standalone gnuplot script referencing that CSV.

use crate::analytic::{repetition_error_mc, repetition_error_prob, RepetitionParams};
use crate::channel::{capacity_analytic, mean_erasure_analytic, ErasureModel};
use crate::ldpc;
use crate::polar;
use crate::queue::{
    busy_period_counts, geometric_tail_bound, simulate_sojourns, InitMode, QueueParams,
};
use crate::rng::mix;
use crate::wrapper::{choose_depth, default_alpha, wrapper_block_error_rate, InnerCodeHandle};
use crate::{Error, Estimate, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// The experiments the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CapacityCurve,
    PolarBler,
    LdpcBler,
    WrapperBler,
    Polarization,
    Concentration,
    Repetition,
}

impl ExperimentKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ExperimentKind::CapacityCurve => "capacity-curve",
            ExperimentKind::PolarBler => "polar-bler",
            ExperimentKind::LdpcBler => "ldpc-bler",
            ExperimentKind::WrapperBler => "wrapper-bler",
            ExperimentKind::Polarization => "polarization",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::Repetition => "repetition",
        }
    }
}

/// Inner code kind for the wrapper experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerKind {
    /// Decodes iff the erased fraction is below `1 - R` (analysis aid).
    IdealErasure,
    Polar,
    Ldpc,
}

fn default_mu() -> f64 {
    1.0
}
fn default_kappa() -> f64 {
    0.1
}
fn default_trials() -> usize {
    10_000
}
fn default_seed() -> u64 {
    1
}

/// One experiment and its parameter grid. Unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Arrival rate; required except for `capacity-curve`, which sweeps it.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Block lengths to sweep; empty means the experiment's default grid.
    #[serde(default)]
    pub n_list: Vec<usize>,
    /// Code rates to sweep; empty means the experiment's default.
    #[serde(default)]
    pub rates: Vec<f64>,
    /// Interleaving depth; `None` means `choose_depth` with `alpha`
    /// defaulting to `2^(-sqrt(N))`.
    #[serde(default)]
    pub depth_b: Option<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Erasure model fragment; defaults to `exponential` with `kappa`.
    #[serde(default)]
    pub model: Option<ErasureModel>,
    /// Path to an alist matrix (LDPC) or a saved polar code file.
    #[serde(default)]
    pub code_source: Option<PathBuf>,
    /// Inner code for `wrapper-bler`.
    #[serde(default)]
    pub inner: Option<InnerKind>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !(self.mu > 0.0 && self.kappa >= 0.0) {
            return Err(Error::Config(format!(
                "mu must be > 0 and kappa >= 0, got mu = {}, kappa = {}",
                self.mu, self.kappa
            )));
        }
        if let Some(r) = self.rates.iter().find(|r| !(0.0 < **r && **r <= 1.0)) {
            return Err(Error::Config(format!("rate {r} outside (0, 1]")));
        }
        match self.experiment {
            ExperimentKind::CapacityCurve => {}
            _ => {
                let lambda = self.lambda.ok_or_else(|| {
                    Error::Config(format!(
                        "experiment {} requires lambda",
                        self.experiment.tag()
                    ))
                })?;
                if !(lambda > 0.0 && lambda < self.mu) {
                    return Err(Error::Config(format!(
                        "lambda = {lambda} must lie in (0, mu = {})",
                        self.mu
                    )));
                }
            }
        }
        if let Some(path) = &self.code_source {
            if !path.exists() {
                return Err(Error::Config(format!(
                    "code_source {} does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    fn model(&self) -> Result<ErasureModel> {
        match &self.model {
            Some(m) => {
                m.validate()?;
                Ok(m.clone())
            }
            None => ErasureModel::exponential(self.kappa),
        }
    }

    fn queue(&self) -> Result<QueueParams> {
        QueueParams::mm1(self.lambda.expect("validated"), self.mu)
    }
}

/// Loads and validates a TOML config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let config: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

/// One swept point's result.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub experiment: String,
    pub lambda: f64,
    pub mu: f64,
    pub kappa: f64,
    pub n: usize,
    pub b: usize,
    pub rate: f64,
    pub trials: u64,
    pub errors: u64,
    pub estimate: f64,
    pub stderr: f64,
    /// Not serialized to CSV: wall time varies run to run.
    pub wall_seconds: f64,
    pub seed: u64,
    /// Not serialized to CSV.
    pub version: String,
}

pub const CSV_HEADER: &str = "experiment,lambda,mu,kappa,n,b,rate,trials,errors,estimate,stderr,seed";

fn artifact_version() -> String {
    format!("eqc-{}", env!("CARGO_PKG_VERSION"))
}

struct RecordBuilder {
    experiment: String,
    lambda: f64,
    mu: f64,
    kappa: f64,
    seed: u64,
}

impl RecordBuilder {
    fn point(
        &self,
        n: usize,
        b: usize,
        rate: f64,
        trials: u64,
        est: Estimate,
        started: Instant,
    ) -> ResultRecord {
        ResultRecord {
            experiment: self.experiment.clone(),
            lambda: self.lambda,
            mu: self.mu,
            kappa: self.kappa,
            n,
            b,
            rate,
            trials,
            errors: (est.value * trials as f64).round() as u64,
            estimate: est.value,
            stderr: est.stderr,
            wall_seconds: started.elapsed().as_secs_f64(),
            seed: self.seed,
            version: artifact_version(),
        }
    }
}

/// Runs the configured sweep. Deterministic given the config, including
/// across thread counts; progress goes to stderr.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::CapacityCurve => run_capacity_curve(config),
        ExperimentKind::PolarBler => run_polar_bler(config),
        ExperimentKind::LdpcBler => run_ldpc_bler(config),
        ExperimentKind::WrapperBler => run_wrapper_bler(config),
        ExperimentKind::Polarization => run_polarization(config),
        ExperimentKind::Concentration => run_concentration(config),
        ExperimentKind::Repetition => run_repetition(config),
    }
}

fn run_capacity_curve(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let started = Instant::now();
    let mut records = Vec::new();
    // 99-point grid over (0, mu).
    for i in 1..=99u32 {
        let lambda = config.mu * i as f64 / 100.0;
        let cap = capacity_analytic(lambda, config.mu, config.kappa)?;
        let builder = RecordBuilder {
            experiment: config.experiment.tag().into(),
            lambda,
            mu: config.mu,
            kappa: config.kappa,
            seed: config.seed,
        };
        records.push(builder.point(
            0,
            0,
            0.0,
            0,
            Estimate {
                value: cap.bits_per_sec,
                stderr: 0.0,
            },
            started,
        ));
    }
    eprintln!("capacity-curve: 99 analytic points");
    Ok(records)
}

fn run_polar_bler(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let params = config.queue()?;
    let model = config.model()?;
    let rates = if config.rates.is_empty() {
        vec![0.5]
    } else {
        config.rates.clone()
    };
    let n_list = if config.n_list.is_empty() {
        vec![64, 128, 256, 512, 1024, 2048]
    } else {
        config.n_list.clone()
    };
    let builder = RecordBuilder {
        experiment: config.experiment.tag().into(),
        lambda: params.lambda,
        mu: params.mu,
        kappa: config.kappa,
        seed: config.seed,
    };
    let mut records = Vec::new();
    for &rate in &rates {
        for &n in &n_list {
            let started = Instant::now();
            if !n.is_power_of_two() {
                return Err(Error::Config(format!(
                    "polar block length {n} is not a power of two"
                )));
            }
            let code = match &config.code_source {
                Some(path) => load_polar_code(path)?,
                None => {
                    let k = (rate * n as f64).round() as usize;
                    let exp = n.trailing_zeros();
                    let design_trials = config.trials.max(1_000);
                    polar::design_code(
                        &params,
                        &model,
                        exp,
                        k,
                        design_trials,
                        mix(config.seed, &[1, n as u64]),
                    )?
                }
            };
            let capacity = capacity_analytic(params.lambda, params.mu, config.kappa)?;
            if let Some(w) = code.rate_condition_warning(params.lambda, capacity.bits_per_sec) {
                eprintln!("polar-bler n={n} rate={rate}: {w}");
            }
            let est = polar::bler(
                &params,
                &model,
                &code,
                config.trials,
                mix(config.seed, &[2, n as u64, rate.to_bits()]),
            )?;
            let record = builder.point(
                code.block_len(),
                0,
                code.rate(),
                config.trials as u64,
                est,
                started,
            );
            eprintln!(
                "polar-bler n={} rate={:.3}: bler {:.3e} ({:.1}s)",
                record.n, record.rate, record.estimate, record.wall_seconds
            );
            records.push(record);
        }
    }
    Ok(records)
}

fn load_polar_code(path: &Path) -> Result<polar::PolarCode> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    polar::code_from_text(&text)
}

fn load_ldpc_code(path: &Path) -> Result<ldpc::LdpcCode> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(ldpc::build_code(&ldpc::parse_alist(&text)?))
}

fn seeded_regular_code(n: usize, seed: u64) -> Result<ldpc::LdpcCode> {
    let h = ldpc::generate_regular(n, 3, 6, mix(seed, &[3, n as u64]))?;
    Ok(ldpc::build_code(&h))
}

fn run_ldpc_bler(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let params = config.queue()?;
    let model = config.model()?;
    let n_list = if config.n_list.is_empty() {
        vec![96, 204, 408, 1008]
    } else {
        config.n_list.clone()
    };
    let builder = RecordBuilder {
        experiment: config.experiment.tag().into(),
        lambda: params.lambda,
        mu: params.mu,
        kappa: config.kappa,
        seed: config.seed,
    };
    let mut records = Vec::new();
    let codes: Vec<ldpc::LdpcCode> = match &config.code_source {
        Some(path) => vec![load_ldpc_code(path)?],
        None => n_list
            .iter()
            .map(|&n| seeded_regular_code(n, config.seed))
            .collect::<Result<_>>()?,
    };
    for code in &codes {
        let started = Instant::now();
        let n = code.n();
        let est = ldpc::bler(
            &params,
            &model,
            code,
            config.trials,
            mix(config.seed, &[4, n as u64]),
            n,
        )?;
        let record = builder.point(n, 0, code.rate(), config.trials as u64, est, started);
        eprintln!(
            "ldpc-bler n={} rate={:.3}: bler {:.3e} ({:.1}s)",
            n, record.rate, record.estimate, record.wall_seconds
        );
        records.push(record);
    }
    Ok(records)
}

fn run_wrapper_bler(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let params = config.queue()?;
    let model = config.model()?;
    let inner_kind = config.inner.unwrap_or(InnerKind::IdealErasure);
    let rates = if config.rates.is_empty() {
        vec![0.5]
    } else {
        config.rates.clone()
    };
    let n_list = if config.n_list.is_empty() {
        vec![1024]
    } else {
        config.n_list.clone()
    };
    let builder = RecordBuilder {
        experiment: config.experiment.tag().into(),
        lambda: params.lambda,
        mu: params.mu,
        kappa: config.kappa,
        seed: config.seed,
    };
    let mut records = Vec::new();
    for &rate in &rates {
        for &n in &n_list {
            let started = Instant::now();
            let inner = match inner_kind {
                InnerKind::IdealErasure => InnerCodeHandle::IdealErasure {
                    n,
                    k: (rate * n as f64).round() as usize,
                },
                InnerKind::Polar => {
                    let k = (rate * n as f64).round() as usize;
                    // The interleaved stream looks memoryless to the inner
                    // code, so design against the channel's mean erasure
                    // rate instead of the bursty raw channel.
                    let design_model = match &model {
                        ErasureModel::Exponential { kappa } if params.is_mm1() => {
                            ErasureModel::constant(mean_erasure_analytic(
                                params.lambda,
                                params.mu,
                                *kappa,
                            )?)?
                        }
                        other => other.clone(),
                    };
                    InnerCodeHandle::Polar(polar::design_code(
                        &params,
                        &design_model,
                        n.trailing_zeros(),
                        k,
                        config.trials.max(1_000),
                        mix(config.seed, &[1, n as u64]),
                    )?)
                }
                InnerKind::Ldpc => InnerCodeHandle::Ldpc(seeded_regular_code(n, config.seed)?),
            };
            let depth = match config.depth_b {
                Some(b) => b,
                None => choose_depth(params.lambda, params.mu, default_alpha(inner.n()))?,
            };
            let est = wrapper_block_error_rate(
                &params,
                &model,
                &inner,
                depth,
                config.trials,
                mix(config.seed, &[5, n as u64, rate.to_bits()]),
            )?;
            let record = builder.point(
                inner.n(),
                depth,
                inner.rate(),
                config.trials as u64,
                est,
                started,
            );
            eprintln!(
                "wrapper-bler n={} b={} rate={:.3}: bler {:.3e} ({:.1}s)",
                record.n, depth, record.rate, record.estimate, record.wall_seconds
            );
            records.push(record);
        }
    }
    Ok(records)
}

fn run_polarization(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let params = config.queue()?;
    let model = config.model()?;
    let n_list = if config.n_list.is_empty() {
        vec![64, 128, 256, 512, 1024, 2048, 4096]
    } else {
        config.n_list.clone()
    };
    let epsilon = 0.01;
    let mut records = Vec::new();
    for &n in &n_list {
        let started = Instant::now();
        if !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "polarization block length {n} is not a power of two"
            )));
        }
        let est = polar::estimate_synthetics(
            &params,
            &model,
            n.trailing_zeros(),
            config.trials.max(100),
            mix(config.seed, &[6, n as u64]),
        )?;
        let fractions = polar::polarization_fractions(&est.z, epsilon)?;
        for (tag, value) in [
            ("polarization-low", fractions.low_fraction),
            ("polarization-high", fractions.high_fraction),
        ] {
            let builder = RecordBuilder {
                experiment: tag.into(),
                lambda: params.lambda,
                mu: params.mu,
                kappa: config.kappa,
                seed: config.seed,
            };
            records.push(builder.point(
                n,
                0,
                epsilon,
                config.trials as u64,
                Estimate {
                    value,
                    stderr: 0.0,
                },
                started,
            ));
        }
        eprintln!(
            "polarization n={n}: low {:.4} high {:.4}",
            fractions.low_fraction, fractions.high_fraction
        );
    }
    Ok(records)
}

/// Collects at least `target` completed busy periods from independent
/// stationary traces.
fn collect_busy_periods(
    params: &QueueParams,
    target: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let mean_bits = params.mu / (params.mu - params.lambda);
    let mut counts = Vec::with_capacity(target);
    let mut chunk = 0u64;
    while counts.len() < target {
        let remaining = target - counts.len();
        let bits = ((remaining as f64 * mean_bits * 1.2) as usize).clamp(1_000, 20_000_000);
        let trace = simulate_sojourns(params, bits, mix(seed, &[7, chunk]), InitMode::Empty)?;
        counts.extend(busy_period_counts(&trace).counts);
        chunk += 1;
    }
    counts.truncate(target);
    Ok(counts)
}

fn run_concentration(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let params = config.queue()?;
    let started = Instant::now();
    // `trials` counts completed busy periods here.
    let counts = collect_busy_periods(&params, config.trials, config.seed)?;
    let total = counts.len() as u64;
    let mut records = Vec::new();
    // Report every l with at least 50 exceedances, plus the matching bound.
    for l in 1.. {
        let exceed = counts.iter().filter(|&&j| j > l).count() as u64;
        if exceed < 50 {
            break;
        }
        let est = Estimate::binomial(exceed, total);
        let bound = geometric_tail_bound(params.lambda, params.mu, l)?;
        for (tag, e) in [
            ("concentration", est),
            (
                "concentration-bound",
                Estimate {
                    value: bound,
                    stderr: 0.0,
                },
            ),
        ] {
            let builder = RecordBuilder {
                experiment: tag.into(),
                lambda: params.lambda,
                mu: params.mu,
                kappa: config.kappa,
                seed: config.seed,
            };
            records.push(builder.point(l, 0, 0.0, total, e, started));
        }
    }
    eprintln!(
        "concentration: {} periods, {} tail points ({:.1}s)",
        total,
        records.len() / 2,
        started.elapsed().as_secs_f64()
    );
    Ok(records)
}

fn run_repetition(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let started = Instant::now();
    let p = RepetitionParams::new(
        config.kappa,
        config.lambda.expect("validated"),
        config.mu,
    )?;
    let closed = repetition_error_prob(&p)?;
    let trials = config.trials.max(1_000);
    let mc = repetition_error_mc(&p, trials, config.seed)?;
    let mut records = Vec::new();
    for (tag, trials, est) in [
        (
            "repetition-analytic",
            0u64,
            Estimate {
                value: closed,
                stderr: 0.0,
            },
        ),
        ("repetition-mc", trials as u64, mc),
    ] {
        let builder = RecordBuilder {
            experiment: tag.into(),
            lambda: p.lambda,
            mu: p.mu,
            kappa: p.kappa,
            seed: config.seed,
        };
        records.push(builder.point(2, 0, 0.5, trials, est, started));
    }
    eprintln!(
        "repetition: closed form {closed:.6}, mc {:.6} +- {:.1e}",
        mc.value, mc.stderr
    );
    Ok(records)
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders records as CSV text with the fixed header. `wall_seconds` and the
/// version string are intentionally excluded so identical configs produce
/// byte-identical output.
pub fn csv_string(records: &[ResultRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.experiment,
            fmt_f64(r.lambda),
            fmt_f64(r.mu),
            fmt_f64(r.kappa),
            r.n,
            r.b,
            fmt_f64(r.rate),
            r.trials,
            r.errors,
            fmt_f64(r.estimate),
            fmt_f64(r.stderr),
            r.seed
        ));
    }
    s
}

pub fn write_csv(records: &[ResultRecord], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(records)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses CSV produced by [`csv_string`]. The non-serialized fields come
/// back zeroed.
pub fn parse_csv(text: &str) -> Result<Vec<ResultRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty CSV".into()))?;
    if header != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header: {header}")));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::Config(format!(
                "CSV row {}: expected 12 fields, got {}",
                i + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| Error::Config(format!("CSV row {}: bad {what}", i + 2));
        records.push(ResultRecord {
            experiment: fields[0].to_string(),
            lambda: fields[1].parse().map_err(|_| bad("lambda"))?,
            mu: fields[2].parse().map_err(|_| bad("mu"))?,
            kappa: fields[3].parse().map_err(|_| bad("kappa"))?,
            n: fields[4].parse().map_err(|_| bad("n"))?,
            b: fields[5].parse().map_err(|_| bad("b"))?,
            rate: fields[6].parse().map_err(|_| bad("rate"))?,
            trials: fields[7].parse().map_err(|_| bad("trials"))?,
            errors: fields[8].parse().map_err(|_| bad("errors"))?,
            estimate: fields[9].parse().map_err(|_| bad("estimate"))?,
            stderr: fields[10].parse().map_err(|_| bad("stderr"))?,
            wall_seconds: 0.0,
            seed: fields[11].parse().map_err(|_| bad("seed"))?,
            version: String::new(),
        });
    }
    Ok(records)
}

/// Writes a standalone gnuplot script that plots `csv_path`.
///
/// Error-rate experiments get a log-scaled y axis over log2 block length,
/// one series per distinct (experiment, rate, depth) triple; the capacity
/// curve plots linearly against lambda.
pub fn emit_plot_script(
    records: &[ResultRecord],
    csv_path: &Path,
    script_path: &Path,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParam(
            "cannot emit a plot script for zero records".into(),
        ));
    }
    let csv = csv_path.display();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key top right\n");
    s.push_str("set grid\n");
    let capacity_like = records.iter().all(|r| r.experiment == "capacity-curve");
    if capacity_like {
        s.push_str("set xlabel 'arrival rate lambda'\n");
        s.push_str("set ylabel 'capacity (bits/sec)'\n");
        s.push_str(&format!(
            "plot '{csv}' skip 1 using 2:10 with linespoints title 'capacity'\n"
        ));
    } else if records.iter().all(|r| r.experiment.starts_with("concentration")) {
        s.push_str("set xlabel 'bits per busy period l'\n");
        s.push_str("set ylabel 'P(J > l)'\n");
        s.push_str("set logscale y\n");
        s.push_str(&format!(
            "plot '{csv}' skip 1 using 5:(strcol(1) eq 'concentration' ? $10 : 1/0) \
             with points title 'empirical', \\\n     '{csv}' skip 1 using \
             5:(strcol(1) eq 'concentration-bound' ? $10 : 1/0) with lines title 'bound'\n"
        ));
    } else {
        s.push_str("set xlabel 'log2 block length'\n");
        s.push_str("set ylabel 'block error rate'\n");
        s.push_str("set logscale y\n");
        // One series per (experiment, depth, rate cluster). True code rates
        // k/n differ slightly across block lengths within one requested
        // rate, so rates within 0.02 of each other form one series.
        let mut groups: Vec<(String, usize)> = Vec::new();
        for r in records {
            let key = (r.experiment.clone(), r.b);
            if !groups.contains(&key) {
                groups.push(key);
            }
        }
        let mut clauses: Vec<String> = Vec::new();
        for (exp, b) in &groups {
            let mut rates: Vec<f64> = records
                .iter()
                .filter(|r| r.experiment == *exp && r.b == *b)
                .map(|r| r.rate)
                .collect();
            rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
            rates.dedup();
            let mut clusters: Vec<(f64, f64)> = Vec::new();
            for &rate in &rates {
                match clusters.last_mut() {
                    Some((_, hi)) if rate - *hi <= 0.02 => *hi = rate,
                    _ => clusters.push((rate, rate)),
                }
            }
            for (lo, hi) in clusters {
                let mid = 0.5 * (lo + hi);
                clauses.push(format!(
                    "'{csv}' skip 1 using (log($5)/log(2)):(strcol(1) eq '{exp}' \
                     && $7 >= {lo:.6} - 1e-9 && $7 <= {hi:.6} + 1e-9 && $6 == {b} \
                     ? $10 : 1/0) with linespoints title '{exp} R={mid:.2} B={b}'"
                ));
            }
        }
        s.push_str("plot ");
        s.push_str(&clauses.join(", \\\n     "));
        s.push('\n');
    }
    std::fs::write(script_path, s).map_err(|source| Error::Io {
        path: script_path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(kind: &str, extra: &str) -> ExperimentConfig {
        let text = format!("experiment = \"{kind}\"\n{extra}");
        toml::from_str(&text).unwrap()
    }

    #[test]
    fn defaults_applied() {
        let c = minimal("capacity-curve", "");
        assert_eq!(c.mu, 1.0);
        assert_eq!(c.kappa, 0.1);
        assert_eq!(c.trials, 10_000);
        assert_eq!(c.seed, 1);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = toml::from_str::<ExperimentConfig>("experiment = \"repetition\"\nbogus = 1\n")
            .unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
    }

    #[test]
    fn empty_config_requires_experiment() {
        let e = toml::from_str::<ExperimentConfig>("").unwrap_err();
        assert!(e.to_string().contains("experiment"), "{e}");
    }

    #[test]
    fn zero_trials_rejected() {
        let c = minimal("repetition", "lambda = 0.5\ntrials = 0\n");
        assert!(c.validate().is_err());
    }

    #[test]
    fn lambda_required_outside_capacity_curve() {
        let c = minimal("polar-bler", "");
        assert!(c.validate().is_err());
    }

    #[test]
    fn model_fragment_parses() {
        let c = minimal(
            "ldpc-bler",
            "lambda = 0.8\n[model]\nvariant = \"constant\"\np = 0.25\n",
        );
        assert_eq!(c.model().unwrap(), ErasureModel::constant(0.25).unwrap());
    }

    #[test]
    fn capacity_curve_grid_and_peak() {
        let c = minimal("capacity-curve", "");
        let records = run(&c).unwrap();
        assert_eq!(records.len(), 99);
        let best = records
            .iter()
            .max_by(|a, b| a.estimate.partial_cmp(&b.estimate).unwrap())
            .unwrap();
        assert!((best.lambda - 0.77).abs() < 0.011, "peak at {}", best.lambda);
        assert!((best.estimate - 0.5367).abs() < 0.005);
    }

    #[test]
    fn csv_single_record_two_lines() {
        let c = minimal("repetition", "lambda = 0.5\ntrials = 1000\n");
        let records = run(&c).unwrap();
        let one = &records[..1];
        let text = csv_string(one);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn csv_roundtrip_exact() {
        let c = minimal("repetition", "lambda = 0.77\ntrials = 2000\n");
        let records = run(&c).unwrap();
        let text = csv_string(&records);
        let reparsed = parse_csv(&text).unwrap();
        assert_eq!(csv_string(&reparsed), text);
        assert_eq!(reparsed.len(), records.len());
        for (a, b) in reparsed.iter().zip(&records) {
            assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
            assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        }
    }

    #[test]
    fn run_is_deterministic() {
        let c = minimal(
            "ldpc-bler",
            "lambda = 0.8\ntrials = 300\nn_list = [96, 204]\n",
        );
        let a = csv_string(&run(&c).unwrap());
        let b = csv_string(&run(&c).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn polar_bler_decreasing_in_n_memoryless() {
        // Monotone decrease is a memoryless-channel property; the correlated
        // channel's bursts break it at these block lengths.
        let c = minimal(
            "polar-bler",
            "lambda = 0.77\ntrials = 2000\nn_list = [64, 256, 1024]\n\
             [model]\nvariant = \"constant\"\np = 0.3\n",
        );
        let records = run(&c).unwrap();
        assert_eq!(records.len(), 3);
        assert!(
            records.windows(2).all(|w| w[1].estimate < w[0].estimate),
            "blers: {:?}",
            records.iter().map(|r| r.estimate).collect::<Vec<_>>()
        );
    }

    #[test]
    fn wrapper_ideal_smoke() {
        let c = minimal(
            "wrapper-bler",
            "lambda = 0.77\ntrials = 1000\nn_list = [256]\ndepth_b = 64\nrates = [0.5]\n",
        );
        let records = run(&c).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].b, 64);
        assert!(records[0].estimate < 0.05, "bler {}", records[0].estimate);
    }

    #[test]
    fn polarization_emits_low_and_high() {
        let c = minimal(
            "polarization",
            "lambda = 0.77\ntrials = 300\nn_list = [64, 128]\n",
        );
        let records = run(&c).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(records[0].experiment, "polarization-low");
        assert_eq!(records[1].experiment, "polarization-high");
    }

    #[test]
    fn concentration_tracks_bound() {
        let c = minimal("concentration", "lambda = 0.5\ntrials = 20000\n");
        let records = run(&c).unwrap();
        assert!(records.len() >= 2);
        for pair in records.chunks(2) {
            let (emp, bound) = (&pair[0], &pair[1]);
            assert_eq!(emp.n, bound.n);
            assert!(emp.estimate <= bound.estimate + 3.0 * emp.stderr);
        }
    }

    #[test]
    fn plot_script_has_log_axis_and_series() {
        let dir = tempfile::tempdir().unwrap();
        let c = minimal(
            "polar-bler",
            "lambda = 0.77\ntrials = 500\nn_list = [64, 128]\nrates = [0.5, 0.6]\n",
        );
        let records = run(&c).unwrap();
        let csv_path = dir.path().join("out.csv");
        let script_path = dir.path().join("out.gp");
        write_csv(&records, &csv_path).unwrap();
        emit_plot_script(&records, &csv_path, &script_path).unwrap();
        let script = std::fs::read_to_string(&script_path).unwrap();
        assert!(script.contains("set logscale y"));
        assert_eq!(script.matches("with linespoints").count(), 2);
        assert!(script.contains("out.csv"));
    }

    #[test]
    fn load_config_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "experiment = \"repetition\"\nlambda = oops\n").unwrap();
        let e = load_config(&path).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn missing_code_source_rejected() {
        let c = minimal(
            "ldpc-bler",
            "lambda = 0.8\ncode_source = \"/nonexistent/code.alist\"\n",
        );
        assert!(c.validate().is_err());
    }
}
