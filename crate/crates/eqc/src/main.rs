//! Thin CLI over the library: each subcommand assembles an experiment
//! config, runs it, and writes CSV (and optionally a gnuplot script).
//! Diagnostics go to stderr; data goes to files or stdout.

use clap::{Args, Parser, Subcommand};
use eqc::channel::ErasureModel;
use eqc::harness::{
    self, csv_string, emit_plot_script, load_config, write_csv, ExperimentConfig,
    ExperimentKind, InnerKind, ResultRecord,
};
use eqc::polar;
use eqc::queue::{busy_period_counts, simulate_sojourns, InitMode, QueueParams};
use eqc::wrapper::choose_depth;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "eqc",
    version,
    about = "Erasure queue-channel simulation, capacity, and coding experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Arrival rate.
    #[arg(long, default_value_t = 0.77)]
    lambda: f64,
    /// Service rate.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Erasure profile rate in p(W) = 1 - exp(-kappa W).
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    /// Block length(s); repeatable.
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Code rate(s); repeatable.
    #[arg(long = "rate")]
    rate: Vec<f64>,
    /// Interleaving depth.
    #[arg(long)]
    b: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gnuplot script output path (requires --out).
    #[arg(long)]
    plot: Option<PathBuf>,
}

impl Common {
    fn config(&self, experiment: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            experiment,
            lambda: Some(self.lambda),
            mu: self.mu,
            kappa: self.kappa,
            n_list: self.n.clone(),
            rates: self.rate.clone(),
            depth_b: self.b,
            trials: self.trials,
            seed: self.seed,
            model: None,
            code_source: None,
            inner: None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Analytic capacity curve over a 99-point lambda grid.
    Capacity(Common),
    /// Simulate a sojourn-time trace and report busy-period statistics.
    QueueSim(Common),
    /// Design a polar code for the channel and save it as a text file.
    PolarConstruct(Common),
    /// Polar block error rate sweep.
    PolarBler(Common),
    /// LDPC block error rate sweep with seeded (3,6)-regular codes.
    LdpcBler {
        #[command(flatten)]
        common: Common,
        /// Alist parity-check file to use instead of generated codes.
        #[arg(long)]
        code: Option<PathBuf>,
    },
    /// Interleaved-wrapper block error rate.
    WrapperBler {
        #[command(flatten)]
        common: Common,
        /// Inner code: ideal-erasure, polar, or ldpc.
        #[arg(long, default_value = "ideal-erasure")]
        inner: String,
    },
    /// Fractions of nearly-noiseless and nearly-useless synthetic channels.
    Polarization(Common),
    /// Busy-period tail probabilities against the analytic bound.
    Concentration(Common),
    /// Repetition-code error probability, closed form and Monte Carlo.
    Repetition(Common),
    /// Run an experiment described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// CSV output path; defaults to the config name with .csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Gnuplot script output path.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn emit(records: &[ResultRecord], out: &Option<PathBuf>, plot: &Option<PathBuf>) -> eqc::Result<()> {
    match out {
        Some(path) => {
            write_csv(records, path)?;
            eprintln!("wrote {} records to {}", records.len(), path.display());
            if let Some(script) = plot {
                emit_plot_script(records, path, script)?;
                eprintln!("wrote plot script to {}", script.display());
            }
        }
        None => {
            if plot.is_some() {
                return Err(eqc::Error::InvalidParam(
                    "--plot requires --out so the script can reference the CSV".into(),
                ));
            }
            print!("{}", csv_string(records));
        }
    }
    Ok(())
}

fn run_and_emit(config: &ExperimentConfig, out: &Option<PathBuf>, plot: &Option<PathBuf>) -> eqc::Result<()> {
    let records = harness::run(config)?;
    emit(&records, out, plot)
}

fn dispatch(cli: Cli) -> eqc::Result<()> {
    match cli.command {
        Command::Capacity(c) => {
            let mut config = c.config(ExperimentKind::CapacityCurve);
            config.lambda = None;
            run_and_emit(&config, &c.out, &c.plot)
        }
        Command::QueueSim(c) => queue_sim(&c),
        Command::PolarConstruct(c) => polar_construct(&c),
        Command::PolarBler(c) => run_and_emit(&c.config(ExperimentKind::PolarBler), &c.out, &c.plot),
        Command::LdpcBler { common, code } => {
            let mut config = common.config(ExperimentKind::LdpcBler);
            config.code_source = code;
            run_and_emit(&config, &common.out, &common.plot)
        }
        Command::WrapperBler { common, inner } => {
            let mut config = common.config(ExperimentKind::WrapperBler);
            config.inner = Some(match inner.as_str() {
                "ideal-erasure" | "ideal" => InnerKind::IdealErasure,
                "polar" => InnerKind::Polar,
                "ldpc" => InnerKind::Ldpc,
                other => {
                    return Err(eqc::Error::InvalidParam(format!(
                        "unknown inner code kind {other:?}; expected ideal-erasure, polar, or ldpc"
                    )))
                }
            });
            if config.depth_b.is_none() {
                let n = *config.n_list.first().unwrap_or(&1024);
                let depth = choose_depth(common.lambda, common.mu, eqc::wrapper::default_alpha(n))?;
                eprintln!("using interleaving depth B = {depth} (alpha = 2^-sqrt(N))");
            }
            run_and_emit(&config, &common.out, &common.plot)
        }
        Command::Polarization(c) => {
            run_and_emit(&c.config(ExperimentKind::Polarization), &c.out, &c.plot)
        }
        Command::Concentration(c) => {
            run_and_emit(&c.config(ExperimentKind::Concentration), &c.out, &c.plot)
        }
        Command::Repetition(c) => run_and_emit(&c.config(ExperimentKind::Repetition), &c.out, &c.plot),
        Command::Run { config, out, plot } => {
            let parsed = load_config(&config)?;
            let out = Some(out.unwrap_or_else(|| config.with_extension("csv")));
            run_and_emit(&parsed, &out, &plot)
        }
    }
}

fn queue_sim(c: &Common) -> eqc::Result<()> {
    let params = QueueParams::mm1(c.lambda, c.mu)?;
    let bits = *c.n.first().unwrap_or(&10_000);
    let trace = simulate_sojourns(&params, bits, c.seed, InitMode::Stationary)?;
    let stats = busy_period_counts(&trace);
    eprintln!(
        "{} bits: mean sojourn {:.4} (analytic {:.4}), {} completed busy periods, mean bits/period {:.3}",
        bits,
        trace.sojourns.iter().sum::<f64>() / bits as f64,
        1.0 / (c.mu - c.lambda),
        stats.num_periods,
        stats.mean_jobs()
    );
    let mut s = String::from("index,sojourn,busy_period_start\n");
    let starts: std::collections::HashSet<usize> = trace.renewal_starts().iter().copied().collect();
    for (i, w) in trace.sojourns.iter().enumerate() {
        s.push_str(&format!("{},{:.16e},{}\n", i, w, u8::from(starts.contains(&i))));
    }
    match &c.out {
        Some(path) => std::fs::write(path, s).map_err(|source| eqc::Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn polar_construct(c: &Common) -> eqc::Result<()> {
    let params = QueueParams::mm1(c.lambda, c.mu)?;
    let model = ErasureModel::exponential(c.kappa)?;
    let n = *c.n.first().unwrap_or(&1024);
    if !n.is_power_of_two() {
        return Err(eqc::Error::NotPowerOfTwo(n));
    }
    let rate = *c.rate.first().unwrap_or(&0.5);
    let k = (rate * n as f64).round() as usize;
    let code = polar::design_code(
        &params,
        &model,
        n.trailing_zeros(),
        k,
        c.trials.max(1_000),
        c.seed,
    )?;
    let cap = eqc::channel::capacity_analytic(c.lambda, c.mu, c.kappa)?;
    if let Some(w) = code.rate_condition_warning(c.lambda, cap.bits_per_sec) {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "designed ({}, {}) code, rate {:.4}",
        code.block_len(),
        code.message_len(),
        code.rate()
    );
    let text = polar::code_to_text(&code);
    match &c.out {
        Some(path) => std::fs::write(path, text).map_err(|source| eqc::Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
