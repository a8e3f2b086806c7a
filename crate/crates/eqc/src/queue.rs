//! Single-server FCFS queue simulation.
//!
//! Sojourn times follow Lindley's recursion
//! `W_{i+1} = max(W_i - A_{i+1}, 0) + S_{i+1}`, where `A` is the inter-arrival
//! time and `S` the service time. A bit that arrives to an empty queue
//! (`A_i >= W_{i-1}`) starts a new busy period; bits in different busy periods
//! experience independent sojourn times, which is the renewal structure the
//! interleaving wrapper exploits.

use crate::rng::{mix, Stream};
use crate::{Error, Estimate, Result};
use serde::{Deserialize, Serialize};

const TAG_QUEUE: u64 = 0x51;
const TAG_RENEWAL: u64 = 0x52;

/// Inter-arrival or service time distribution.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum DistSpec {
    /// Exponential with the rate given in [`QueueParams`].
    Exponential,
    /// Every gap equal to `1/rate`.
    Deterministic,
    /// Bootstrap resampling from user-provided samples (seconds).
    Custom { samples: Vec<f64> },
}

impl DistSpec {
    fn validate(&self, name: &str) -> Result<()> {
        if let DistSpec::Custom { samples } = self {
            if samples.is_empty() {
                return Err(Error::InvalidParam(format!("{name}: empty sample set")));
            }
            if samples.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "{name}: samples must be positive and finite"
                )));
            }
        }
        Ok(())
    }

    fn draw(&self, rate: f64, rng: &mut Stream) -> f64 {
        match self {
            DistSpec::Exponential => rng.exp(rate),
            DistSpec::Deterministic => 1.0 / rate,
            DistSpec::Custom { samples } => samples[rng.index(samples.len())],
        }
    }

    fn is_exponential(&self) -> bool {
        matches!(self, DistSpec::Exponential)
    }
}

/// Arrival and service parameters of the queue.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QueueParams {
    /// Arrival rate in bits/sec.
    pub lambda: f64,
    /// Service rate in bits/sec.
    pub mu: f64,
    pub arrival_dist: DistSpec,
    pub service_dist: DistSpec,
}

impl QueueParams {
    /// M/M/1 queue: Poisson arrivals, exponential services.
    pub fn mm1(lambda: f64, mu: f64) -> Result<QueueParams> {
        let p = QueueParams {
            lambda,
            mu,
            arrival_dist: DistSpec::Exponential,
            service_dist: DistSpec::Exponential,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParam(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::InvalidParam(format!(
                "mu must be positive and finite, got {}",
                self.mu
            )));
        }
        if self.lambda >= self.mu {
            return Err(Error::Unstable {
                lambda: self.lambda,
                mu: self.mu,
            });
        }
        self.arrival_dist.validate("arrival_dist")?;
        self.service_dist.validate("service_dist")?;
        Ok(())
    }

    pub fn is_mm1(&self) -> bool {
        self.arrival_dist.is_exponential() && self.service_dist.is_exponential()
    }
}

/// How the queue is initialized before bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// A virtual bit 0 with sojourn drawn from the stationary law
    /// `Exp(mu - lambda)`; M/M/1 only, where that law is known in closed form.
    Stationary,
    /// Queue starts empty; bit 1 always opens the first busy period.
    Empty,
}

/// Sojourn times plus busy-period boundaries from one queue realization.
#[derive(Debug, Clone)]
pub struct SojournTrace {
    /// `W_i` for each bit, seconds.
    pub sojourns: Vec<f64>,
    /// Indices (1-based) at which a busy period begins. Index 1 is always
    /// present as a partition anchor; see [`SojournTrace::first_is_renewal`].
    pub busy_period_starts: Vec<usize>,
    /// Whether bit 1 truly arrived to an empty queue. Under stationary
    /// initialization the first bit may land in a busy period that began
    /// before the trace; the head segment is then incomplete.
    pub first_is_renewal: bool,
    pub seed: u64,
    pub init_mode: InitMode,
    /// Sojourn of the virtual bit 0 (stationary init only).
    pub w0: f64,
    /// Stored samples so the Lindley recursion can be replayed bit-exactly.
    pub inter_arrivals: Vec<f64>,
    pub services: Vec<f64>,
}

impl SojournTrace {
    pub fn len(&self) -> usize {
        self.sojourns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sojourns.is_empty()
    }

    /// Replays Lindley's recursion from the stored samples.
    pub fn recompute_sojourns(&self) -> Vec<f64> {
        let mut w_prev = self.w0;
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let w = (w_prev - self.inter_arrivals[i]).max(0.0) + self.services[i];
            out.push(w);
            w_prev = w;
        }
        out
    }

    /// True renewal indices: bits that arrived to an empty queue.
    pub fn renewal_starts(&self) -> &[usize] {
        if self.first_is_renewal {
            &self.busy_period_starts
        } else {
            &self.busy_period_starts[1..]
        }
    }

    /// Busy-period id (0-based) for each bit, usable to check that two bits
    /// fall in different periods.
    pub fn period_of_bit(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.len()];
        let mut period = 0usize;
        let mut next = 1;
        for (i, slot) in out.iter_mut().enumerate() {
            let idx = i + 1;
            while next < self.busy_period_starts.len() && self.busy_period_starts[next] == idx {
                period += 1;
                next += 1;
            }
            *slot = period;
        }
        out
    }
}

/// Jobs-per-busy-period statistics over the completed periods of a trace.
#[derive(Debug, Clone)]
pub struct BusyPeriodStats {
    /// J values, one per completed busy period, in trace order.
    pub counts: Vec<usize>,
    pub num_periods: usize,
}

impl BusyPeriodStats {
    /// Fraction of completed periods with `J >= l`.
    pub fn tail_ge(&self, l: usize) -> f64 {
        if self.num_periods == 0 {
            return 0.0;
        }
        self.counts.iter().filter(|&&j| j >= l).count() as f64 / self.num_periods as f64
    }

    /// Fraction of completed periods with `J > l`.
    pub fn tail_gt(&self, l: usize) -> f64 {
        self.tail_ge(l + 1)
    }

    /// Number of completed periods with `J > l`.
    pub fn exceedances_gt(&self, l: usize) -> usize {
        self.counts.iter().filter(|&&j| j > l).count()
    }

    pub fn mean_jobs(&self) -> f64 {
        if self.num_periods == 0 {
            return f64::NAN;
        }
        self.counts.iter().sum::<usize>() as f64 / self.num_periods as f64
    }
}

/// Generates `n` sojourn times by Lindley's recursion.
///
/// Each bit's inter-arrival and service samples come from a counter-based
/// stream keyed on `(seed, bit index)`, so the trace is reproducible
/// independent of how callers batch or parallelize around it.
pub fn simulate_sojourns(
    params: &QueueParams,
    n: usize,
    seed: u64,
    init_mode: InitMode,
) -> Result<SojournTrace> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidParam("n must be >= 1".into()));
    }
    let w0 = match init_mode {
        InitMode::Stationary => {
            if !params.is_mm1() {
                return Err(Error::StationaryRequiresMm1);
            }
            let mut rng = Stream::new(seed, &[TAG_QUEUE, 0]);
            rng.exp(params.mu - params.lambda)
        }
        InitMode::Empty => 0.0,
    };

    let mut sojourns = Vec::with_capacity(n);
    let mut inter_arrivals = Vec::with_capacity(n);
    let mut services = Vec::with_capacity(n);
    let mut busy_period_starts = Vec::new();
    let mut first_is_renewal = true;
    let mut w_prev = w0;
    for i in 1..=n {
        let mut rng = Stream::new(seed, &[TAG_QUEUE, i as u64]);
        let a = params.arrival_dist.draw(params.lambda, &mut rng);
        let s = params.service_dist.draw(params.mu, &mut rng);
        let renewal = a >= w_prev;
        if renewal {
            busy_period_starts.push(i);
        } else if i == 1 {
            // Bit 1 joins the virtual bit 0's ongoing busy period. Keep index
            // 1 as a partition anchor but mark the head segment incomplete.
            busy_period_starts.push(1);
            first_is_renewal = false;
        }
        let w = (w_prev - a).max(0.0) + s;
        sojourns.push(w);
        inter_arrivals.push(a);
        services.push(s);
        w_prev = w;
    }

    Ok(SojournTrace {
        sojourns,
        busy_period_starts,
        first_is_renewal,
        seed,
        init_mode,
        w0,
        inter_arrivals,
        services,
    })
}

/// Partitions a trace into busy periods and tallies jobs per period.
///
/// Only completed periods contribute: the trailing period is always open, and
/// under stationary init the leading segment may have started before bit 1.
pub fn busy_period_counts(trace: &SojournTrace) -> BusyPeriodStats {
    let starts = &trace.busy_period_starts;
    let skip_head = usize::from(!trace.first_is_renewal);
    let counts: Vec<usize> = starts
        .windows(2)
        .skip(skip_head)
        .map(|w| w[1] - w[0])
        .collect();
    let num_periods = counts.len();
    BusyPeriodStats {
        counts,
        num_periods,
    }
}

/// Chernoff tail bound on jobs per typical busy period of an M/M/1 queue:
/// `P{J > l} <= (4*lambda*mu / (lambda+mu)^2)^l`.
pub fn geometric_tail_bound(lambda: f64, mu: f64, l: usize) -> Result<f64> {
    if !(lambda > 0.0 && mu > 0.0 && lambda < mu) {
        return Err(Error::Unstable { lambda, mu });
    }
    if l < 1 {
        return Err(Error::InvalidParam("l must be >= 1".into()));
    }
    let base = 4.0 * lambda * mu / (lambda + mu).powi(2);
    Ok(base.powi(l as i32))
}

/// Sub-exponential tail bound on jobs per busy period of a G/G/1 queue.
///
/// For i.i.d. sub-exponential increments with parameters `(nu, b)` and mean
/// `upsilon`, returns `exp(-eta*upsilon^2 / (2 nu^2))` when
/// `upsilon < nu^2/b` and `exp(-eta*upsilon / (2b))` when `upsilon > nu^2/b`.
/// The boundary `upsilon == nu^2/b` is rejected.
pub fn gg1_tail_bound(nu: f64, b: f64, upsilon: f64, eta: f64) -> Result<f64> {
    for (name, v) in [("nu", nu), ("b", b), ("upsilon", upsilon), ("eta", eta)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParam(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let boundary = nu * nu / b;
    if upsilon == boundary {
        return Err(Error::InvalidParam(
            "upsilon == nu^2/b lies on the regime boundary".into(),
        ));
    }
    let exponent = if upsilon < boundary {
        -eta * upsilon * upsilon / (2.0 * nu * nu)
    } else {
        -eta * upsilon / (2.0 * b)
    };
    Ok(exponent.exp())
}

/// Monte Carlo estimate of the probability that no renewal occurs among bits
/// `N+1 ..= 2N` of a stationary trace of length `3N`.
///
/// This is the event whose probability bounds the dependence between the
/// erasure blocks `E_1^N` and `E_{2N+1}^{3N}`.
pub fn renewal_gap_estimate(
    params: &QueueParams,
    window: usize,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    if !params.is_mm1() {
        return Err(Error::StationaryRequiresMm1);
    }
    if window < 1 || trials < 1 {
        return Err(Error::InvalidParam(
            "window and trials must be >= 1".into(),
        ));
    }
    let mut no_renewal = 0u64;
    for t in 0..trials {
        let trial_seed = mix(seed, &[TAG_RENEWAL, t as u64]);
        let trace = simulate_sojourns(params, 3 * window, trial_seed, InitMode::Stationary)?;
        let hit = trace
            .renewal_starts()
            .iter()
            .any(|&s| s > window && s <= 2 * window);
        if !hit {
            no_renewal += 1;
        }
    }
    Ok(Estimate::binomial(no_renewal, trials as u64))
}
