//! Erasure-probability models and EQC capacity.
//!
//! The channel erases bit `i` with probability `p(W_i)`, a function of its
//! sojourn time. Capacity is `lambda * E_pi[1 - p(W)]` bits/sec under the
//! stationary sojourn law `pi`. For an M/M/1 queue with the exponential model
//! `p(W) = 1 - exp(-kappa W)` the expectation is a Laplace transform and the
//! capacity has the closed form `lambda (mu - lambda) / (mu - lambda + kappa)`.

use crate::queue::{simulate_sojourns, InitMode, QueueParams, SojournTrace};
use crate::rng::Stream;
use crate::{Error, Estimate, Result};
use serde::{Deserialize, Serialize};

const TAG_PATTERN: u64 = 0xE1;
const TAG_MARKOV: u64 = 0xE2;

/// A transmitted or received channel symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Zero,
    One,
    Erased,
}

impl Symbol {
    pub fn from_bit(b: u8) -> Symbol {
        if b == 0 {
            Symbol::Zero
        } else {
            Symbol::One
        }
    }

    pub fn bit(self) -> Option<u8> {
        match self {
            Symbol::Zero => Some(0),
            Symbol::One => Some(1),
            Symbol::Erased => None,
        }
    }

    pub fn is_erased(self) -> bool {
        self == Symbol::Erased
    }
}

/// Maps sojourn times (or a hidden Markov state) to erasure probabilities.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase", tag = "variant")]
pub enum ErasureModel {
    /// `p(W) = 1 - exp(-kappa W)`.
    Exponential { kappa: f64 },
    /// Sojourn-independent erasure probability (i.i.d. BEC).
    Constant { p: f64 },
    /// Piecewise-constant non-decreasing `p(W)`: `levels[j]` applies when
    /// `W` is in `[thresholds[j-1], thresholds[j])`; `levels` has one more
    /// entry than `thresholds`.
    Step {
        thresholds: Vec<f64>,
        levels: Vec<f64>,
    },
    /// `{p(W_i)}` evolving as a finite-state Markov chain, one step per bit;
    /// the sojourn trace is ignored.
    Markov {
        states: Vec<f64>,
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
    },
}

impl ErasureModel {
    pub fn exponential(kappa: f64) -> Result<ErasureModel> {
        let m = ErasureModel::Exponential { kappa };
        m.validate()?;
        Ok(m)
    }

    pub fn constant(p: f64) -> Result<ErasureModel> {
        let m = ErasureModel::Constant { p };
        m.validate()?;
        Ok(m)
    }

    pub fn step(thresholds: Vec<f64>, levels: Vec<f64>) -> Result<ErasureModel> {
        let m = ErasureModel::Step { thresholds, levels };
        m.validate()?;
        Ok(m)
    }

    pub fn markov(
        states: Vec<f64>,
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
    ) -> Result<ErasureModel> {
        let m = ErasureModel::Markov {
            states,
            transition,
            initial,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "{name} must lie in [0,1], got {p}"
                )));
            }
            Ok(())
        };
        match self {
            ErasureModel::Exponential { kappa } => {
                if !(*kappa >= 0.0) || !kappa.is_finite() {
                    return Err(Error::InvalidParam(format!(
                        "kappa must be >= 0, got {kappa}"
                    )));
                }
            }
            ErasureModel::Constant { p } => prob("p", *p)?,
            ErasureModel::Step { thresholds, levels } => {
                if levels.len() != thresholds.len() + 1 {
                    return Err(Error::InvalidParam(format!(
                        "step model needs thresholds.len()+1 levels, got {} thresholds and {} levels",
                        thresholds.len(),
                        levels.len()
                    )));
                }
                if thresholds.windows(2).any(|w| w[0] >= w[1])
                    || thresholds.iter().any(|&t| !(t >= 0.0))
                {
                    return Err(Error::InvalidParam(
                        "step thresholds must be nonnegative and strictly increasing".into(),
                    ));
                }
                for &l in levels {
                    prob("level", l)?;
                }
                if levels.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::InvalidParam(
                        "step levels must be non-decreasing in W".into(),
                    ));
                }
            }
            ErasureModel::Markov {
                states,
                transition,
                initial,
            } => {
                if states.is_empty() {
                    return Err(Error::InvalidParam("markov model needs >= 1 state".into()));
                }
                for &s in states {
                    prob("state probability", s)?;
                }
                if transition.len() != states.len() || initial.len() != states.len() {
                    return Err(Error::InvalidParam(
                        "markov transition/initial dimensions must match states".into(),
                    ));
                }
                for row in transition {
                    if row.len() != states.len() {
                        return Err(Error::InvalidParam(
                            "markov transition matrix must be square".into(),
                        ));
                    }
                    for &p in row {
                        prob("transition entry", p)?;
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > 1e-12 {
                        return Err(Error::InvalidParam(format!(
                            "markov transition row sums to {sum}, expected 1"
                        )));
                    }
                }
                let init_sum: f64 = initial.iter().sum();
                if (init_sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParam(format!(
                        "markov initial distribution sums to {init_sum}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_markov(&self) -> bool {
        matches!(self, ErasureModel::Markov { .. })
    }
}

/// Erasure indicators for one transmission.
#[derive(Debug, Clone)]
pub struct ErasurePattern {
    /// `true` where the symbol is erased.
    pub bits: Vec<bool>,
    /// Seed of the trace that produced the pattern, for provenance.
    pub trace_seed: u64,
}

impl ErasurePattern {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn erased_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Evaluates `p(w)` for the time-driven model variants.
pub fn erasure_probability(model: &ErasureModel, w: f64) -> Result<f64> {
    if w < 0.0 || !w.is_finite() && w != f64::INFINITY {
        return Err(Error::InvalidParam(format!("sojourn must be >= 0, got {w}")));
    }
    match model {
        ErasureModel::Exponential { kappa } => Ok(1.0 - (-kappa * w).exp()),
        ErasureModel::Constant { p } => Ok(*p),
        ErasureModel::Step { thresholds, levels } => {
            let idx = thresholds.partition_point(|&t| t <= w);
            Ok(levels[idx])
        }
        ErasureModel::Markov { .. } => Err(Error::UnsupportedQuery(
            "markov model erasure probability is state-driven, not sojourn-driven".into(),
        )),
    }
}

/// Draws one erasure pattern for a trace: bit `i` is erased independently
/// with probability `p(W_i)` given the sojourns (or with the current Markov
/// state's probability).
pub fn sample_pattern(
    trace: &SojournTrace,
    model: &ErasureModel,
    seed: u64,
) -> Result<ErasurePattern> {
    if trace.is_empty() {
        return Err(Error::InvalidParam("trace is empty".into()));
    }
    model.validate()?;
    let n = trace.len();
    let mut bits = Vec::with_capacity(n);
    match model {
        ErasureModel::Markov {
            states,
            transition,
            initial,
        } => {
            let mut rng = Stream::new(seed, &[TAG_MARKOV]);
            let mut state = draw_categorical(initial, rng.next_f64());
            for _ in 0..n {
                bits.push(rng.bernoulli(states[state]));
                state = draw_categorical(&transition[state], rng.next_f64());
            }
        }
        _ => {
            for (i, &w) in trace.sojourns.iter().enumerate() {
                let p = erasure_probability(model, w)?;
                let mut rng = Stream::new(seed, &[TAG_PATTERN, (i + 1) as u64]);
                bits.push(rng.bernoulli(p));
            }
        }
    }
    Ok(ErasurePattern {
        bits,
        trace_seed: trace.seed,
    })
}

fn draw_categorical(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Applies an erasure pattern to a bit vector, producing channel outputs.
pub fn apply_erasures(x: &[u8], pattern: &ErasurePattern) -> Result<Vec<Symbol>> {
    if x.len() != pattern.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: pattern.len(),
        });
    }
    Ok(x.iter()
        .zip(&pattern.bits)
        .map(|(&b, &erased)| {
            if erased {
                Symbol::Erased
            } else {
                Symbol::from_bit(b)
            }
        })
        .collect())
}

/// Stationary erasure probability of M/M/1 + exponential model:
/// `E_pi[p(W)] = kappa / (mu - lambda + kappa)`.
pub fn mean_erasure_analytic(lambda: f64, mu: f64, kappa: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < mu) {
        return Err(Error::Unstable { lambda, mu });
    }
    if !(kappa >= 0.0) {
        return Err(Error::InvalidParam(format!("kappa must be >= 0, got {kappa}")));
    }
    Ok(kappa / (mu - lambda + kappa))
}

/// Capacity in both units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacity {
    pub bits_per_sec: f64,
    pub bits_per_use: f64,
}

/// Closed-form EQC capacity for M/M/1 + exponential model:
/// `lambda (mu - lambda) / (mu - lambda + kappa)` bits/sec.
pub fn capacity_analytic(lambda: f64, mu: f64, kappa: f64) -> Result<Capacity> {
    let mean_erasure = mean_erasure_analytic(lambda, mu, kappa)?;
    let per_use = 1.0 - mean_erasure;
    Ok(Capacity {
        bits_per_sec: lambda * per_use,
        bits_per_use: per_use,
    })
}

/// Monte Carlo estimate of `lambda * E_pi[1 - p(W)]` over a stationary trace.
///
/// Time-driven models average `1 - p(W_i)` directly; the Markov model counts
/// the clear fraction of one sampled pattern.
pub fn capacity_mc(
    params: &QueueParams,
    model: &ErasureModel,
    n: usize,
    seed: u64,
) -> Result<Estimate> {
    if n < 1_000 {
        return Err(Error::InvalidParam(format!(
            "capacity_mc needs n >= 1000, got {n}"
        )));
    }
    model.validate()?;
    let trace = simulate_sojourns(params, n, seed, InitMode::Stationary)?;
    let est = if model.is_markov() {
        let pattern = sample_pattern(&trace, model, seed)?;
        Estimate::binomial((n - pattern.erased_count()) as u64, n as u64)
    } else {
        let survive: Vec<f64> = trace
            .sojourns
            .iter()
            .map(|&w| 1.0 - erasure_probability(model, w).expect("time-driven model"))
            .collect();
        Estimate::mean(&survive)
    };
    Ok(Estimate {
        value: params.lambda * est.value,
        stderr: params.lambda * est.stderr,
    })
}

/// The capacity-maximizing arrival rate and its capacity, in closed form:
/// `lambda* = mu + kappa - sqrt(kappa^2 + mu kappa)`.
pub fn optimal_lambda(mu: f64, kappa: f64) -> Result<(f64, Capacity)> {
    if !(mu > 0.0 && kappa > 0.0) {
        return Err(Error::InvalidParam(
            "mu and kappa must be positive".into(),
        ));
    }
    let lambda_star = mu + kappa - (kappa * kappa + mu * kappa).sqrt();
    let cap = capacity_analytic(lambda_star, mu, kappa)?;
    Ok((lambda_star, cap))
}
