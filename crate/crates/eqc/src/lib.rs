//! Simulation and coding for the erasure queue-channel (EQC).
//!
//! Bits sent over an EQC pass through a single-server FCFS queue, and each
//! bit is erased with a probability that depends on its sojourn time in the
//! queue. Because consecutive sojourn times are coupled through Lindley's
//! recursion, erasures arrive in correlated bursts; bits in different busy
//! periods of the queue, on the other hand, see independent channels.
//!
//! The crate provides:
//!
//! * [`queue`] — sojourn-time traces, busy-period statistics, and tail bounds
//!   on the number of bits per busy period;
//! * [`channel`] — erasure-probability models, pattern sampling, and the
//!   channel capacity in closed form and by Monte Carlo;
//! * [`polar`] — the Arıkan transform, successive-cancellation decoding on
//!   erasures, Monte Carlo code construction, and polarization diagnostics;
//! * [`ldpc`] — alist parsing, GF(2) systematic encoding, and peeling
//!   decoding;
//! * [`wrapper`] — the interleaving wrapper that spreads the symbols of each
//!   inner codeword across distinct busy periods;
//! * [`analytic`] — closed-form results for consecutive sojourn times and the
//!   (2,1) repetition code;
//! * [`harness`] — experiment configs, sweeps, CSV output, and plot scripts.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod analytic;
pub mod channel;
pub mod harness;
pub mod ldpc;
pub mod polar;
pub mod queue;
pub mod rng;
pub mod wrapper;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unstable queue: lambda = {lambda} must be < mu = {mu}")]
    Unstable { lambda: f64, mu: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("stationary initialization requires exponential arrivals and services (M/M/1)")]
    StationaryRequiresMm1,
    #[error("unsupported query: {0}")]
    UnsupportedQuery(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("alist parse error at line {line}: {msg}")]
    Alist { line: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("malformed symbol in received word at position {0}")]
    MalformedSymbol(usize),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// A Monte Carlo estimate together with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Binomial proportion estimate from `successes` out of `trials`.
    pub fn binomial(successes: u64, trials: u64) -> Estimate {
        assert!(trials > 0);
        let p = successes as f64 / trials as f64;
        Estimate {
            value: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }

    /// Sample-mean estimate from a slice of observations.
    pub fn mean(samples: &[f64]) -> Estimate {
        assert!(!samples.is_empty());
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Estimate {
            value: mean,
            stderr: (var / n).sqrt(),
        }
    }
}
