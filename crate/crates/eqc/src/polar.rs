//! Polar coding over the erasure queue-channel.
//!
//! The encoder applies the Arıkan transform `x = u F_N G_N` (bit reversal
//! first, then the n-th Kronecker power of the `[[1,0],[1,1]]` kernel). With
//! that convention the codeword pairs adjacent outputs:
//!
//! ```text
//! x[2i]   = a[i] ^ b[i]      a = transform of the first half of u
//! x[2i+1] = b[i]             b = transform of the second half of u
//! ```
//!
//! On an erasure channel, whether successive cancellation can determine a
//! given `u_i` depends only on the erasure pattern, never on the data. The
//! per-realization determinability recursion ([`erasure_propagate`]) is the
//! workhorse: Monte Carlo code construction, the fast block-error path, and
//! the polarization diagnostics all run on it. Because EQC erasures are
//! correlated across a busy period, the synthetic-channel statistics have no
//! closed-form recursion and are estimated from sampled patterns.

use crate::channel::{sample_pattern, ErasureModel, ErasurePattern, Symbol};
use crate::queue::{simulate_sojourns, InitMode, QueueParams};
use crate::rng::{mix, Stream};
use crate::{Error, Estimate, Result};
use rayon::prelude::*;
use std::fmt::Write as _;

const TAG_TRIAL: u64 = 0x70;
const TAG_MSG: u64 = 0x71;

/// Applies the polar transform to a bit vector of length `2^n`.
pub fn polar_transform(u: &[u8]) -> Result<Vec<u8>> {
    if !u.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(u.len()));
    }
    let mut x = u.to_vec();
    transform_in_place(&mut x);
    Ok(x)
}

fn transform_in_place(x: &mut [u8]) {
    let n = x.len();
    if n <= 1 {
        return;
    }
    let half = n / 2;
    let (a, b) = x.split_at_mut(half);
    transform_in_place(a);
    transform_in_place(b);
    // Interleave: out[2i] = a[i]^b[i], out[2i+1] = b[i].
    let mut out = vec![0u8; n];
    for i in 0..half {
        out[2 * i] = a[i] ^ b[i];
        out[2 * i + 1] = b[i];
    }
    x.copy_from_slice(&out);
}

/// Per-synthetic-index determinability for one erasure realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticIndicator {
    /// `true` where the synthetic index is erased (undetermined by the clear
    /// outputs and genie bits).
    pub erased: Vec<bool>,
}

impl SyntheticIndicator {
    pub fn len(&self) -> usize {
        self.erased.len()
    }

    pub fn is_empty(&self) -> bool {
        self.erased.is_empty()
    }

    pub fn erased_count(&self) -> usize {
        self.erased.iter().filter(|&&e| e).count()
    }
}

/// Genie-aided SC determinability of each `u_i` from an erasure pattern.
///
/// Adjacent outputs pair up; the minus stream needs both inputs clear, the
/// plus stream needs at least one. The recursion then applies to each stream,
/// with output ordered minus-block first to match the transform convention.
pub fn erasure_propagate(pattern: &ErasurePattern) -> Result<SyntheticIndicator> {
    if !pattern.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(pattern.len()));
    }
    let mut erased = pattern.bits.clone();
    propagate_in_place(&mut erased);
    Ok(SyntheticIndicator { erased })
}

fn propagate_in_place(e: &mut [bool]) {
    let n = e.len();
    if n <= 1 {
        return;
    }
    let half = n / 2;
    let mut split = vec![false; n];
    for i in 0..half {
        split[i] = e[2 * i] || e[2 * i + 1]; // minus: erased if either
        split[half + i] = e[2 * i] && e[2 * i + 1]; // plus: erased if both
    }
    propagate_in_place(&mut split[..half]);
    propagate_in_place(&mut split[half..]);
    e.copy_from_slice(&split);
}

/// Exact Bhattacharyya parameters of the `2^n` synthetic channels of an
/// i.i.d. BEC(`p`): `z -> (2z - z^2, z^2)`, minus branch first.
pub fn bec_z_recursion(p: f64, n: u32) -> Vec<f64> {
    fn rec(z: f64, n: u32, out: &mut Vec<f64>) {
        if n == 0 {
            out.push(z);
        } else {
            rec(2.0 * z - z * z, n - 1, out);
            rec(z * z, n - 1, out);
        }
    }
    let mut out = Vec::with_capacity(1 << n);
    rec(p, n, &mut out);
    out
}

/// Synthetic-channel erasure estimates from Monte Carlo over fresh traces.
#[derive(Debug, Clone)]
pub struct SyntheticEstimates {
    pub z: Vec<f64>,
    pub stderr: Vec<f64>,
    pub trials: usize,
}

/// Estimates `z[i]` as the fraction of trials in which index `i` is flagged
/// erased, over patterns sampled from fresh stationary traces.
pub fn estimate_synthetics(
    params: &QueueParams,
    model: &ErasureModel,
    n: u32,
    trials: usize,
    seed: u64,
) -> Result<SyntheticEstimates> {
    if trials < 100 {
        return Err(Error::InvalidParam(format!(
            "estimate_synthetics needs >= 100 trials, got {trials}"
        )));
    }
    params.validate()?;
    model.validate()?;
    let len = 1usize << n;
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = mix(seed, &[TAG_TRIAL, t as u64]);
            let trace = simulate_sojourns(params, len, trial_seed, InitMode::Stationary)
                .expect("params validated");
            let pattern =
                sample_pattern(&trace, model, mix(trial_seed, &[1])).expect("model validated");
            let ind = erasure_propagate(&pattern).expect("power of two");
            ind.erased
        })
        .fold(
            || vec![0u32; len],
            |mut acc, erased| {
                for (a, e) in acc.iter_mut().zip(&erased) {
                    *a += u32::from(*e);
                }
                acc
            },
        )
        .reduce(
            || vec![0u32; len],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );
    let t = trials as f64;
    let z: Vec<f64> = counts.iter().map(|&c| c as f64 / t).collect();
    let stderr = z.iter().map(|&p| (p * (1.0 - p) / t).sqrt()).collect();
    Ok(SyntheticEstimates {
        z,
        stderr,
        trials,
    })
}

/// A constructed polar code: block length, frozen set, and the statistics
/// that produced it.
#[derive(Debug, Clone)]
pub struct PolarCode {
    /// log2 of the block length.
    pub n: u32,
    /// Sorted frozen indices (0-based), size `N - K`.
    pub frozen: Vec<usize>,
    /// Per-index synthetic erasure estimates the frozen set was chosen from.
    pub z_estimates: Vec<f64>,
    /// Free-form provenance of the construction run.
    pub design: String,
}

impl PolarCode {
    pub fn block_len(&self) -> usize {
        1usize << self.n
    }

    pub fn message_len(&self) -> usize {
        self.block_len() - self.frozen.len()
    }

    pub fn rate(&self) -> f64 {
        self.message_len() as f64 / self.block_len() as f64
    }

    pub fn frozen_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.block_len()];
        for &i in &self.frozen {
            mask[i] = true;
        }
        mask
    }

    /// Information (unfrozen) indices in increasing order.
    pub fn info_indices(&self) -> Vec<usize> {
        let mask = self.frozen_mask();
        (0..self.block_len()).filter(|&i| !mask[i]).collect()
    }

    /// Warns when the design rate violates `lambda * R < C(lambda)` for the
    /// provenance channel, if one is attached.
    pub fn rate_condition_warning(&self, lambda: f64, capacity_bits_per_sec: f64) -> Option<String> {
        let rate_bits_per_sec = lambda * self.rate();
        if rate_bits_per_sec >= capacity_bits_per_sec {
            Some(format!(
                "design rate {} at lambda {lambda} gives {rate_bits_per_sec} bits/sec, at or above capacity {capacity_bits_per_sec}",
                self.rate()
            ))
        } else {
            None
        }
    }
}

/// Freezes the `N - K` indices with the largest erasure estimates; on ties
/// the lower index is frozen first.
pub fn construct(z_estimates: &[f64], k: usize, design: impl Into<String>) -> Result<PolarCode> {
    let len = z_estimates.len();
    if !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    if k > len {
        return Err(Error::InvalidParam(format!(
            "message length {k} exceeds block length {len}"
        )));
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| {
        z_estimates[b]
            .partial_cmp(&z_estimates[a])
            .expect("z estimates must not be NaN")
            .then(a.cmp(&b))
    });
    let mut frozen: Vec<usize> = order[..len - k].to_vec();
    frozen.sort_unstable();
    Ok(PolarCode {
        n: len.trailing_zeros(),
        frozen,
        z_estimates: z_estimates.to_vec(),
        design: design.into(),
    })
}

/// Monte Carlo construction for a queue-channel pair, recording provenance.
pub fn design_code(
    params: &QueueParams,
    model: &ErasureModel,
    n: u32,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<PolarCode> {
    let est = estimate_synthetics(params, model, n, trials, seed)?;
    let design = format!(
        "lambda={} mu={} model={:?} trials={trials} seed={seed}",
        params.lambda, params.mu, model
    );
    construct(&est.z, k, design)
}

/// Places the message on the information indices, zeros on the frozen ones,
/// and applies the transform.
pub fn encode(code: &PolarCode, message: &[u8]) -> Result<Vec<u8>> {
    if message.len() != code.message_len() {
        return Err(Error::LengthMismatch {
            expected: code.message_len(),
            got: message.len(),
        });
    }
    let mut u = vec![0u8; code.block_len()];
    for (&idx, &bit) in code.info_indices().iter().zip(message) {
        u[idx] = bit & 1;
    }
    polar_transform(&u)
}

/// Outcome of successive-cancellation decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    Message(Vec<u8>),
    /// Some information index was undetermined by the clear outputs and the
    /// previously decoded bits. Counted as a block error.
    Failure,
}

/// Erasure-filling successive cancellation.
///
/// Frozen indices are fixed to zero; an information index that cannot be
/// determined triggers [`DecodeOutcome::Failure`]. With no undetermined
/// information index the returned message equals the transmitted one exactly.
pub fn sc_decode(code: &PolarCode, y: &[Symbol]) -> Result<DecodeOutcome> {
    if y.len() != code.block_len() {
        return Err(Error::LengthMismatch {
            expected: code.block_len(),
            got: y.len(),
        });
    }
    let frozen = code.frozen_mask();
    let mut u = vec![0u8; code.block_len()];
    if !sc_rec(y, &frozen, 0, &mut u) {
        return Ok(DecodeOutcome::Failure);
    }
    let message = code.info_indices().iter().map(|&i| u[i]).collect();
    Ok(DecodeOutcome::Message(message))
}

fn sc_rec(y: &[Symbol], frozen: &[bool], offset: usize, u: &mut [u8]) -> bool {
    let n = y.len();
    if n == 1 {
        if frozen[offset] {
            u[offset] = 0;
            return true;
        }
        return match y[0].bit() {
            Some(b) => {
                u[offset] = b;
                true
            }
            None => false,
        };
    }
    let half = n / 2;
    let y_minus: Vec<Symbol> = (0..half).map(|i| sym_xor(y[2 * i], y[2 * i + 1])).collect();
    if !sc_rec(&y_minus, frozen, offset, u) {
        return false;
    }
    // Re-encode the decoded first half to cancel it from the plus stream.
    let mut a = u[offset..offset + half].to_vec();
    transform_in_place(&mut a);
    let y_plus: Vec<Symbol> = (0..half)
        .map(|i| match (y[2 * i].bit(), y[2 * i + 1].bit()) {
            (_, Some(b)) => Symbol::from_bit(b),
            (Some(b), None) => Symbol::from_bit(b ^ a[i]),
            (None, None) => Symbol::Erased,
        })
        .collect();
    sc_rec(&y_plus, frozen, offset + half, u)
}

fn sym_xor(a: Symbol, b: Symbol) -> Symbol {
    match (a.bit(), b.bit()) {
        (Some(x), Some(y)) => Symbol::from_bit(x ^ y),
        _ => Symbol::Erased,
    }
}

/// Block error rate of a polar code over the EQC.
///
/// Uses the pattern-only fast path: on an erasure channel a block fails iff
/// [`erasure_propagate`] flags some information index, independent of the
/// data. [`bler_slow`] re-runs the same trials through encode/decode and must
/// agree trial for trial.
pub fn bler(
    params: &QueueParams,
    model: &ErasureModel,
    code: &PolarCode,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    if trials < 1 {
        return Err(Error::InvalidParam("trials must be >= 1".into()));
    }
    params.validate()?;
    model.validate()?;
    let failures: u64 = (0..trials)
        .into_par_iter()
        .map(|t| u64::from(trial_fails_fast(params, model, code, seed, t)))
        .sum();
    Ok(Estimate::binomial(failures, trials as u64))
}

fn trial_fails_fast(
    params: &QueueParams,
    model: &ErasureModel,
    code: &PolarCode,
    seed: u64,
    trial: usize,
) -> bool {
    if code.message_len() == 0 {
        return false;
    }
    let pattern = trial_pattern(params, model, code.block_len(), seed, trial);
    let ind = erasure_propagate(&pattern).expect("power of two");
    let frozen = code.frozen_mask();
    ind.erased
        .iter()
        .zip(&frozen)
        .any(|(&erased, &frozen)| erased && !frozen)
}

fn trial_pattern(
    params: &QueueParams,
    model: &ErasureModel,
    len: usize,
    seed: u64,
    trial: usize,
) -> ErasurePattern {
    let trial_seed = mix(seed, &[TAG_TRIAL, trial as u64]);
    let trace = simulate_sojourns(params, len, trial_seed, InitMode::Stationary)
        .expect("params validated");
    sample_pattern(&trace, model, mix(trial_seed, &[1])).expect("model validated")
}

/// Slow-path block error rate: encodes a random message per trial, transmits
/// it, and SC-decodes. Shares trial seeds with [`bler`].
pub fn bler_slow(
    params: &QueueParams,
    model: &ErasureModel,
    code: &PolarCode,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    let failures: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            if code.message_len() == 0 {
                return 0u64;
            }
            let pattern = trial_pattern(params, model, code.block_len(), seed, t);
            let mut msg_rng = Stream::new(seed, &[TAG_MSG, t as u64]);
            let message: Vec<u8> = (0..code.message_len())
                .map(|_| (msg_rng.next_u64() & 1) as u8)
                .collect();
            let x = encode(code, &message).expect("lengths match");
            let y = crate::channel::apply_erasures(&x, &pattern).expect("lengths match");
            let failed = match sc_decode(code, &y).expect("length matches") {
                DecodeOutcome::Message(decoded) => decoded != message,
                DecodeOutcome::Failure => true,
            };
            u64::from(failed)
        })
        .sum();
    Ok(Estimate::binomial(failures, trials as u64))
}

/// Fractions of synthetic indices with `z < epsilon` and `z > 1 - epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationFractions {
    pub low_fraction: f64,
    pub high_fraction: f64,
}

pub fn polarization_fractions(z_estimates: &[f64], epsilon: f64) -> Result<PolarizationFractions> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParam(format!(
            "epsilon must lie in (0, 0.5), got {epsilon}"
        )));
    }
    let n = z_estimates.len() as f64;
    let low = z_estimates.iter().filter(|&&z| z < epsilon).count() as f64 / n;
    let high = z_estimates.iter().filter(|&&z| z > 1.0 - epsilon).count() as f64 / n;
    Ok(PolarizationFractions {
        low_fraction: low,
        high_fraction: high,
    })
}

/// Serializes a code to the construct-once/evaluate-many text format.
pub fn code_to_text(code: &PolarCode) -> String {
    let mut s = String::new();
    writeln!(s, "eqc-polar-code v1").unwrap();
    writeln!(s, "n {}", code.n).unwrap();
    writeln!(s, "k {}", code.message_len()).unwrap();
    writeln!(s, "design {}", code.design).unwrap();
    let frozen: Vec<String> = code.frozen.iter().map(|i| i.to_string()).collect();
    writeln!(s, "frozen {}", frozen.join(" ")).unwrap();
    for &z in &code.z_estimates {
        writeln!(s, "{:.16e}", z).unwrap();
    }
    s
}

pub fn code_from_text(text: &str) -> Result<PolarCode> {
    let mut lines = text.lines();
    let bad = |msg: &str| Error::InvalidParam(format!("polar code file: {msg}"));
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    if header.trim() != "eqc-polar-code v1" {
        return Err(bad("unrecognized header"));
    }
    let mut n = None;
    let mut k = None;
    let mut design = String::new();
    let mut frozen: Option<Vec<usize>> = None;
    let mut z = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("n ") {
            n = Some(rest.trim().parse::<u32>().map_err(|e| bad(&e.to_string()))?);
        } else if let Some(rest) = line.strip_prefix("k ") {
            k = Some(rest.trim().parse::<usize>().map_err(|e| bad(&e.to_string()))?);
        } else if let Some(rest) = line.strip_prefix("design ") {
            design = rest.to_string();
        } else if let Some(rest) = line.strip_prefix("frozen") {
            let idx: std::result::Result<Vec<usize>, _> =
                rest.split_whitespace().map(str::parse).collect();
            frozen = Some(idx.map_err(|e| bad(&format!("frozen list: {e}")))?);
        } else {
            z.push(line.parse::<f64>().map_err(|e| bad(&e.to_string()))?);
        }
    }
    let n = n.ok_or_else(|| bad("missing n"))?;
    let k = k.ok_or_else(|| bad("missing k"))?;
    let frozen = frozen.ok_or_else(|| bad("missing frozen list"))?;
    let len = 1usize << n;
    if z.len() != len {
        return Err(bad(&format!("expected {len} z values, got {}", z.len())));
    }
    if frozen.len() != len - k {
        return Err(bad(&format!(
            "frozen list has {} entries, expected {}",
            frozen.len(),
            len - k
        )));
    }
    if frozen.iter().any(|&i| i >= len) {
        return Err(bad("frozen index out of range"));
    }
    Ok(PolarCode {
        n,
        frozen,
        z_estimates: z,
        design,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ErasureModel;
    use crate::queue::QueueParams;
    use crate::rng::Stream;

    fn pattern(bits: &[bool]) -> ErasurePattern {
        ErasurePattern {
            bits: bits.to_vec(),
            trace_seed: 0,
        }
    }

    #[test]
    fn kernel_and_identity() {
        assert_eq!(polar_transform(&[1]).unwrap(), vec![1]); // n = 0
        assert_eq!(polar_transform(&[1, 0]).unwrap(), vec![1, 0]);
        assert_eq!(polar_transform(&[1, 1]).unwrap(), vec![0, 1]);
        assert_eq!(polar_transform(&[0, 1]).unwrap(), vec![1, 1]);
    }

    #[test]
    fn n2_known_vector() {
        // Bit-reversal-first convention: (0,1,0,0) -> (1,0,1,0).
        assert_eq!(polar_transform(&[0, 1, 0, 0]).unwrap(), vec![1, 0, 1, 0]);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(polar_transform(&[1, 0, 1]).is_err());
        assert!(erasure_propagate(&pattern(&[true, false, true])).is_err());
    }

    #[test]
    fn transform_is_involution() {
        let mut rng = Stream::new(1, &[]);
        for n in [2usize, 4, 8, 16] {
            for _ in 0..200 {
                let u: Vec<u8> = (0..n).map(|_| (rng.next_u64() & 1) as u8).collect();
                let back = polar_transform(&polar_transform(&u).unwrap()).unwrap();
                assert_eq!(back, u);
            }
        }
    }

    #[test]
    fn transform_matches_matrix_oracle() {
        // x = u F G with F the bit-reversal permutation and G the subset
        // indicator (G[i][j] = 1 iff j's bits are a subset of i's).
        for n in 1..=4u32 {
            let len = 1usize << n;
            for val in 0..(1u32 << len) {
                let u: Vec<u8> = (0..len).map(|i| ((val >> i) & 1) as u8).collect();
                let mut v = vec![0u8; len];
                for (j, slot) in v.iter_mut().enumerate() {
                    let r = bitrev(j, n);
                    *slot = u[r];
                }
                let mut x = vec![0u8; len];
                for (j, slot) in x.iter_mut().enumerate() {
                    let mut acc = 0u8;
                    for (i, &vi) in v.iter().enumerate() {
                        if i & j == j {
                            acc ^= vi;
                        }
                    }
                    *slot = acc;
                }
                assert_eq!(polar_transform(&u).unwrap(), x, "n={n} u={u:?}");
                if len > 64 {
                    break;
                }
            }
        }
    }

    fn bitrev(mut i: usize, n: u32) -> usize {
        let mut out = 0;
        for _ in 0..n {
            out = (out << 1) | (i & 1);
            i >>= 1;
        }
        out
    }

    #[test]
    fn propagate_small_cases() {
        let ind = erasure_propagate(&pattern(&[false, false])).unwrap();
        assert_eq!(ind.erased, vec![false, false]);
        let ind = erasure_propagate(&pattern(&[true, false])).unwrap();
        assert_eq!(ind.erased, vec![true, false]);
        let ind = erasure_propagate(&pattern(&[true, false, false, true])).unwrap();
        assert_eq!(ind.erased, vec![true, true, false, false]);
    }

    #[test]
    fn propagate_conserves_erasure_mass() {
        let mut rng = Stream::new(9, &[]);
        for _ in 0..200 {
            let bits: Vec<bool> = (0..1024).map(|_| rng.next_u64() & 1 == 1).collect();
            let p = pattern(&bits);
            let ind = erasure_propagate(&p).unwrap();
            assert_eq!(ind.erased_count(), p.erased_count());
        }
    }

    #[test]
    fn bec_recursion_n3() {
        let z = bec_z_recursion(0.5, 3);
        let expect = [
            0.99609375, 0.87890625, 0.80859375, 0.31640625, 0.68359375, 0.19140625, 0.12109375,
            0.00390625,
        ];
        for (a, b) in z.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn construct_extremes_and_ties() {
        let z = bec_z_recursion(0.5, 3);
        let code = construct(&z, 8, "test").unwrap();
        assert!(code.frozen.is_empty());
        let code = construct(&z, 0, "test").unwrap();
        assert_eq!(code.frozen.len(), 8);
        // BEC(0.5), N=8, K=4: frozen set holds the four largest Z values.
        let code = construct(&z, 4, "test").unwrap();
        assert_eq!(code.frozen, vec![0, 1, 2, 4]);
        // Tie: lower index frozen first.
        let code = construct(&[0.5, 0.5, 0.1, 0.9], 2, "test").unwrap();
        assert_eq!(code.frozen, vec![0, 3]);
        assert!(construct(&z, 9, "test").is_err());
    }

    #[test]
    fn encode_basics() {
        let code = construct(&bec_z_recursion(0.5, 2), 4, "rate 1").unwrap();
        let msg = [1, 0, 1, 1];
        assert_eq!(
            encode(&code, &msg).unwrap(),
            polar_transform(&msg).unwrap()
        );
        // Zero message -> zero codeword.
        let code = construct(&bec_z_recursion(0.5, 2), 2, "test").unwrap();
        assert_eq!(encode(&code, &[0, 0]).unwrap(), vec![0; 4]);
        // N=4, frozen {0,1}: message placed on indices 2 and 3.
        let code = construct(&[0.9, 0.8, 0.2, 0.1], 2, "test").unwrap();
        assert_eq!(code.frozen, vec![0, 1]);
        assert_eq!(
            encode(&code, &[1, 0]).unwrap(),
            polar_transform(&[0, 0, 1, 0]).unwrap()
        );
    }

    #[test]
    fn decode_no_erasures_roundtrip() {
        let mut rng = Stream::new(4, &[]);
        let code = construct(&bec_z_recursion(0.3, 6), 32, "test").unwrap();
        for _ in 0..100 {
            let msg: Vec<u8> = (0..32).map(|_| (rng.next_u64() & 1) as u8).collect();
            let x = encode(&code, &msg).unwrap();
            let y: Vec<Symbol> = x.iter().map(|&b| Symbol::from_bit(b)).collect();
            assert_eq!(sc_decode(&code, &y).unwrap(), DecodeOutcome::Message(msg));
        }
    }

    #[test]
    fn decode_all_erased_fails() {
        let code = construct(&bec_z_recursion(0.5, 3), 4, "test").unwrap();
        let y = vec![Symbol::Erased; 8];
        assert_eq!(sc_decode(&code, &y).unwrap(), DecodeOutcome::Failure);
    }

    #[test]
    fn failure_iff_propagate_flags_info_index() {
        // Exhaustive over all patterns at N = 8.
        let code = construct(&bec_z_recursion(0.5, 3), 4, "test").unwrap();
        let frozen = code.frozen_mask();
        let msg = [1u8, 0, 1, 1];
        let x = encode(&code, &msg).unwrap();
        for bits in 0u32..256 {
            let p = pattern(&(0..8).map(|i| (bits >> i) & 1 == 1).collect::<Vec<_>>());
            let ind = erasure_propagate(&p).unwrap();
            let should_fail = ind
                .erased
                .iter()
                .zip(&frozen)
                .any(|(&e, &f)| e && !f);
            let y = crate::channel::apply_erasures(&x, &p).unwrap();
            let outcome = sc_decode(&code, &y).unwrap();
            match outcome {
                DecodeOutcome::Failure => assert!(should_fail, "pattern {bits:08b}"),
                DecodeOutcome::Message(m) => {
                    assert!(!should_fail, "pattern {bits:08b}");
                    assert_eq!(m, msg);
                }
            }
        }
    }

    #[test]
    fn estimate_synthetics_bec_degeneracy() {
        // Constant model = i.i.d. BEC; estimates must match the exact
        // recursion within 3 sigma per index.
        let params = QueueParams::mm1(0.5, 1.0).unwrap();
        let model = ErasureModel::constant(0.5).unwrap();
        let est = estimate_synthetics(&params, &model, 3, 20_000, 11).unwrap();
        let exact = bec_z_recursion(0.5, 3);
        for i in 0..8 {
            let sigma = (exact[i] * (1.0 - exact[i]) / 20_000.0).sqrt();
            assert!(
                (est.z[i] - exact[i]).abs() <= 3.0 * sigma,
                "index {i}: {} vs {}",
                est.z[i],
                exact[i]
            );
        }
    }

    #[test]
    fn estimate_synthetics_clear_channel() {
        let params = QueueParams::mm1(0.5, 1.0).unwrap();
        let model = ErasureModel::constant(0.0).unwrap();
        let est = estimate_synthetics(&params, &model, 4, 200, 1).unwrap();
        assert!(est.z.iter().all(|&z| z == 0.0));
    }

    #[test]
    fn synthetic_mean_matches_erasure_rate() {
        // Mass conservation: mean of z equals the channel's mean erasure
        // rate within MC noise.
        let params = QueueParams::mm1(0.77, 1.0).unwrap();
        let model = ErasureModel::exponential(0.1).unwrap();
        let est = estimate_synthetics(&params, &model, 5, 2_000, 2).unwrap();
        let mean_z = est.z.iter().sum::<f64>() / est.z.len() as f64;
        let expect = crate::channel::mean_erasure_analytic(0.77, 1.0, 0.1).unwrap();
        assert!((mean_z - expect).abs() < 0.02, "mean z {mean_z}");
    }

    #[test]
    fn fast_and_slow_bler_agree() {
        let params = QueueParams::mm1(0.77, 1.0).unwrap();
        let model = ErasureModel::exponential(0.1).unwrap();
        let code = design_code(&params, &model, 6, 32, 500, 3).unwrap();
        let fast = bler(&params, &model, &code, 2_000, 77).unwrap();
        let slow = bler_slow(&params, &model, &code, 2_000, 77).unwrap();
        assert_eq!(fast.value, slow.value);
    }

    #[test]
    fn bler_zero_rate_is_zero() {
        let params = QueueParams::mm1(0.77, 1.0).unwrap();
        let model = ErasureModel::constant(0.9).unwrap();
        let code = construct(&vec![0.5; 16], 0, "test").unwrap();
        let est = bler(&params, &model, &code, 100, 1).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn bler_matches_iid_bec_reference() {
        // Constant p = 0.3: compare the EQC machinery against a direct
        // i.i.d. BEC simulation of the same code on its own seeds.
        let params = QueueParams::mm1(0.5, 1.0).unwrap();
        let model = ErasureModel::constant(0.3).unwrap();
        let z = bec_z_recursion(0.3, 8);
        let code = construct(&z, 128, "bec oracle").unwrap();
        let est = bler(&params, &model, &code, 10_000, 5).unwrap();
        // Reference: sample i.i.d. patterns directly, no queue.
        let frozen = code.frozen_mask();
        let mut rng = Stream::new(1234, &[]);
        let mut failures = 0u64;
        let trials = 10_000;
        for _ in 0..trials {
            let bits: Vec<bool> = (0..256).map(|_| rng.next_f64() < 0.3).collect();
            let ind = erasure_propagate(&pattern(&bits)).unwrap();
            if ind.erased.iter().zip(&frozen).any(|(&e, &f)| e && !f) {
                failures += 1;
            }
        }
        let reference = Estimate::binomial(failures, trials);
        let sigma = (est.stderr.powi(2) + reference.stderr.powi(2)).sqrt();
        assert!(
            (est.value - reference.value).abs() <= 3.0 * sigma,
            "eqc-machinery {} direct {}",
            est.value,
            reference.value
        );
    }

    #[test]
    fn polarization_fraction_basics() {
        let f = polarization_fractions(&[0.0; 8], 0.01).unwrap();
        assert_eq!(f.low_fraction, 1.0);
        assert_eq!(f.high_fraction, 0.0);
        assert!(polarization_fractions(&[0.0], 0.6).is_err());
        let z = bec_z_recursion(0.5, 10);
        let f = polarization_fractions(&z, 0.01).unwrap();
        assert!(f.low_fraction > 0.2 && f.high_fraction > 0.2);
    }

    #[test]
    fn code_text_roundtrip() {
        let params = QueueParams::mm1(0.77, 1.0).unwrap();
        let model = ErasureModel::exponential(0.1).unwrap();
        let code = design_code(&params, &model, 4, 8, 200, 9).unwrap();
        let text = code_to_text(&code);
        let back = code_from_text(&text).unwrap();
        assert_eq!(back.n, code.n);
        assert_eq!(back.frozen, code.frozen);
        assert_eq!(back.z_estimates, code.z_estimates);
        assert_eq!(back.design, code.design);
    }
}
