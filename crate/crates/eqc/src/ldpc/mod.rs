//! LDPC codes on the erasure queue-channel.
//!
//! Parity-check matrices arrive as alist files (or from the seeded regular
//! construction); encoding is systematic via GF(2) Gaussian elimination, and
//! decoding is iterative erasure filling — the BEC specialization of the
//! sum-product decoder, which solves any check with exactly one erased
//! neighbor until it either clears the block or stalls on a stopping set.

mod alist;

pub use alist::{parse_alist, to_alist};

use crate::channel::{sample_pattern, ErasureModel, ErasurePattern, Symbol};
use crate::queue::{simulate_sojourns, InitMode, QueueParams};
use crate::rng::{mix, Stream};
use crate::{Error, Estimate, Result};
use rayon::prelude::*;

const TAG_TRIAL: u64 = 0x4c;
const TAG_WORD: u64 = 0x4d;

/// Sparse binary parity-check matrix with both adjacency views.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    /// Code length (columns).
    pub n: usize,
    /// Number of checks (rows).
    pub m: usize,
    /// Sorted row indices per column, 0-based.
    pub column_adjacency: Vec<Vec<usize>>,
    /// Sorted column indices per row, 0-based.
    pub row_adjacency: Vec<Vec<usize>>,
    /// Where the matrix came from (file path, generator tag).
    pub source: String,
}

impl ParityCheckMatrix {
    /// Builds the adjacency views from an explicit list of (row, col) entries.
    pub fn from_entries(n: usize, m: usize, entries: &[(usize, usize)]) -> Result<ParityCheckMatrix> {
        let mut column_adjacency = vec![Vec::new(); n];
        let mut row_adjacency = vec![Vec::new(); m];
        for &(r, c) in entries {
            if r >= m || c >= n {
                return Err(Error::InvalidParam(format!(
                    "entry ({r},{c}) out of range for {m}x{n} matrix"
                )));
            }
            column_adjacency[c].push(r);
            row_adjacency[r].push(c);
        }
        for list in column_adjacency.iter_mut().chain(row_adjacency.iter_mut()) {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParam("duplicate matrix entry".into()));
            }
        }
        Ok(ParityCheckMatrix {
            n,
            m,
            column_adjacency,
            row_adjacency,
            source: "entries".into(),
        })
    }
}

/// Dense GF(2) rows packed into u64 words.
#[derive(Debug, Clone)]
struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    fn zero(ncols: usize) -> BitRow {
        BitRow {
            words: vec![0; ncols.div_ceil(64)],
        }
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }
}

/// A parity-check matrix together with its systematic encoder.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    pub h: ParityCheckMatrix,
    /// GF(2) rank of H.
    pub rank: usize,
    /// Message length `n - rank` (rank-deficient H simply enlarges k).
    pub k: usize,
    /// Information positions (non-pivot columns of the RREF), sorted.
    pub info_cols: Vec<usize>,
    /// Pivot column per RREF row.
    pivot_cols: Vec<usize>,
    /// RREF rows restricted to the information columns: bit `j` of row `r`
    /// couples message bit `j` into pivot column `pivot_cols[r]`.
    parity_map: Vec<BitRow>,
}

impl LdpcCode {
    pub fn n(&self) -> usize {
        self.h.n
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.h.n as f64
    }

    /// Systematic encoding: message bits land on `info_cols`, pivot columns
    /// carry the parity determined by the RREF.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        let mut c = vec![0u8; self.h.n];
        for (&col, &bit) in self.info_cols.iter().zip(message) {
            c[col] = bit & 1;
        }
        for (r, &pivot) in self.pivot_cols.iter().enumerate() {
            let mut acc = 0u8;
            for (j, &bit) in message.iter().enumerate() {
                if bit & 1 == 1 && self.parity_map[r].get(j) {
                    acc ^= 1;
                }
            }
            c[pivot] = acc;
        }
        Ok(c)
    }

    /// Checks `H c = 0`.
    pub fn is_codeword(&self, c: &[u8]) -> bool {
        c.len() == self.h.n
            && self.h.row_adjacency.iter().all(|row| {
                row.iter().fold(0u8, |acc, &col| acc ^ (c[col] & 1)) == 0
            })
    }
}

/// Gaussian elimination over GF(2): rank, pivot structure, and the
/// systematic encoder.
pub fn build_code(h: &ParityCheckMatrix) -> LdpcCode {
    let mut rows: Vec<BitRow> = h
        .row_adjacency
        .iter()
        .map(|cols| {
            let mut row = BitRow::zero(h.n);
            for &c in cols {
                row.set(c);
            }
            row
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    for col in 0..h.n {
        let Some(pivot_row) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, pivot_row);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }

    let pivot_set: std::collections::HashSet<usize> = pivot_cols.iter().copied().collect();
    let info_cols: Vec<usize> = (0..h.n).filter(|c| !pivot_set.contains(c)).collect();
    let k = h.n - rank;

    // Row r of the RREF reads: c[pivot_cols[r]] = sum of c[f] over the info
    // columns f it touches.
    let parity_map: Vec<BitRow> = rows[..rank]
        .iter()
        .map(|row| {
            let mut packed = BitRow::zero(k);
            for (j, &f) in info_cols.iter().enumerate() {
                if row.get(f) {
                    packed.set(j);
                }
            }
            packed
        })
        .collect();

    LdpcCode {
        h: h.clone(),
        rank,
        k,
        info_cols,
        pivot_cols,
        parity_map,
    }
}

/// Outcome of erasure decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LdpcOutcome {
    Codeword(Vec<u8>),
    /// Peeling stalled on a stopping set.
    Failure,
}

/// Iterative erasure filling: solves any check with exactly one erased
/// neighbor until no erasure remains or no check makes progress.
pub fn erasure_decode(code: &LdpcCode, y: &[Symbol]) -> Result<LdpcOutcome> {
    if y.len() != code.h.n {
        return Err(Error::LengthMismatch {
            expected: code.h.n,
            got: y.len(),
        });
    }
    let h = &code.h;
    let mut value = vec![0u8; h.n];
    let mut erased = vec![false; h.n];
    let mut remaining = 0usize;
    for (i, &sym) in y.iter().enumerate() {
        match sym.bit() {
            Some(b) => value[i] = b,
            None => {
                erased[i] = true;
                remaining += 1;
            }
        }
    }
    // Per-check state: number of erased neighbors and running parity of the
    // known ones.
    let mut erased_count = vec![0usize; h.m];
    let mut parity = vec![0u8; h.m];
    for (r, cols) in h.row_adjacency.iter().enumerate() {
        for &c in cols {
            if erased[c] {
                erased_count[r] += 1;
            } else {
                parity[r] ^= value[c];
            }
        }
    }
    let mut worklist: Vec<usize> = (0..h.m).filter(|&r| erased_count[r] == 1).collect();
    while let Some(r) = worklist.pop() {
        if erased_count[r] != 1 {
            continue;
        }
        let col = *h.row_adjacency[r]
            .iter()
            .find(|&&c| erased[c])
            .expect("one erased neighbor");
        let bit = parity[r];
        value[col] = bit;
        erased[col] = false;
        remaining -= 1;
        for &r2 in &h.column_adjacency[col] {
            erased_count[r2] -= 1;
            parity[r2] ^= bit;
            if erased_count[r2] == 1 {
                worklist.push(r2);
            }
        }
    }
    if remaining == 0 {
        Ok(LdpcOutcome::Codeword(value))
    } else {
        Ok(LdpcOutcome::Failure)
    }
}

/// Pattern-only decodability: peeling progress depends on which positions are
/// erased, never on the transmitted values.
pub fn pattern_decodable(h: &ParityCheckMatrix, pattern: &[bool], max_resolved: usize) -> bool {
    let mut erased = pattern.to_vec();
    let mut remaining = erased.iter().filter(|&&e| e).count();
    let mut erased_count = vec![0usize; h.m];
    for (r, cols) in h.row_adjacency.iter().enumerate() {
        erased_count[r] = cols.iter().filter(|&&c| erased[c]).count();
    }
    let mut worklist: Vec<usize> = (0..h.m).filter(|&r| erased_count[r] == 1).collect();
    let mut resolved = 0usize;
    while let Some(r) = worklist.pop() {
        if erased_count[r] != 1 {
            continue;
        }
        if resolved >= max_resolved {
            break;
        }
        let col = *h.row_adjacency[r]
            .iter()
            .find(|&&c| erased[c])
            .expect("one erased neighbor");
        erased[col] = false;
        remaining -= 1;
        resolved += 1;
        for &r2 in &h.column_adjacency[col] {
            erased_count[r2] -= 1;
            if erased_count[r2] == 1 {
                worklist.push(r2);
            }
        }
    }
    remaining == 0
}

/// Block error rate of peeling decoding over the EQC.
///
/// The fast path peels the erasure pattern directly; [`bler_slow`] transmits
/// random codewords on the same trial seeds and must agree trial for trial.
/// `max_iters` caps the number of symbols the peeler may resolve (peeling
/// terminates within `n` resolutions regardless).
pub fn bler(
    params: &QueueParams,
    model: &ErasureModel,
    code: &LdpcCode,
    trials: usize,
    seed: u64,
    max_iters: usize,
) -> Result<Estimate> {
    if trials < 1 {
        return Err(Error::InvalidParam("trials must be >= 1".into()));
    }
    params.validate()?;
    model.validate()?;
    let failures: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let pattern = trial_pattern(params, model, code.h.n, seed, t);
            u64::from(!pattern_decodable(&code.h, &pattern.bits, max_iters))
        })
        .sum();
    Ok(Estimate::binomial(failures, trials as u64))
}

/// Slow-path block error rate: encode a random message, erase, peel, compare.
pub fn bler_slow(
    params: &QueueParams,
    model: &ErasureModel,
    code: &LdpcCode,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    let failures: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let pattern = trial_pattern(params, model, code.h.n, seed, t);
            let mut rng = Stream::new(seed, &[TAG_WORD, t as u64]);
            let message: Vec<u8> = (0..code.k).map(|_| (rng.next_u64() & 1) as u8).collect();
            let c = code.encode(&message).expect("length matches");
            let y = crate::channel::apply_erasures(&c, &pattern).expect("length matches");
            let failed = match erasure_decode(code, &y).expect("length matches") {
                LdpcOutcome::Codeword(decoded) => decoded != c,
                LdpcOutcome::Failure => true,
            };
            u64::from(failed)
        })
        .sum();
    Ok(Estimate::binomial(failures, trials as u64))
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

/// Seeded (col_deg, row_deg)-regular matrix via the socket permutation model,
/// with local swaps to repair duplicate edges.
pub fn generate_regular(
    n: usize,
    col_deg: usize,
    row_deg: usize,
    seed: u64,
) -> Result<ParityCheckMatrix> {
    if n == 0 || col_deg == 0 || row_deg == 0 {
        return Err(Error::InvalidParam("degrees and length must be positive".into()));
    }
    if (n * col_deg) % row_deg != 0 {
        return Err(Error::InvalidParam(format!(
            "n*col_deg = {} not divisible by row_deg = {row_deg}",
            n * col_deg
        )));
    }
    let m = n * col_deg / row_deg;
    let edges = n * col_deg;
    let mut rng = Stream::new(seed, &[0x6e]);
    // Socket e pairs column col_socket[e] with row e / row_deg.
    let mut col_socket: Vec<usize> = (0..edges).map(|e| e / col_deg).collect();
    for i in (1..edges).rev() {
        let j = rng.index(i + 1);
        col_socket.swap(i, j);
    }
    // Repair duplicate (row, col) pairs by swapping with random sockets.
    let mut attempts = 0usize;
    loop {
        let mut seen = std::collections::HashSet::with_capacity(edges);
        let mut dup = None;
        for (e, &c) in col_socket.iter().enumerate() {
            if !seen.insert((e / row_deg, c)) {
                dup = Some(e);
                break;
            }
        }
        let Some(e) = dup else { break };
        attempts += 1;
        if attempts > 100 * edges {
            return Err(Error::InvalidParam(
                "regular construction failed to resolve duplicate edges".into(),
            ));
        }
        let j = rng.index(edges);
        col_socket.swap(e, j);
    }
    let entries: Vec<(usize, usize)> = col_socket
        .iter()
        .enumerate()
        .map(|(e, &c)| (e / row_deg, c))
        .collect();
    let mut h = ParityCheckMatrix::from_entries(n, m, &entries)?;
    h.source = format!("regular({col_deg},{row_deg}) n={n} seed={seed}");
    Ok(h)
}
