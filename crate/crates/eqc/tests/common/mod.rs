//! Shared helpers for integration tests.

use eqc::polar::polar_transform;

/// Exhaustive GF(2) reference for genie-aided successive-cancellation
/// decodability under erasures.
///
/// Input index `i` is undecodable exactly when some input vector `u` with
/// `u_j = 0` for all `j < i` and `u_i = 1` maps through the transform to a
/// codeword that is zero on every clear output position: at step `i` such a
/// `u` is indistinguishable from the all-zero input, because both agree with
/// the genie bits so far and with everything the channel did not erase.
///
/// Returns `true` per index where the bit is decodable. Enumerates all
/// `2^n` inputs, so keep `n` small.
pub fn sc_decodable_oracle(erased: &[bool]) -> Vec<bool> {
    let n = erased.len();
    assert!(n.is_power_of_two() && n <= 16, "oracle is exhaustive");
    let mut undecodable = vec![false; n];
    for word in 1u64..(1u64 << n) {
        let u: Vec<u8> = (0..n).map(|j| ((word >> j) & 1) as u8).collect();
        let x = polar_transform(&u).expect("transform");
        let hidden = (0..n).all(|j| erased[j] || x[j] == 0);
        if hidden {
            let leading = (0..n).find(|&j| u[j] == 1).expect("word is nonzero");
            undecodable[leading] = true;
        }
    }
    undecodable.iter().map(|&u| !u).collect()
}
