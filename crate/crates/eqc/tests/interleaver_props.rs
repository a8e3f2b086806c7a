//! Property tests for the interleaver and the polar transform.

use eqc::polar::{construct, encode, polar_transform, sc_decode, DecodeOutcome};
use eqc::wrapper::{deinterleave, interleave, InterleaverConfig};
use proptest::prelude::*;

proptest! {
    /// Deinterleaving inverts interleaving for any shape and payload.
    #[test]
    fn interleave_roundtrip(
        n in 1usize..12,
        b in 1usize..12,
        payload in proptest::collection::vec(any::<u8>(), 1..144),
    ) {
        let mut rows: Vec<Vec<u8>> = Vec::with_capacity(b);
        let mut it = payload.iter().copied().cycle();
        for _ in 0..b {
            rows.push((&mut it).take(n).collect());
        }
        let stream = interleave(&rows).unwrap();
        prop_assert_eq!(stream.len(), n * b);
        let config = InterleaverConfig::new(n, b).unwrap();
        let back = deinterleave(&stream, config).unwrap();
        prop_assert_eq!(back, rows);
    }

    /// Symbol `j` of codeword `i` lands at stream position `j*b + i`, so
    /// consecutive stream symbols come from distinct codewords.
    #[test]
    fn interleave_placement(n in 1usize..10, b in 1usize..10) {
        let rows: Vec<Vec<u16>> = (0..b)
            .map(|i| (0..n).map(|j| (i * n + j) as u16).collect())
            .collect();
        let stream = interleave(&rows).unwrap();
        for i in 0..b {
            for j in 0..n {
                prop_assert_eq!(stream[j * b + i], rows[i][j]);
            }
        }
    }

    /// The transform is an involution: applying it twice is the identity.
    #[test]
    fn transform_involution(exp in 0u32..8, word in any::<u64>()) {
        let n = 1usize << exp;
        let u: Vec<u8> = (0..n).map(|j| ((word >> (j % 64)) & 1) as u8).collect();
        let once = polar_transform(&u).unwrap();
        let twice = polar_transform(&once).unwrap();
        prop_assert_eq!(twice, u);
    }

    /// Any code built from any score vector decodes every message over a
    /// clear channel.
    #[test]
    fn clear_channel_roundtrip(
        exp in 1u32..6,
        scores in proptest::collection::vec(0.0f64..1.0, 32),
        k_frac in 0.0f64..1.0,
        word in any::<u64>(),
    ) {
        let n = 1usize << exp;
        let k = ((k_frac * n as f64) as usize).clamp(1, n);
        let code = construct(&scores[..n], k, "prop").unwrap();
        let message: Vec<u8> = (0..k).map(|j| ((word >> (j % 64)) & 1) as u8).collect();
        let x = encode(&code, &message).unwrap();
        let y: Vec<_> = x.iter().map(|&b| eqc::channel::Symbol::from_bit(b)).collect();
        match sc_decode(&code, &y).unwrap() {
            DecodeOutcome::Message(m) => prop_assert_eq!(m, message),
            DecodeOutcome::Failure => prop_assert!(false, "clear channel must decode"),
        }
    }
}
