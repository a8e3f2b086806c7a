//! The interleaving wrapper: spreading each inner codeword's symbols across
//! busy periods recovers memoryless-channel performance.
//!
//! Compares depth-1 (no interleaving) against the depth suggested by the
//! busy-period tail bound, for an LDPC inner code and for the ideal erasure
//! code used in the achievability analysis.
//!
//! Run with: `cargo run --release --example wrapper_bler`

use eqc::channel::{mean_erasure_analytic, ErasureModel};
use eqc::ldpc::{build_code, generate_regular};
use eqc::queue::QueueParams;
use eqc::wrapper::{choose_depth, wrapper_block_error_rate, InnerCodeHandle};

fn main() -> eqc::Result<()> {
    let (lambda, mu, kappa) = (0.8, 1.0, 0.1);
    let params = QueueParams::mm1(lambda, mu)?;
    let model = ErasureModel::exponential(kappa)?;
    let depth = choose_depth(lambda, mu, 1e-3)?;
    let trials = 5_000;

    println!("lambda = {lambda}, depth from tail bound at alpha = 1e-3: B = {depth}\n");

    let code = build_code(&generate_regular(1008, 3, 6, 5)?);
    let ldpc = InnerCodeHandle::Ldpc(code);
    for (label, b) in [("no interleaving", 1usize), ("interleaved", depth)] {
        let est = wrapper_block_error_rate(&params, &model, &ldpc, b, trials, 33)?;
        println!("ldpc n=1008, {label:<16}: BLER {:.4e} +- {:.1e}", est.value, est.stderr);
    }

    // Ideal erasure-filling inner code at 90% of the per-use capacity.
    let n = 1024usize;
    let k = (0.9 * (1.0 - mean_erasure_analytic(lambda, mu, kappa)?) * n as f64) as usize;
    let ideal = InnerCodeHandle::IdealErasure { n, k };
    for (label, b) in [("no interleaving", 1usize), ("interleaved", depth)] {
        let est = wrapper_block_error_rate(&params, &model, &ideal, b, trials, 34)?;
        println!(
            "ideal (n={n}, k={k}), {label:<16}: BLER {:.4e} +- {:.1e}",
            est.value, est.stderr
        );
    }
    Ok(())
}
