//! Polar code construction and block error rate on the correlated channel.
//!
//! Designs rate-1/2 codes by Monte Carlo for each block length, then
//! evaluates them with successive-cancellation decoding. Also shows the
//! memoryless reference at the same mean erasure rate, which the raw
//! correlated channel underperforms by a wide margin at these lengths.
//!
//! Run with: `cargo run --release --example polar_bler`

use eqc::channel::{mean_erasure_analytic, ErasureModel};
use eqc::polar::{bler, design_code};
use eqc::queue::QueueParams;

fn main() -> eqc::Result<()> {
    let (lambda, mu, kappa) = (0.77, 1.0, 0.1);
    let params = QueueParams::mm1(lambda, mu)?;
    let eqc_model = ErasureModel::exponential(kappa)?;
    let p_mean = mean_erasure_analytic(lambda, mu, kappa)?;
    let bec_model = ErasureModel::constant(p_mean)?;
    let trials = 10_000;

    println!("rate-1/2, mean erasure rate {p_mean:.4}\n");
    println!("   N    correlated BLER    iid-BEC BLER");
    for n in 6u32..=11 {
        let len = 1usize << n;
        let k = len / 2;
        let code_eqc = design_code(&params, &eqc_model, n, k, trials, 11)?;
        let code_bec = design_code(&params, &bec_model, n, k, trials, 11)?;
        let e1 = bler(&params, &eqc_model, &code_eqc, trials, 21)?;
        let e2 = bler(&params, &bec_model, &code_bec, trials, 21)?;
        println!("{len:>5}    {:>14.4e}    {:>12.4e}", e1.value, e2.value);
    }
    println!("\n(see the wrapper_bler example for how interleaving closes the gap)");
    Ok(())
}
