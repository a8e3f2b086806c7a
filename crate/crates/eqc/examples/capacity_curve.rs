//! Capacity of the erasure queue-channel: closed form vs Monte Carlo.
//!
//! Prints capacity in bits/sec over a lambda grid, marks the analytic
//! optimum, and cross-checks three points by simulation.
//!
//! Run with: `cargo run --release --example capacity_curve`

use eqc::channel::{capacity_analytic, capacity_mc, optimal_lambda, ErasureModel};
use eqc::queue::QueueParams;

fn main() -> eqc::Result<()> {
    let (mu, kappa) = (1.0, 0.1);

    println!("lambda  capacity(bits/sec)  per-use");
    for i in (5..100).step_by(5) {
        let lambda = i as f64 / 100.0;
        let cap = capacity_analytic(lambda, mu, kappa)?;
        println!("{lambda:>6.2}  {:>18.6}  {:>7.4}", cap.bits_per_sec, cap.bits_per_use);
    }

    let (lambda_star, cap_star) = optimal_lambda(mu, kappa)?;
    println!("\noptimal arrival rate {lambda_star:.5}, capacity {:.5} bits/sec", cap_star.bits_per_sec);

    let model = ErasureModel::exponential(kappa)?;
    println!("\nMonte Carlo check (10^6 bits per point):");
    for lambda in [0.5, 0.77, 0.9] {
        let params = QueueParams::mm1(lambda, mu)?;
        let mc = capacity_mc(&params, &model, 1_000_000, 1)?;
        let exact = capacity_analytic(lambda, mu, kappa)?.bits_per_sec;
        println!(
            "lambda {lambda:.2}: mc {:.5} +- {:.5}, analytic {exact:.5}",
            mc.value, mc.stderr
        );
    }
    Ok(())
}
