//! The (2,1) repetition code: both copies of a bit sit in consecutive
//! channel uses, so their erasures are correlated through the queue.
//! Compares the closed-form error probability against Monte Carlo and
//! against the (wrong) independence approximation.
//!
//! Run with: `cargo run --release --example repetition`

use eqc::analytic::{repetition_error_mc, repetition_error_prob, RepetitionParams};
use eqc::channel::mean_erasure_analytic;

fn main() -> eqc::Result<()> {
    let (mu, kappa) = (1.0, 0.1);

    println!("lambda   closed form    monte carlo     if independent");
    for lambda in [0.3, 0.5, 0.7, 0.77, 0.9] {
        let p = RepetitionParams::new(kappa, lambda, mu)?;
        let exact = repetition_error_prob(&p)?;
        let mc = repetition_error_mc(&p, 200_000, 17)?;
        let marginal = mean_erasure_analytic(lambda, mu, kappa)?;
        println!(
            "{lambda:>6.2}   {exact:>11.6}   {:>9.6} +- {:.1e}   {:>12.6}",
            mc.value,
            mc.stderr,
            marginal * marginal
        );
    }
    println!("\ncorrelation makes double erasures strictly more likely than");
    println!("the product of marginals at every load");
    Ok(())
}
