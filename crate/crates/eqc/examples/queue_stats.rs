//! Busy-period statistics of the M/M/1 bit queue and the analytic tail
//! bound on bits per busy period.
//!
//! Run with: `cargo run --release --example queue_stats`

use eqc::queue::{busy_period_counts, geometric_tail_bound, simulate_sojourns, InitMode, QueueParams};

fn main() -> eqc::Result<()> {
    let (lambda, mu) = (0.77, 1.0);
    let params = QueueParams::mm1(lambda, mu)?;
    let trace = simulate_sojourns(&params, 2_000_000, 7, InitMode::Empty)?;
    let stats = busy_period_counts(&trace);

    println!(
        "{} completed busy periods, mean bits/period {:.4} (analytic {:.4})",
        stats.num_periods,
        stats.mean_jobs(),
        mu / (mu - lambda)
    );
    println!(
        "mean sojourn {:.4} (analytic {:.4})\n",
        trace.sojourns.iter().sum::<f64>() / trace.sojourns.len() as f64,
        1.0 / (mu - lambda)
    );

    println!("  l   P(J > l) empirical   analytic bound");
    for l in [1usize, 2, 5, 10, 20, 50, 100, 200] {
        let emp = stats.tail_gt(l);
        let bound = geometric_tail_bound(lambda, mu, l)?;
        println!("{l:>4}   {emp:>18.6e}   {bound:>14.6e}");
    }
    Ok(())
}
