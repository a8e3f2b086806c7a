//! LDPC peeling-decoder block error rates on the correlated channel.
//!
//! Generates seeded (3,6)-regular codes, prints BLER over block length,
//! and round-trips one matrix through the alist text format.
//!
//! Run with: `cargo run --release --example ldpc_bler`

use eqc::channel::ErasureModel;
use eqc::ldpc::{bler, build_code, generate_regular, parse_alist, to_alist};
use eqc::queue::QueueParams;

fn main() -> eqc::Result<()> {
    let (lambda, mu, kappa) = (0.8, 1.0, 0.1);
    let params = QueueParams::mm1(lambda, mu)?;
    let model = ErasureModel::exponential(kappa)?;
    let trials = 10_000;

    println!("(3,6)-regular codes at lambda = {lambda}\n");
    println!("    n   rate      BLER");
    for n in [96usize, 204, 408, 1008] {
        let h = generate_regular(n, 3, 6, 5)?;
        let code = build_code(&h);
        let est = bler(&params, &model, &code, trials, 9, n)?;
        println!("{n:>5}   {:.3}   {:.4e}", code.rate(), est.value);
    }

    let h = generate_regular(96, 3, 6, 5)?;
    let text = to_alist(&h);
    let reparsed = parse_alist(&text)?;
    println!(
        "\nalist round trip for n=96: {} ({} bytes)",
        if to_alist(&reparsed) == text { "byte-identical" } else { "MISMATCH" },
        text.len()
    );
    Ok(())
}
