//! Compare the closed-form power prediction with a Monte Carlo estimate,
//! and print the SNR-regime rates for both the linear-time MMD test and
//! the CQ statistic.
//!
//! ```text
//! cargo run --release --example power_prediction
//! ```

use mmdhd::kernel::BandwidthRule;
use mmdhd::model::{CoordinateLaw, ModelSpec};
use mmdhd::sim::estimate_rejection_rate;
use mmdhd::theory::{
    corollary_rate, cq_power_prediction, power_prediction, SnrRegime, TheoryInputs,
};

fn main() -> mmdhd::Result<()> {
    let (n, d, psi, alpha) = (50usize, 100usize, 2.5f64, 0.05f64);
    let gamma = (d as f64).powf(0.75);
    let inputs = TheoryInputs::mean_shift(n, d, 1.0, 0.0, 3.0, psi, gamma, alpha)?;
    let pred = power_prediction(&inputs)?;
    println!("n={n} d={d} psi={psi} gamma=d^0.75:");
    println!("  predicted power          {:.4}", pred.beta);
    println!("  finite-sample lower bound {:.4}", pred.finite_sample_lower);
    println!("  regime                   {:?}", pred.regime);

    let law = CoordinateLaw::standard_normal(1.0)?;
    let model = ModelSpec::mean_shift(d, psi, law)?;
    let (rate, stderr) = estimate_rejection_rate(
        &model,
        n,
        &BandwidthRule::Power { c: 1.0, alpha: 0.75 },
        alpha,
        500,
        0,
    )?;
    println!("  Monte Carlo (500 reps)   {rate:.4} ± {stderr:.4}");

    println!("\nSNR-regime growth rates at n={n}, d={d}:");
    for psi in [0.5, 1.0, 2.0] {
        println!(
            "  psi={psi:3}: MMD_l low {:.4} | high {:.4} | CQ low {:.4} (sqrt(n) faster in n)",
            corollary_rate(SnrRegime::LowSnr, n, d, psi),
            corollary_rate(SnrRegime::HighSnr, n, d, psi),
            cq_power_prediction(SnrRegime::LowSnr, n, d, psi),
        );
    }
    Ok(())
}
