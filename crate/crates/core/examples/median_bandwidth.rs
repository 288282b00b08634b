//! The median heuristic picks a bandwidth of order sigma * sqrt(2 d):
//! the expected squared distance between points from the two samples is
//! 2 sigma^2 d + ||mu_P - mu_Q||^2.
//!
//! ```text
//! cargo run --release --example median_bandwidth
//! ```

use mmdhd::kernel::median_heuristic;
use mmdhd::model::{sample_pair, CoordinateLaw, ModelSpec};
use ndarray::Axis;

fn main() -> mmdhd::Result<()> {
    let law = CoordinateLaw::standard_normal(1.0)?;
    println!("{:>6} {:>12} {:>12}", "d", "median", "sqrt(2d)");
    for d in [10usize, 50, 100, 500] {
        let model = ModelSpec::mean_shift(d, 0.0, law.clone())?;
        let (x, y) = sample_pair(&model, 100, 7)?;
        let mut pooled = ndarray::Array2::zeros((0, d));
        pooled.append(Axis(0), x.view()).unwrap();
        pooled.append(Axis(0), y.view()).unwrap();
        let gamma = median_heuristic(pooled.view())?;
        println!("{d:>6} {gamma:>12.4} {:>12.4}", (2.0 * d as f64).sqrt());
    }
    Ok(())
}
