//! The Taylor expansions of the kernel integrals against the independent
//! quadrature oracle, with the rigorous Lagrange residual bound
//! E(u-v)^6 / (6 gamma^6) alongside.
//!
//! ```text
//! cargo run --release --example appendix_integrals
//! ```

use mmdhd::model::{central_moments, CoordinateLaw};
use mmdhd::theory::{
    double_integral_expansion, double_integral_residual_bound, mc_triple_integral,
    quadrature_oracle_double, quadrature_oracle_triple, triple_integral_expansion, Integrand,
};

fn main() -> mmdhd::Result<()> {
    let laws = [
        ("normal", CoordinateLaw::standard_normal(1.0)?),
        ("t8", CoordinateLaw::student_t(8.0, (6.0f64 / 8.0).sqrt())?),
        ("uniform", CoordinateLaw::uniform_centered(3.0f64.sqrt())?),
    ];
    println!("double integral, gamma^2 = 400, delta = 0.5:");
    println!(
        "{:>8} {:>14} {:>14} {:>12} {:>12}",
        "law", "expansion", "quadrature", "|err|", "bound"
    );
    for (name, law) in &laws {
        let m = central_moments(law, 6)?;
        let gamma = 20.0;
        let q = quadrature_oracle_double(law, law, 0.5, gamma, Integrand::Kernel)?;
        let e = double_integral_expansion(m.sigma2, m.mu3.unwrap(), m.mu4.unwrap(), 0.5, gamma);
        let bound = double_integral_residual_bound(&m, 0.5, gamma)?;
        println!(
            "{name:>8} {e:>14.9} {q:>14.9} {:>12.2e} {bound:>12.2e}",
            (e - q).abs()
        );
    }

    println!("\ntriple integral (shared vertex), gamma^2 = 400, delta = 0.5:");
    let law = CoordinateLaw::standard_normal(1.0)?;
    let e = triple_integral_expansion(1.0, 0.0, 3.0, 0.5, 20.0);
    let q = quadrature_oracle_triple(&law, &law, 0.5, 20.0)?;
    let (mc, se) = mc_triple_integral(&law, 0.5, 20.0, 200_000, 0)?;
    println!("  expansion   {e:.9}");
    println!("  quadrature  {q:.9}");
    println!("  monte carlo {mc:.9} ± {se:.1e}");
    Ok(())
}
