//! The four power-sweep presets at reduced repetitions: power against
//! dimension for the bandwidth rules {median, d^0.5, d^0.75, d}, with the
//! predicted trend per setting.
//!
//! ```text
//! cargo run --release --example power_sweep_presets
//! ```

use mmdhd::sim::{run_sweep, Preset, SweepConfig};

fn main() -> mmdhd::Result<()> {
    let expectations = [
        (Preset::Setting1, "n=50, psi=2.5: power falls like 1/sqrt(d)"),
        (Preset::Setting2, "n=50, psi=d^0.25: power flat"),
        (Preset::Setting3, "n=d, psi=2: power flat"),
        (Preset::Setting4, "n=d, psi=0.3 sqrt(d): power climbs to 1"),
    ];
    for (preset, note) in expectations {
        let mut cfg = SweepConfig::preset(preset)?;
        cfg.reps = 200;
        cfg.d_grid = vec![40, 80, 120, 160, 200];
        let (records, summary) = run_sweep(&cfg)?;
        println!("== {preset:?}: {note}");
        for s in &summary.slopes {
            println!("   {:>8}: ln-power slope {:+.3}", s.gamma_rule, s.slope);
        }
        let d_max = *cfg.d_grid.last().unwrap();
        let terminal: Vec<String> = records
            .iter()
            .filter(|r| r.d == d_max)
            .map(|r| format!("{:.3}", r.rejection_rate))
            .collect();
        println!(
            "   power at d={d_max}: [{}], predicted {:.3}",
            terminal.join(", "),
            records.iter().find(|r| r.d == d_max).unwrap().predicted_beta
        );
    }
    Ok(())
}
