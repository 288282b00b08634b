//! Command-line front end: run tests on CSV data, evaluate theory
//! predictions, execute sweeps and presets, and run the oracle verification
//! suites.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 verification-suite
//! failure. The master seed comes from `--seed`, else the `MMDHD_SEED`
//! environment variable, else 0; it is echoed in every JSON output.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::kernel::{BandwidthRule, KernelFamily};
use crate::model::{CoordinateLaw, ModelSpec};
use crate::sim::{
    be_ratio_estimate, fit_loglog_slope, qq_export, ratio_curve, run_sweep, write_qq_csv,
    write_ratio_csv, write_records_csv, PairsRule, Preset, PsiRule, QqConfig, RatioCurveConfig,
    SweepConfig,
};
use crate::stat::linear_test;
use crate::theory::{power_prediction, TheoryInputs};
use crate::verify::{run_suite, Suite};

pub const SEED_ENV: &str = "MMDHD_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "mmdhd",
    about = "Linear-time kernel MMD two-sample testing with high-dimensional power theory",
    disable_help_subcommand = true
)]
struct Cli {
    /// Master seed; falls back to $MMDHD_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap the worker-thread count (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two-sample test on CSV data (one observation per row).
    Test(TestArgs),
    /// Closed-form power prediction for a mean-shift alternative.
    Predict(PredictArgs),
    /// Monte Carlo sweeps: power presets, BE-ratio, ratio curve, QQ.
    Sweep(SweepArgs),
    /// Run an oracle verification suite.
    Verify(VerifyArgs),
    /// Berry-Esseen ratio curve over dimensions.
    Beratio(BeratioArgs),
    /// QQ table of the studentized statistic.
    Qq(QqArgs),
}

#[derive(Debug, Args)]
struct TestArgs {
    /// CSV with the X sample.
    #[arg(long)]
    x: PathBuf,
    /// CSV with the Y sample.
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bandwidth: "median", "fixed:G", or "power:C,A" (gamma = C * d^A).
    #[arg(long, default_value = "median")]
    bandwidth: String,
    #[arg(long, value_enum, default_value_t = KernelArg::Gaussian)]
    kernel: KernelArg,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    Gaussian,
    Laplace,
    Linear,
}

impl From<KernelArg> for KernelFamily {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Gaussian => KernelFamily::Gaussian,
            KernelArg::Laplace => KernelFamily::Laplace,
            KernelArg::Linear => KernelFamily::Linear,
        }
    }
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Coordinate standard deviation sigma.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// ||mu_P - mu_Q||.
    #[arg(long)]
    delta_norm: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bandwidth gamma; defaults to sigma * sqrt(2 d) (median-heuristic order).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// setting1..setting4, be-ratio, ratio-curve, or qq.
    #[arg(long)]
    preset: Option<String>,
    /// JSON SweepConfig; CLI flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated dimension grid, e.g. "40,60,80".
    #[arg(long)]
    d_grid: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Fixed SNR override.
    #[arg(long)]
    psi: Option<f64>,
    /// Fixed sample size override.
    #[arg(long)]
    n: Option<usize>,
    /// Pairs per dimension for the ratio-curve preset.
    #[arg(long, default_value_t = 2000)]
    pairs_per_dim: usize,
    /// CSV destination for the records (default sweep.csv).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON destination for the summary (default stdout).
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// appendix-integrals, lemma1, lemma2, cq-identity, rotation-invariance, all.
    #[arg(long, default_value = "all")]
    suite: String,
}

#[derive(Debug, Args)]
struct BeratioArgs {
    /// Comma-separated dimension grid.
    #[arg(long, default_value = "40,200,400,1000")]
    d_grid: String,
    /// Bandwidth rule (same syntax as `test --bandwidth`).
    #[arg(long, default_value = "power:1,0.75")]
    bandwidth: String,
    #[arg(long, default_value_t = 1000)]
    m_pairs: usize,
    /// Coordinate law: "normal", "t:DOF", or "uniform".
    #[arg(long, default_value = "normal")]
    law: String,
    /// SNR of the alternative (0 = null).
    #[arg(long, default_value_t = 0.0)]
    psi: f64,
    /// CSV destination (default beratio.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct QqArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value = "50,100,200")]
    d_list: String,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value = "power:1,0.75")]
    bandwidth: String,
    #[arg(long, default_value_t = 0.0)]
    psi: f64,
    #[arg(long, default_value = "normal")]
    law: String,
    /// CSV destination (default qq.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point used by the binary; returns the process exit code.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through this path too
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { 0 } else { 1 };
        }
    };
    let seed = cli.seed.unwrap_or_else(|| {
        std::env::var(SEED_ENV)
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0)
    });
    let run = || -> Result<i32> {
        match &cli.command {
            Command::Test(args) => cmd_test(args, seed),
            Command::Predict(args) => cmd_predict(args, seed),
            Command::Sweep(args) => cmd_sweep(args, seed),
            Command::Verify(args) => cmd_verify(args, seed),
            Command::Beratio(args) => cmd_beratio(args, seed),
            Command::Qq(args) => cmd_qq(args, seed),
        }
    };
    let result = match cli.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build();
            match pool {
                Ok(pool) => pool.install(run),
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
        }
        None => run(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io(_)
        | Error::ParseError { .. }
        | Error::RaggedRows { .. }
        | Error::DegenerateData(_)
        | Error::Json(_) => 2,
        _ => 1,
    }
}

/// Load an n×d sample matrix from CSV. A header row is detected when any
/// field of the first row fails to parse as a number.
pub fn load_samples(path: &Path) -> Result<Array2<f64>> {
    let content = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => {
                if let Some(w) = width {
                    if vals.len() != w {
                        return Err(Error::RaggedRows {
                            line: line_no,
                            expected: w,
                            got: vals.len(),
                        });
                    }
                } else {
                    width = Some(vals.len());
                }
                rows.push(vals);
            }
            Err(e) => {
                if rows.is_empty() && width.is_none() && idx == 0 {
                    // header row
                    continue;
                }
                return Err(Error::ParseError {
                    line: line_no,
                    msg: e.to_string(),
                });
            }
        }
    }
    let n = rows.len();
    let d = width.ok_or(Error::ParseError {
        line: 0,
        msg: "no data rows".into(),
    })?;
    if n == 0 {
        return Err(Error::ParseError {
            line: 0,
            msg: "no data rows".into(),
        });
    }
    let mut m = Array2::zeros((n, d));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            m[[i, j]] = v;
        }
    }
    Ok(m)
}

/// Write a matrix as CSV with 17 significant digits, so a reload is
/// elementwise identical.
pub fn write_matrix_csv(m: &Array2<f64>, path: &Path) -> Result<()> {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn parse_bandwidth(s: &str) -> Result<BandwidthRule> {
    let s = s.trim();
    if s == "median" || s == "median-heuristic" {
        return Ok(BandwidthRule::MedianHeuristic);
    }
    if let Some(rest) = s.strip_prefix("fixed:") {
        let g: f64 = rest
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad fixed bandwidth {rest:?}")))?;
        return Ok(BandwidthRule::Fixed(g));
    }
    if let Some(rest) = s.strip_prefix("power:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "power rule needs \"power:C,A\", got {s:?}"
            )));
        }
        let c: f64 = parts[0]
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad power constant {:?}", parts[0])))?;
        let alpha: f64 = parts[1]
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad power exponent {:?}", parts[1])))?;
        return Ok(BandwidthRule::Power { c, alpha });
    }
    Err(Error::InvalidParameter(format!(
        "unknown bandwidth rule {s:?} (use median, fixed:G, or power:C,A)"
    )))
}

fn parse_law(s: &str) -> Result<CoordinateLaw> {
    let s = s.trim();
    if s == "normal" {
        return CoordinateLaw::standard_normal(1.0);
    }
    if s == "uniform" {
        return CoordinateLaw::uniform_centered(1.0);
    }
    if let Some(rest) = s.strip_prefix("t:") {
        let dof: f64 = rest
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad dof {rest:?}")))?;
        return CoordinateLaw::student_t(dof, 1.0);
    }
    Err(Error::InvalidParameter(format!(
        "unknown law {s:?} (use normal, t:DOF, or uniform)"
    )))
}

fn parse_grid(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("bad grid entry {p:?}")))
        })
        .collect()
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            std::fs::write(path, text + "\n")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_test(args: &TestArgs, seed: u64) -> Result<i32> {
    let x = load_samples(&args.x)?;
    let y = load_samples(&args.y)?;
    let rule = parse_bandwidth(&args.bandwidth)?;
    let outcome = linear_test(x.view(), y.view(), args.kernel.into(), &rule, args.alpha)?;
    if outcome.trimmed {
        eprintln!("warning: odd sample size, dropped the last observation of each sample");
    }
    let doc = json!({
        "command": "test",
        "seed": seed,
        "timestamp_unix": timestamp(),
        "outcome": outcome,
    });
    emit_json(&doc, args.out.as_deref())?;
    Ok(0)
}

fn cmd_predict(args: &PredictArgs, seed: u64) -> Result<i32> {
    let sigma2 = args.sigma * args.sigma;
    let gamma = args
        .gamma
        .unwrap_or_else(|| args.sigma * (2.0 * args.d as f64).sqrt());
    let delta_i = args.delta_norm / (args.d as f64).sqrt();
    let inputs = TheoryInputs::new(
        args.n,
        args.d,
        sigma2,
        0.0,
        3.0 * sigma2 * sigma2,
        vec![delta_i; args.d],
        gamma,
        args.alpha,
    )?;
    let prediction = power_prediction(&inputs)?;
    let doc = json!({
        "command": "predict",
        "seed": seed,
        "timestamp_unix": timestamp(),
        "inputs": {
            "n": args.n, "d": args.d, "sigma": args.sigma,
            "delta_norm": args.delta_norm, "alpha": args.alpha, "gamma": gamma,
        },
        "beta": prediction.beta,
        "finite_sample_lower": prediction.finite_sample_lower,
        "regime": prediction.regime,
        "population_mmd2_approx": crate::theory::population_mmd2_approx(&inputs),
        "variance_v_approx": crate::theory::variance_v_approx(&inputs),
    });
    emit_json(&doc, args.out.as_deref())?;
    Ok(0)
}

fn cmd_sweep(args: &SweepArgs, seed: u64) -> Result<i32> {
    // be-ratio / ratio-curve / qq presets route to their dedicated commands
    if let Some(p) = args.preset.as_deref() {
        match p {
            "be-ratio" => {
                let b = BeratioArgs {
                    d_grid: "40,200,400,1000".into(),
                    bandwidth: "power:1,0.75".into(),
                    m_pairs: 1000,
                    law: "normal".into(),
                    psi: 0.0,
                    out: args.out.clone(),
                };
                return cmd_beratio(&b, seed);
            }
            "ratio-curve" => {
                return run_ratio_curve_preset(args, seed);
            }
            "qq" => {
                let q = QqArgs {
                    n: 50,
                    d_list: "50,100,200".into(),
                    reps: args.reps.unwrap_or(1000),
                    bandwidth: "power:1,0.75".into(),
                    psi: args.psi.unwrap_or(0.0),
                    law: "normal".into(),
                    out: args.out.clone(),
                };
                return cmd_qq(&q, seed);
            }
            _ => {}
        }
    }

    let mut config: SweepConfig = match (&args.config, args.preset.as_deref()) {
        (Some(path), _) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        (None, Some(p)) => SweepConfig::preset(parse_power_preset(p)?)?,
        (None, None) => {
            return Err(Error::ConfigInvalid(
                "sweep needs --preset or --config".into(),
            ))
        }
    };
    if let (Some(path), Some(p)) = (&args.config, args.preset.as_deref()) {
        let _ = path;
        // preset flag overrides the preset field of a config file
        config.preset = Some(parse_power_preset(p)?);
        let fresh = SweepConfig::preset(parse_power_preset(p)?)?;
        config.n_rule = fresh.n_rule;
        config.psi_rule = fresh.psi_rule;
    }
    config.master_seed = seed;
    if let Some(g) = &args.d_grid {
        config.d_grid = parse_grid(g)?;
    }
    if let Some(r) = args.reps {
        config.reps = r;
    }
    if let Some(a) = args.alpha {
        config.alpha = a;
    }
    if let Some(p) = args.psi {
        config.psi_rule = PsiRule::Fixed(p);
    }
    if let Some(n) = args.n {
        config.n_rule = crate::sim::NRule::Fixed(n);
    }

    let (records, summary) = run_sweep(&config)?;
    let out_path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("sweep.csv"));
    let mut file = std::fs::File::create(&out_path)?;
    write_records_csv(&records, &mut file)?;
    file.flush()?;
    let doc = json!({
        "command": "sweep",
        "seed": seed,
        "timestamp_unix": timestamp(),
        "records_csv": out_path,
        "summary": summary,
    });
    emit_json(&doc, args.summary_out.as_deref())?;
    Ok(0)
}

fn parse_power_preset(s: &str) -> Result<Preset> {
    Ok(match s {
        "setting1" => Preset::Setting1,
        "setting2" => Preset::Setting2,
        "setting3" => Preset::Setting3,
        "setting4" => Preset::Setting4,
        other => {
            return Err(Error::ConfigInvalid(format!(
                "unknown preset {other:?} (setting1..setting4, be-ratio, ratio-curve, qq)"
            )))
        }
    })
}

fn run_ratio_curve_preset(args: &SweepArgs, seed: u64) -> Result<i32> {
    let d_grid = match &args.d_grid {
        Some(g) => parse_grid(g)?,
        None => vec![40, 100, 200, 400, 1000],
    };
    let config = RatioCurveConfig {
        law: CoordinateLaw::standard_normal(1.0)?,
        psi: args.psi.unwrap_or(1.0),
        gamma_rules: vec![
            BandwidthRule::Power { c: 1.0, alpha: 0.5 },
            BandwidthRule::Power { c: 1.0, alpha: 0.75 },
            BandwidthRule::Power { c: 1.0, alpha: 1.0 },
        ],
        d_grid,
        pairs: PairsRule::PerDim(args.pairs_per_dim),
        master_seed: seed,
    };
    let records = ratio_curve(&config)?;
    let out_path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("ratio_curve.csv"));
    let mut file = std::fs::File::create(&out_path)?;
    write_ratio_csv(&records, &mut file)?;
    file.flush()?;

    let mut slopes = Vec::new();
    for rule in &config.gamma_rules {
        let name = rule.to_string();
        let pts: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.gamma_rule == name && r.ratio > 0.0)
            .map(|r| (r.d as f64, r.ratio))
            .collect();
        if pts.len() >= 2 {
            let (slope, intercept) = fit_loglog_slope(&pts)?;
            slopes.push(json!({"gamma_rule": name, "slope": slope, "intercept": intercept}));
        }
    }
    let doc = json!({
        "command": "sweep",
        "preset": "ratio-curve",
        "seed": seed,
        "timestamp_unix": timestamp(),
        "records_csv": out_path,
        "loglog_slopes": slopes,
        "config": config,
    });
    emit_json(&doc, args.summary_out.as_deref())?;
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs, seed: u64) -> Result<i32> {
    let suite = Suite::parse(&args.suite)?;
    let results = run_suite(suite, seed)?;
    let mut all_pass = true;
    for r in &results {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", r.name, r.detail);
        all_pass &= r.pass;
    }
    if all_pass {
        println!("verify: all {} checks passed", results.len());
        Ok(0)
    } else {
        println!(
            "verify: {}/{} checks failed",
            results.iter().filter(|r| !r.pass).count(),
            results.len()
        );
        Ok(3)
    }
}

fn cmd_beratio(args: &BeratioArgs, seed: u64) -> Result<i32> {
    let d_grid = parse_grid(&args.d_grid)?;
    let rule = parse_bandwidth(&args.bandwidth)?;
    let law = parse_law(&args.law)?;
    let mut lines = vec!["d,gamma,ratio".to_string()];
    let mut points = Vec::new();
    for (i, &d) in d_grid.iter().enumerate() {
        let model = ModelSpec::mean_shift(d, args.psi, law.clone())?;
        let gamma = crate::kernel::resolve_bandwidth(&rule, d, None)?;
        let spec = crate::kernel::KernelSpec::gaussian(gamma)?;
        let ratio = be_ratio_estimate(
            &model,
            &spec,
            args.m_pairs,
            crate::seed::substream(seed, i as u64),
        )?;
        lines.push(format!("{d},{gamma:.16e},{ratio:.16e}"));
        points.push((d as f64, ratio));
    }
    let out_path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("beratio.csv"));
    std::fs::write(&out_path, lines.join("\n") + "\n")?;
    let (slope, _) = if points.len() >= 2 {
        fit_loglog_slope(&points)?
    } else {
        (f64::NAN, f64::NAN)
    };
    let normal_anchor = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
    let doc = json!({
        "command": "beratio",
        "seed": seed,
        "timestamp_unix": timestamp(),
        "records_csv": out_path,
        "ratios": points.iter().map(|p| json!({"d": p.0, "ratio": p.1})).collect::<Vec<_>>(),
        "loglog_slope": slope,
        "normal_absolute_third_moment": normal_anchor,
    });
    emit_json(&doc, None)?;
    Ok(0)
}

fn cmd_qq(args: &QqArgs, seed: u64) -> Result<i32> {
    let config = QqConfig {
        law: parse_law(&args.law)?,
        psi: args.psi,
        n: args.n,
        d_list: parse_grid(&args.d_list)?,
        bandwidth: parse_bandwidth(&args.bandwidth)?,
        reps: args.reps,
        master_seed: seed,
    };
    let rows = qq_export(&config)?;
    let out_path = args.out.clone().unwrap_or_else(|| PathBuf::from("qq.csv"));
    let mut file = std::fs::File::create(&out_path)?;
    write_qq_csv(&rows, &mut file)?;
    file.flush()?;
    let mut fits = Vec::new();
    for &d in &config.d_list {
        let sub: Vec<_> = rows.iter().filter(|r| r.d == d).cloned().collect();
        let (slope, intercept) = crate::sim::qq_fit(&sub)?;
        fits.push(json!({"d": d, "slope": slope, "intercept": intercept}));
    }
    let doc = json!({
        "command": "qq",
        "seed": seed,
        "timestamp_unix": timestamp(),
        "records_csv": out_path,
        "fits": fits,
        "config": config,
    });
    emit_json(&doc, None)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn load_samples_basic_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        std::fs::write(&p, "1,2\n3,4\n").unwrap();
        let m = load_samples(&p).unwrap();
        assert_eq!(m.shape(), &[2, 2]);
        assert_eq!(m[[1, 0]], 3.0);

        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        let m = load_samples(&p).unwrap();
        assert_eq!(m.shape(), &[1, 2]);
    }

    #[test]
    fn load_samples_ragged_and_bad() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        std::fs::write(&p, "1,2\n3\n").unwrap();
        assert!(matches!(
            load_samples(&p),
            Err(Error::RaggedRows { line: 2, .. })
        ));
        std::fs::write(&p, "1,2\n3,x\n").unwrap();
        assert!(matches!(
            load_samples(&p),
            Err(Error::ParseError { line: 2, .. })
        ));
        std::fs::write(&p, "").unwrap();
        assert!(load_samples(&p).is_err());
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let m = ndarray::array![
            [std::f64::consts::PI, 1.0 / 3.0],
            [-1.234567890123456e-7, 6.02214076e23]
        ];
        write_matrix_csv(&m, &p).unwrap();
        let back = load_samples(&p).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn bandwidth_parsing() {
        assert_eq!(
            parse_bandwidth("median").unwrap(),
            BandwidthRule::MedianHeuristic
        );
        assert_eq!(parse_bandwidth("fixed:5").unwrap(), BandwidthRule::Fixed(5.0));
        match parse_bandwidth("power:1,0.75").unwrap() {
            BandwidthRule::Power { c, alpha } => {
                assert_relative_eq!(c, 1.0);
                assert_relative_eq!(alpha, 0.75);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_bandwidth("nope").is_err());
    }

    #[test]
    fn law_parsing() {
        assert!(matches!(
            parse_law("normal").unwrap(),
            CoordinateLaw::StandardNormal { .. }
        ));
        assert!(matches!(
            parse_law("t:6").unwrap(),
            CoordinateLaw::StudentT { .. }
        ));
        assert!(parse_law("cauchy").is_err());
    }

    #[test]
    fn moments_used_by_predict_exist() {
        let law = CoordinateLaw::standard_normal(1.0).unwrap();
        assert!(crate::model::central_moments(&law, 4).is_ok());
    }
}
