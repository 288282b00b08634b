//! Monte Carlo harness: rejection-rate estimation, Berry-Esseen ratio
//! curves, MMD²/√V scaling curves, QQ exports, and the four power-sweep
//! presets.
//!
//! Reproducibility contract: every repetition draws its RNG from a
//! substream seed that is a pure function of `(master_seed, indices)`, and
//! partial results are merged in a fixed order, so outputs are bit-identical
//! for a given config regardless of worker count.

use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{median_heuristic, resolve_bandwidth, BandwidthRule, KernelFamily, KernelSpec};
use crate::model::{random_rotation, sample_pair, CoordinateLaw, ModelSpec, Rotation};
use crate::normal::normal_quantile;
use crate::seed::{substream, Tag};
use crate::stat::{empirical_variance_v, linear_test, mmd2_linear};
use crate::theory::power_beta;

const PAIR_BLOCK: usize = 1024;

/// Fraction of repetitions where the linear-time test rejects, with its
/// binomial standard error. Repetition `r` uses substream
/// `mix(mix(master, Sweep), r)`; the tally is order-independent.
pub fn estimate_rejection_rate(
    model: &ModelSpec,
    n: usize,
    bandwidth: &BandwidthRule,
    alpha: f64,
    reps: usize,
    master_seed: u64,
) -> Result<(f64, f64)> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be >= 1".into()));
    }
    let base = Tag::Sweep.seed(master_seed);
    let rejects: Vec<Result<bool>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let (x, y) = sample_pair(model, n, substream(base, rep as u64))?;
            let out = linear_test(x.view(), y.view(), KernelFamily::Gaussian, bandwidth, alpha)?;
            Ok(out.reject)
        })
        .collect();
    let mut count = 0usize;
    for r in rejects {
        if r? {
            count += 1;
        }
    }
    let rate = count as f64 / reps as f64;
    let stderr = (rate * (1.0 - rate) / reps as f64).sqrt();
    Ok((rate, stderr))
}

/// Draws independent (z, z') pairs from the model and streams their h
/// values through `per_block`, one ordered block at a time.
///
/// Gaussian and linear h values depend on the rotation only through the
/// rotated mean gap (`||x - y|| = ||s - t + U' delta||`), so a random
/// rotation is folded into an effective delta. The Laplace L1 distance is
/// not rotation invariant, so that case rotates the raw draws explicitly.
fn stream_h_blocks<T, FBlock>(
    model: &ModelSpec,
    kernel: &KernelSpec,
    m_pairs: usize,
    seed: u64,
    per_block: FBlock,
) -> Result<Vec<T>>
where
    T: Send,
    FBlock: Fn(usize, &[f64]) -> T + Sync,
{
    let d = model.d;
    let blocks = m_pairs.div_ceil(PAIR_BLOCK);
    let law = &model.law;
    let kernel = *kernel;
    let (delta, rotate): (Vec<f64>, Option<Array2<f64>>) =
        match (model.rotation, kernel.family) {
            (Rotation::Identity, _) => (model.delta(), None),
            (Rotation::Random { seed }, KernelFamily::Laplace) => {
                (model.delta(), Some(random_rotation(d, seed)))
            }
            (Rotation::Random { seed }, _) => {
                let u = random_rotation(d, seed);
                let dl = model.delta();
                let rotated = (0..d)
                    .map(|i| (0..d).map(|r| u[[r, i]] * dl[r]).sum())
                    .collect();
                (rotated, None)
            }
        };
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, b as u64));
            let count = PAIR_BLOCK.min(m_pairs - b * PAIR_BLOCK);
            let mut x = vec![0.0; d];
            let mut xp = vec![0.0; d];
            let mut y = vec![0.0; d];
            let mut yp = vec![0.0; d];
            let mut hs = Vec::with_capacity(count);
            for _ in 0..count {
                law.fill(&mut rng, &mut x);
                law.fill(&mut rng, &mut xp);
                law.fill(&mut rng, &mut y);
                law.fill(&mut rng, &mut yp);
                if let Some(u) = &rotate {
                    for v in [&mut x, &mut xp, &mut y, &mut yp] {
                        rotate_in_place(u, v);
                    }
                }
                for i in 0..d {
                    x[i] += delta[i];
                    xp[i] += delta[i];
                }
                hs.push(h_from_vectors(&kernel, &x, &xp, &y, &yp));
            }
            Ok(per_block(b, &hs))
        })
        .collect()
}

fn rotate_in_place(u: &Array2<f64>, v: &mut [f64]) {
    let d = v.len();
    let mut out = vec![0.0; d];
    for (r, o) in out.iter_mut().enumerate() {
        *o = (0..d).map(|c| u[[r, c]] * v[c]).sum();
    }
    v.copy_from_slice(&out);
}

fn h_from_vectors(k: &KernelSpec, x: &[f64], xp: &[f64], y: &[f64], yp: &[f64]) -> f64 {
    match k.family {
        KernelFamily::Gaussian => {
            let g2 = k.gamma * k.gamma;
            let d1: f64 = sqd(x, xp);
            let d2: f64 = sqd(y, yp);
            let d3: f64 = sqd(x, yp);
            let d4: f64 = sqd(xp, y);
            (-d1 / g2).exp() + (-d2 / g2).exp() - (-d3 / g2).exp() - (-d4 / g2).exp()
        }
        KernelFamily::Laplace => {
            let g = k.gamma;
            (-l1(x, xp) / g).exp() + (-l1(y, yp) / g).exp()
                - (-l1(x, yp) / g).exp()
                - (-l1(xp, y) / g).exp()
        }
        KernelFamily::Linear => dotp(x, xp) + dotp(y, yp) - dotp(x, yp) - dotp(xp, y),
    }
}

fn sqd(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}
fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum()
}
fn dotp(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Empirical Berry-Esseen ratio `mean(|h - hbar|^3) / (sample variance)^{3/2}`
/// over `m_pairs` independent pairs.
pub fn be_ratio_estimate(
    model: &ModelSpec,
    kernel: &KernelSpec,
    m_pairs: usize,
    master_seed: u64,
) -> Result<f64> {
    if m_pairs < 100 {
        return Err(Error::InvalidParameter(format!(
            "be_ratio_estimate needs m_pairs >= 100, got {m_pairs}"
        )));
    }
    let base = Tag::BeRatio.seed(master_seed);
    let blocks = stream_h_blocks(model, kernel, m_pairs, base, |_, hs| hs.to_vec())?;
    let mut h = Vec::with_capacity(m_pairs);
    for b in blocks {
        h.extend(b);
    }
    let m = h.len() as f64;
    let mean = h.iter().sum::<f64>() / m;
    let var = h.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    if var == 0.0 {
        return Err(Error::DegenerateVariance(
            "all h values identical in be_ratio_estimate".into(),
        ));
    }
    let abs3 = h.iter().map(|v| (v - mean).abs().powi(3)).sum::<f64>() / m;
    Ok(abs3 / var.powf(1.5))
}

/// Monte Carlo sample variance of h over `m_pairs` independent pairs.
pub fn mc_h_variance(
    model: &ModelSpec,
    kernel: &KernelSpec,
    m_pairs: usize,
    master_seed: u64,
) -> Result<f64> {
    if m_pairs < 2 {
        return Err(Error::InvalidParameter("need at least 2 pairs".into()));
    }
    let base = Tag::BeRatio.seed(master_seed);
    let blocks = stream_h_blocks(model, kernel, m_pairs, base, |_, hs| {
        let s: f64 = hs.iter().sum();
        let ss: f64 = hs.iter().map(|h| h * h).sum();
        (s, ss)
    })?;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for b in blocks {
        sum += b.0;
        sum_sq += b.1;
    }
    let m = m_pairs as f64;
    let mean = sum / m;
    Ok(((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0))
}

/// Central moments of h estimated over independent pairs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HMoments {
    pub mean: f64,
    /// unbiased sample variance
    pub variance: f64,
    pub fourth_central: f64,
    pub pairs: usize,
}

/// Monte Carlo mean, variance and fourth central moment of h.
pub fn mc_h_moments(
    model: &ModelSpec,
    kernel: &KernelSpec,
    m_pairs: usize,
    master_seed: u64,
) -> Result<HMoments> {
    if m_pairs < 2 {
        return Err(Error::InvalidParameter("need at least 2 pairs".into()));
    }
    let base = Tag::BeRatio.seed(master_seed);
    // raw power sums are safe here: |h| <= 2 for the bounded kernels
    let blocks = stream_h_blocks(model, kernel, m_pairs, base, |_, hs| {
        let mut s = [0.0f64; 4];
        for h in hs {
            s[0] += h;
            s[1] += h * h;
            s[2] += h * h * h;
            s[3] += h * h * h * h;
        }
        s
    })?;
    let mut s = [0.0f64; 4];
    for b in blocks {
        for (t, v) in s.iter_mut().zip(b) {
            *t += v;
        }
    }
    let m = m_pairs as f64;
    let mean = s[0] / m;
    let variance = ((s[1] - m * mean * mean) / (m - 1.0)).max(0.0);
    let fourth = s[3] / m - 4.0 * mean * s[2] / m + 6.0 * mean * mean * s[1] / m
        - 3.0 * mean.powi(4);
    Ok(HMoments {
        mean,
        variance,
        fourth_central: fourth.max(0.0),
        pairs: m_pairs,
    })
}

/// How many pairs to spend per dimension in [`ratio_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairsRule {
    Fixed(usize),
    /// `pairs = c * d`; keeps the relative error of the MMD² estimate flat
    /// across the dimension grid.
    PerDim(usize),
}

impl PairsRule {
    fn pairs(&self, d: usize) -> usize {
        match *self {
            PairsRule::Fixed(m) => m,
            PairsRule::PerDim(c) => c * d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCurveConfig {
    pub law: CoordinateLaw,
    pub psi: f64,
    pub gamma_rules: Vec<BandwidthRule>,
    pub d_grid: Vec<usize>,
    pub pairs: PairsRule,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioRecord {
    pub d: usize,
    pub gamma_rule: String,
    pub gamma_value: f64,
    pub pairs: usize,
    pub mmd2_hat: f64,
    /// sample variance of h — the quantity the closed-form V approximates
    pub v_hat: f64,
    pub ratio: f64,
}

/// Estimate `MMD²/√V` per (d, bandwidth rule): MMD² by the mean of h and V
/// by the sample variance of h over the requested number of disjoint pairs.
/// All rules at one d share the same draws (only the bandwidth differs), so
/// cross-rule spreads are far less noisy than the individual estimates.
///
/// A median-heuristic rule is resolved once per d from a 256-point pilot
/// sample rather than per pair.
pub fn ratio_curve(config: &RatioCurveConfig) -> Result<Vec<RatioRecord>> {
    if config.d_grid.is_empty() {
        return Err(Error::ConfigInvalid("empty d_grid".into()));
    }
    if config.gamma_rules.is_empty() {
        return Err(Error::ConfigInvalid("no bandwidth rules".into()));
    }
    let base = Tag::RatioCurve.seed(config.master_seed);
    let mut records = Vec::new();
    for (di, &d) in config.d_grid.iter().enumerate() {
        let model = ModelSpec::mean_shift(d, config.psi, config.law.clone())?;
        let d_seed = substream(base, di as u64);
        let mut gammas = Vec::with_capacity(config.gamma_rules.len());
        for rule in &config.gamma_rules {
            let gamma = match rule {
                BandwidthRule::MedianHeuristic => {
                    let (px, py) = sample_pair(&model, 128, substream(d_seed, u64::MAX))?;
                    let mut pooled = Array2::zeros((0, d));
                    pooled.append(Axis(0), px.view()).expect("same width");
                    pooled.append(Axis(0), py.view()).expect("same width");
                    median_heuristic(pooled.view())?
                }
                other => resolve_bandwidth(other, d, None)?,
            };
            gammas.push(gamma);
        }
        let m_pairs = config.pairs.pairs(d).max(2);
        let sums = shared_draw_moments(&model, &gammas, m_pairs, d_seed)?;
        for ((rule, gamma), (sum, sum_sq)) in
            config.gamma_rules.iter().zip(&gammas).zip(sums)
        {
            let m = m_pairs as f64;
            let mean = sum / m;
            let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
            records.push(RatioRecord {
                d,
                gamma_rule: rule.to_string(),
                gamma_value: *gamma,
                pairs: m_pairs,
                mmd2_hat: mean,
                v_hat: var,
                ratio: mean / var.sqrt(),
            });
        }
    }
    Ok(records)
}

/// Per-rule (Σh, Σh²) over shared pair draws: the four squared distances of
/// each pair are computed once and re-exponentiated per bandwidth.
/// Gaussian-kernel only, so a random rotation folds into the delta.
fn shared_draw_moments(
    model: &ModelSpec,
    gammas: &[f64],
    m_pairs: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let d = model.d;
    let law = &model.law;
    let delta = match model.rotation {
        Rotation::Identity => model.delta(),
        Rotation::Random { seed } => {
            let u = random_rotation(d, seed);
            let dl = model.delta();
            (0..d)
                .map(|i| (0..d).map(|r| u[[r, i]] * dl[r]).sum())
                .collect()
        }
    };
    let blocks = m_pairs.div_ceil(PAIR_BLOCK);
    let partials: Vec<Vec<(f64, f64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, b as u64));
            let count = PAIR_BLOCK.min(m_pairs - b * PAIR_BLOCK);
            let mut x = vec![0.0; d];
            let mut xp = vec![0.0; d];
            let mut y = vec![0.0; d];
            let mut yp = vec![0.0; d];
            let mut acc = vec![(0.0f64, 0.0f64); gammas.len()];
            for _ in 0..count {
                law.fill(&mut rng, &mut x);
                law.fill(&mut rng, &mut xp);
                law.fill(&mut rng, &mut y);
                law.fill(&mut rng, &mut yp);
                for i in 0..d {
                    x[i] += delta[i];
                    xp[i] += delta[i];
                }
                let d1 = sqd(&x, &xp);
                let d2 = sqd(&y, &yp);
                let d3 = sqd(&x, &yp);
                let d4 = sqd(&xp, &y);
                for (g, a) in gammas.iter().zip(acc.iter_mut()) {
                    let g2 = g * g;
                    let h = (-d1 / g2).exp() + (-d2 / g2).exp()
                        - (-d3 / g2).exp()
                        - (-d4 / g2).exp();
                    a.0 += h;
                    a.1 += h * h;
                }
            }
            acc
        })
        .collect();
    // fixed-order merge
    let mut totals = vec![(0.0f64, 0.0f64); gammas.len()];
    for block in partials {
        for (t, p) in totals.iter_mut().zip(block) {
            t.0 += p.0;
            t.1 += p.1;
        }
    }
    Ok(totals)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqConfig {
    pub law: CoordinateLaw,
    /// SNR of the alternative; 0 gives the null.
    pub psi: f64,
    pub n: usize,
    pub d_list: Vec<usize>,
    pub bandwidth: BandwidthRule,
    pub reps: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QqRow {
    pub d: usize,
    pub rank: usize,
    pub statistic: f64,
    pub normal_quantile: f64,
}

/// Sorted replicates of the studentized statistic paired with standard
/// normal quantiles `Phi^{-1}((i - 0.5)/reps)`.
pub fn qq_export(config: &QqConfig) -> Result<Vec<QqRow>> {
    if config.reps < 100 {
        return Err(Error::InvalidParameter(format!(
            "qq_export needs reps >= 100, got {}",
            config.reps
        )));
    }
    let base = Tag::Qq.seed(config.master_seed);
    let mut rows = Vec::with_capacity(config.reps * config.d_list.len());
    for (di, &d) in config.d_list.iter().enumerate() {
        let model = ModelSpec::mean_shift(d, config.psi, config.law.clone())?;
        let d_seed = substream(base, di as u64);
        let stats: Vec<Result<f64>> = (0..config.reps)
            .into_par_iter()
            .map(|rep| {
                let (x, y) = sample_pair(&model, config.n, substream(d_seed, rep as u64))?;
                let out = linear_test(
                    x.view(),
                    y.view(),
                    KernelFamily::Gaussian,
                    &config.bandwidth,
                    0.05,
                )?;
                Ok(out.statistic)
            })
            .collect();
        let mut stats = stats.into_iter().collect::<Result<Vec<f64>>>()?;
        stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, s) in stats.into_iter().enumerate() {
            rows.push(QqRow {
                d,
                rank: i + 1,
                statistic: s,
                normal_quantile: normal_quantile((i as f64 + 0.5) / config.reps as f64)?,
            });
        }
    }
    Ok(rows)
}

/// Least-squares line through one dimension's QQ pairs
/// (statistic ~ slope * quantile + intercept).
pub fn qq_fit(rows: &[QqRow]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.normal_quantile, r.statistic))
        .collect();
    ols(&pts)
}

fn ols(pts: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 points to fit a line".into(),
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "need at least 2 distinct x values".into(),
        ));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Kolmogorov-Smirnov distance between the standardized values and the
/// standard normal CDF.
pub fn ks_distance_standardized(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 values".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd == 0.0 {
        return Err(Error::DegenerateVariance("constant sample".into()));
    }
    let mut z: Vec<f64> = values.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut d = 0.0f64;
    for (i, zi) in z.iter().enumerate() {
        let cdf = crate::normal::phi(*zi);
        d = d.max((i as f64 + 1.0) / n - cdf).max(cdf - i as f64 / n);
    }
    Ok(d)
}

/// Ordinary least squares on `(ln x, ln y)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    for &(x, y) in points {
        if x <= 0.0 || y <= 0.0 {
            return Err(Error::NonPositiveValue(format!(
                "log-log fit needs positive coordinates, got ({x}, {y})"
            )));
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    ols(&logs)
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(
            "spearman needs two equal-length samples of size >= 2".into(),
        ));
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..rx.len() {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateVariance("constant ranks".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Figure-4 style presets plus the other experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Setting1,
    Setting2,
    Setting3,
    Setting4,
    BeRatio,
    RatioCurve,
    Qq,
}

/// Sample-size rule of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NRule {
    Fixed(usize),
    EqualD,
}

impl NRule {
    fn n(&self, d: usize) -> usize {
        match *self {
            NRule::Fixed(n) => n,
            NRule::EqualD => d,
        }
    }
}

/// SNR rule of a sweep: fixed, or `psi = c * d^a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiRule {
    Fixed(f64),
    Power { c: f64, a: f64 },
}

impl PsiRule {
    fn psi(&self, d: usize) -> f64 {
        match *self {
            PsiRule::Fixed(p) => p,
            PsiRule::Power { c, a } => c * (d as f64).powf(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub preset: Option<Preset>,
    pub d_grid: Vec<usize>,
    pub n_rule: NRule,
    pub psi_rule: PsiRule,
    pub bandwidth_rules: Vec<BandwidthRule>,
    pub law: CoordinateLaw,
    pub alpha: f64,
    pub reps: usize,
    pub master_seed: u64,
}

impl SweepConfig {
    /// The four power-sweep settings: Gaussian coordinates, d from 40 to
    /// 200 in steps of 20, bandwidths {median, d^0.5, d^0.75, d}, and the
    /// (n, psi) rules of the respective setting.
    pub fn preset(preset: Preset) -> Result<Self> {
        let (n_rule, psi_rule) = match preset {
            Preset::Setting1 => (NRule::Fixed(50), PsiRule::Fixed(2.5)),
            Preset::Setting2 => (NRule::Fixed(50), PsiRule::Power { c: 1.0, a: 0.25 }),
            Preset::Setting3 => (NRule::EqualD, PsiRule::Fixed(2.0)),
            Preset::Setting4 => (NRule::EqualD, PsiRule::Power { c: 0.3, a: 0.5 }),
            other => {
                return Err(Error::ConfigInvalid(format!(
                    "preset {other:?} is not a power sweep; use its dedicated entry point"
                )))
            }
        };
        Ok(SweepConfig {
            preset: Some(preset),
            d_grid: (40..=200).step_by(20).collect(),
            n_rule,
            psi_rule,
            bandwidth_rules: vec![
                BandwidthRule::MedianHeuristic,
                BandwidthRule::Power { c: 1.0, alpha: 0.5 },
                BandwidthRule::Power { c: 1.0, alpha: 0.75 },
                BandwidthRule::Power { c: 1.0, alpha: 1.0 },
            ],
            law: CoordinateLaw::standard_normal(1.0)?,
            alpha: 0.05,
            reps: 1000,
            master_seed: 0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::ConfigInvalid("reps must be >= 1".into()));
        }
        if self.d_grid.is_empty() {
            return Err(Error::ConfigInvalid("d_grid must be nonempty".into()));
        }
        if !self.d_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::ConfigInvalid(
                "d_grid must be strictly increasing".into(),
            ));
        }
        if self.bandwidth_rules.is_empty() {
            return Err(Error::ConfigInvalid("need at least one bandwidth rule".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::ConfigInvalid(format!(
                "alpha must be in (0,1), got {}",
                self.alpha
            )));
        }
        if let Some(p) = self.preset {
            if matches!(p, Preset::BeRatio | Preset::RatioCurve | Preset::Qq) {
                return Err(Error::ConfigInvalid(format!(
                    "preset {p:?} is not a power sweep; use its dedicated entry point"
                )));
            }
        }
        Ok(())
    }
}

/// One (d, bandwidth-rule) cell of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub d: usize,
    pub n: usize,
    pub gamma_rule: String,
    /// resolved bandwidth; for the median heuristic, the mean over reps
    pub gamma_value: f64,
    pub rejection_rate: f64,
    pub stderr: f64,
    pub predicted_beta: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleSlope {
    pub gamma_rule: String,
    /// OLS slope/intercept of ln(rate) vs ln(d); rates are floored at
    /// 0.5/reps so empty cells stay finite
    pub slope: f64,
    pub intercept: f64,
    pub spearman_rate_vs_d: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpreadRecord {
    pub d: usize,
    /// (max - min)/mean of the rejection rate across rules
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub config: SweepConfig,
    pub slopes: Vec<RuleSlope>,
    pub cross_rule_spread: Vec<SpreadRecord>,
    pub max_cross_rule_spread: f64,
    pub master_seed: u64,
}

/// Run a power sweep. Within one repetition, all bandwidth rules see the
/// same sample; the median heuristic is re-resolved per repetition while
/// power rules are resolved once per d.
pub fn run_sweep(config: &SweepConfig) -> Result<(Vec<SweepRecord>, SweepSummary)> {
    config.validate()?;
    let base = Tag::Sweep.seed(config.master_seed);
    let sigma2 = config.law.sigma2();
    let n_rules = config.bandwidth_rules.len();
    let mut records: Vec<SweepRecord> = Vec::new();

    for (di, &d) in config.d_grid.iter().enumerate() {
        let n = config.n_rule.n(d);
        if n < 2 {
            return Err(Error::ConfigInvalid(format!("n resolves to {n} at d={d}")));
        }
        let psi = config.psi_rule.psi(d);
        let model = ModelSpec::mean_shift(d, psi, config.law.clone())?;
        let delta_norm2 = psi * psi * sigma2;
        let beta = power_beta(n, d, sigma2, delta_norm2, config.alpha)?;
        let fixed_gammas: Vec<Option<f64>> = config
            .bandwidth_rules
            .iter()
            .map(|r| match r {
                BandwidthRule::MedianHeuristic => Ok(None),
                other => resolve_bandwidth(other, d, None).map(Some),
            })
            .collect::<Result<_>>()?;
        let d_seed = substream(base, di as u64);

        let per_rep: Vec<Result<Vec<(bool, f64)>>> = (0..config.reps)
            .into_par_iter()
            .map(|rep| {
                let (x, y) = sample_pair(&model, n, substream(d_seed, rep as u64))?;
                let mut out = Vec::with_capacity(n_rules);
                for g in &fixed_gammas {
                    let gamma = match g {
                        Some(g) => *g,
                        None => {
                            let mut pooled = Array2::zeros((0, d));
                            pooled.append(Axis(0), x.view()).expect("same width");
                            pooled.append(Axis(0), y.view()).expect("same width");
                            median_heuristic(pooled.view())?
                        }
                    };
                    let t = linear_test(
                        x.view(),
                        y.view(),
                        KernelFamily::Gaussian,
                        &BandwidthRule::Fixed(gamma),
                        config.alpha,
                    )?;
                    out.push((t.reject, gamma));
                }
                Ok(out)
            })
            .collect();

        let mut reject_counts = vec![0usize; n_rules];
        let mut gamma_sums = vec![0.0f64; n_rules];
        for rep in per_rep {
            for (k, (reject, gamma)) in rep?.into_iter().enumerate() {
                if reject {
                    reject_counts[k] += 1;
                }
                gamma_sums[k] += gamma;
            }
        }
        for (k, rule) in config.bandwidth_rules.iter().enumerate() {
            let rate = reject_counts[k] as f64 / config.reps as f64;
            records.push(SweepRecord {
                d,
                n,
                gamma_rule: rule.to_string(),
                gamma_value: gamma_sums[k] / config.reps as f64,
                rejection_rate: rate,
                stderr: (rate * (1.0 - rate) / config.reps as f64).sqrt(),
                predicted_beta: beta,
                reps: config.reps,
            });
        }
    }

    let summary = summarize(config, &records)?;
    Ok((records, summary))
}

fn summarize(config: &SweepConfig, records: &[SweepRecord]) -> Result<SweepSummary> {
    let floor = 0.5 / config.reps as f64;
    let mut slopes = Vec::new();
    for rule in &config.bandwidth_rules {
        let name = rule.to_string();
        let pts: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.gamma_rule == name)
            .map(|r| (r.d as f64, r.rejection_rate.max(floor)))
            .collect();
        let (slope, intercept) = if pts.len() >= 2 {
            fit_loglog_slope(&pts)?
        } else {
            (f64::NAN, f64::NAN)
        };
        let ds: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let rates: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let sp = spearman(&rates, &ds).unwrap_or(f64::NAN);
        slopes.push(RuleSlope {
            gamma_rule: name,
            slope,
            intercept,
            spearman_rate_vs_d: sp,
        });
    }
    let mut spread = Vec::new();
    let mut max_spread = 0.0f64;
    for &d in &config.d_grid {
        let rates: Vec<f64> = records
            .iter()
            .filter(|r| r.d == d)
            .map(|r| r.rejection_rate)
            .collect();
        if rates.is_empty() {
            continue;
        }
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        let max = rates.iter().cloned().fold(f64::MIN, f64::max);
        let min = rates.iter().cloned().fold(f64::MAX, f64::min);
        let s = if mean > 0.0 { (max - min) / mean } else { 0.0 };
        max_spread = max_spread.max(s);
        spread.push(SpreadRecord { d, spread: s });
    }
    Ok(SweepSummary {
        config: config.clone(),
        slopes,
        cross_rule_spread: spread,
        max_cross_rule_spread: max_spread,
        master_seed: config.master_seed,
    })
}

/// Mean and standard deviation of the variance estimate v across
/// repetitions (used for the v-concentration rate check).
pub fn empirical_v_stats(
    model: &ModelSpec,
    n: usize,
    gamma: f64,
    reps: usize,
    master_seed: u64,
) -> Result<(f64, f64)> {
    if reps < 2 {
        return Err(Error::InvalidParameter("need reps >= 2".into()));
    }
    let base = Tag::Sweep.seed(master_seed);
    let spec = KernelSpec::gaussian(gamma)?;
    let vs: Vec<Result<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let (x, y) = sample_pair(model, n, substream(base, rep as u64))?;
            let (_, h) = mmd2_linear(&spec, x.view(), y.view())?;
            empirical_variance_v(&h)
        })
        .collect();
    let vs = vs.into_iter().collect::<Result<Vec<f64>>>()?;
    let m = vs.len() as f64;
    let mean = vs.iter().sum::<f64>() / m;
    let sd = (vs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)).sqrt();
    Ok((mean, sd))
}

/// Write sweep records as CSV with the stable column set.
pub fn write_records_csv<W: std::io::Write>(records: &[SweepRecord], mut w: W) -> Result<()> {
    writeln!(
        w,
        "d,n,gamma_rule,gamma_value,rejection_rate,stderr,predicted_beta,reps"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            r.d, r.n, r.gamma_rule, r.gamma_value, r.rejection_rate, r.stderr, r.predicted_beta, r.reps
        )?;
    }
    Ok(())
}

/// Write QQ rows as CSV.
pub fn write_qq_csv<W: std::io::Write>(rows: &[QqRow], mut w: W) -> Result<()> {
    writeln!(w, "d,rank,statistic,normal_quantile")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:.17e},{:.17e}",
            r.d, r.rank, r.statistic, r.normal_quantile
        )?;
    }
    Ok(())
}

/// Write ratio-curve records as CSV.
pub fn write_ratio_csv<W: std::io::Write>(records: &[RatioRecord], mut w: W) -> Result<()> {
    writeln!(w, "d,gamma_rule,gamma_value,pairs,mmd2_hat,v_hat,ratio")?;
    for r in records {
        writeln!(
            w,
            "{},{},{:.17e},{},{:.17e},{:.17e},{:.17e}",
            r.d, r.gamma_rule, r.gamma_value, r.pairs, r.mmd2_hat, r.v_hat, r.ratio
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn normal_law() -> CoordinateLaw {
        CoordinateLaw::standard_normal(1.0).unwrap()
    }

    #[test]
    fn rejection_rate_saturates_at_high_snr() {
        let model = ModelSpec::mean_shift(10, 10.0, normal_law()).unwrap();
        let (rate, _) = estimate_rejection_rate(
            &model,
            200,
            &BandwidthRule::Power { c: 1.0, alpha: 0.75 },
            0.05,
            60,
            0,
        )
        .unwrap();
        assert!(rate >= 0.99, "rate = {rate}");
    }

    #[test]
    fn rejection_rate_is_deterministic() {
        let model = ModelSpec::mean_shift(5, 1.0, normal_law()).unwrap();
        let rule = BandwidthRule::MedianHeuristic;
        let a = estimate_rejection_rate(&model, 20, &rule, 0.05, 40, 9).unwrap();
        let b = estimate_rejection_rate(&model, 20, &rule, 0.05, 40, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn be_ratio_normal_anchor() {
        // h is asymptotically normal in d; E|Z|^3 = 2 sqrt(2/pi) ~ 1.596 is
        // the lower anchor and the observed constant sits near 1.65.
        let model = ModelSpec::mean_shift(100, 0.0, normal_law()).unwrap();
        let k = KernelSpec::gaussian((100.0f64).powf(0.75)).unwrap();
        let r = be_ratio_estimate(&model, &k, 2000, 3).unwrap();
        assert!(r > 1.4 && r < 1.9, "ratio = {r}");
        assert!(be_ratio_estimate(&model, &k, 50, 3).is_err());
    }

    #[test]
    fn ratio_curve_structure_and_null() {
        let cfg = RatioCurveConfig {
            law: normal_law(),
            psi: 0.0,
            gamma_rules: vec![
                BandwidthRule::Power { c: 1.0, alpha: 0.5 },
                BandwidthRule::Power { c: 1.0, alpha: 1.0 },
            ],
            d_grid: vec![10, 20],
            pairs: PairsRule::Fixed(4000),
            master_seed: 0,
        };
        let recs = ratio_curve(&cfg).unwrap();
        assert_eq!(recs.len(), 4);
        for r in &recs {
            // null: ratio indistinguishable from 0 at ~3/sqrt(m)
            assert!(
                r.ratio.abs() <= 3.0 / (r.pairs as f64).sqrt() + 0.02,
                "null ratio {} at d={}",
                r.ratio,
                r.d
            );
        }
    }

    #[test]
    fn qq_export_row_count_and_order() {
        let cfg = QqConfig {
            law: normal_law(),
            psi: 0.0,
            n: 20,
            d_list: vec![5, 10],
            bandwidth: BandwidthRule::Power { c: 1.0, alpha: 0.5 },
            reps: 100,
            master_seed: 0,
        };
        let rows = qq_export(&cfg).unwrap();
        assert_eq!(rows.len(), 200);
        let d5: Vec<&QqRow> = rows.iter().filter(|r| r.d == 5).collect();
        assert_eq!(d5.len(), 100);
        assert!(d5.windows(2).all(|w| w[0].statistic <= w[1].statistic));
        assert!(d5.windows(2).all(|w| w[0].normal_quantile < w[1].normal_quantile));
        let (slope, intercept) = qq_fit(&rows.iter().filter(|r| r.d == 5).cloned().collect::<Vec<_>>()).unwrap();
        assert!(slope > 0.5 && slope < 1.6, "slope {slope}");
        assert!(intercept.abs() < 0.6, "intercept {intercept}");
    }

    #[test]
    fn fit_loglog_anchors() {
        let pts: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, (i as f64).powf(-0.5))).collect();
        let (s, _) = fit_loglog_slope(&pts).unwrap();
        assert_abs_diff_eq!(s, -0.5, epsilon = 1e-12);
        let flat: Vec<(f64, f64)> = (1..=4).map(|i| (i as f64, 2.5)).collect();
        let (s, i) = fit_loglog_slope(&flat).unwrap();
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(i, 2.5f64.ln(), epsilon = 1e-12);
        let two: Vec<(f64, f64)> = vec![(1.0, 3.0), (2.0, 12.0)];
        let (s, i) = fit_loglog_slope(&two).unwrap();
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(i, 3.0f64.ln(), epsilon = 1e-12);
        assert!(matches!(
            fit_loglog_slope(&[(1.0, -1.0), (2.0, 1.0)]),
            Err(Error::NonPositiveValue(_))
        ));
    }

    #[test]
    fn spearman_behaviour() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 5.0, 9.0];
        assert_relative_eq!(spearman(&x, &y).unwrap(), 1.0);
        let y_rev = [9.0, 5.0, 4.0, 2.0];
        assert_relative_eq!(spearman(&x, &y_rev).unwrap(), -1.0);
        let ties = [1.0, 1.0, 2.0, 3.0];
        let s = spearman(&x, &ties).unwrap();
        assert!(s > 0.8 && s <= 1.0);
    }

    #[test]
    fn sweep_preset_shapes_and_determinism() {
        let mut cfg = SweepConfig::preset(Preset::Setting1).unwrap();
        cfg.d_grid = vec![10, 20];
        cfg.reps = 30;
        cfg.bandwidth_rules = vec![
            BandwidthRule::MedianHeuristic,
            BandwidthRule::Power { c: 1.0, alpha: 0.75 },
        ];
        let (recs, summary) = run_sweep(&cfg).unwrap();
        assert_eq!(recs.len(), 4);
        let (recs2, _) = run_sweep(&cfg).unwrap();
        for (a, b) in recs.iter().zip(&recs2) {
            assert_eq!(a.rejection_rate, b.rejection_rate);
            assert_eq!(a.gamma_value, b.gamma_value);
        }
        assert_eq!(summary.slopes.len(), 2);
        assert!(summary.max_cross_rule_spread >= 0.0);
        for r in &recs {
            assert_abs_diff_eq!(
                r.stderr,
                (r.rejection_rate * (1.0 - r.rejection_rate) / r.reps as f64).sqrt(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn sweep_rejects_bad_configs() {
        let mut cfg = SweepConfig::preset(Preset::Setting1).unwrap();
        cfg.reps = 0;
        assert!(matches!(run_sweep(&cfg), Err(Error::ConfigInvalid(_))));
        let mut cfg = SweepConfig::preset(Preset::Setting1).unwrap();
        cfg.d_grid = vec![40, 40];
        assert!(run_sweep(&cfg).is_err());
        assert!(SweepConfig::preset(Preset::BeRatio).is_err());
    }

    #[test]
    fn null_preset_calibrates() {
        let mut cfg = SweepConfig::preset(Preset::Setting1).unwrap();
        cfg.psi_rule = PsiRule::Fixed(0.0);
        cfg.d_grid = vec![20];
        cfg.reps = 400;
        cfg.bandwidth_rules = vec![BandwidthRule::Power { c: 1.0, alpha: 0.75 }];
        let (recs, _) = run_sweep(&cfg).unwrap();
        let r = &recs[0];
        assert!(
            (r.rejection_rate - 0.05).abs() <= 3.0 * r.stderr + 0.012,
            "rate {} stderr {}",
            r.rejection_rate,
            r.stderr
        );
        assert_eq!(r.predicted_beta, 0.05);
    }

    #[test]
    fn csv_headers_are_stable() {
        let mut buf = Vec::new();
        write_records_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().lines().next().unwrap(),
            "d,n,gamma_rule,gamma_value,rejection_rate,stderr,predicted_beta,reps"
        );
        let mut buf = Vec::new();
        write_qq_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().lines().next().unwrap(),
            "d,rank,statistic,normal_quantile"
        );
    }

    #[test]
    fn empirical_v_concentrates() {
        let model = ModelSpec::mean_shift(10, 0.0, normal_law()).unwrap();
        let (m400, s400) = empirical_v_stats(&model, 100, 10.0, 200, 0).unwrap();
        let (m1600, s1600) = empirical_v_stats(&model, 400, 10.0, 200, 1).unwrap();
        // means agree across n, spread shrinks roughly like 1/sqrt(pairs)
        assert_relative_eq!(m400, m1600, max_relative = 0.15);
        assert!(s1600 < s400);
    }
}
