//! Test statistics: the h kernel, the linear-time MMD² and its studentized
//! test, the quadratic-time MMD²_u, the CQ mean-test statistic, and a generic
//! permutation calibrator.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{eval_kernel, resolve_bandwidth, BandwidthRule, KernelFamily, KernelSpec};
use crate::normal::{normal_quantile, phi};
use crate::seed::{substream, Tag};

/// The h values over the disjoint sample pairs, kept for variance estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct HSample {
    pub values: Vec<f64>,
}

/// h(z, z') = k(x,x') + k(y,y') - k(x,y') - k(x',y).
pub fn h_value(k: &KernelSpec, x: &[f64], xp: &[f64], y: &[f64], yp: &[f64]) -> Result<f64> {
    Ok(eval_kernel(k, x, xp)? + eval_kernel(k, y, yp)?
        - eval_kernel(k, x, yp)?
        - eval_kernel(k, xp, y)?)
}

fn row<'a>(m: &'a ArrayView2<'_, f64>, i: usize) -> &'a [f64] {
    m.row(i).to_slice().expect("matrix rows must be contiguous")
}

/// Linear-time MMD² estimate: the mean of h over the n/2 disjoint
/// consecutive pairs (z_1,z_2), (z_3,z_4), ...
///
/// Odd n is handled by dropping the last observation of each set (the
/// caller can detect this from the returned sample length).
pub fn mmd2_linear(
    k: &KernelSpec,
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
) -> Result<(f64, HSample)> {
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows().max(x.ncols()),
            got: y.nrows().max(y.ncols()),
        });
    }
    let n = x.nrows() & !1; // trim odd n
    let pairs = n / 2;
    if pairs == 0 {
        return Err(Error::TooFewPairs { pairs: 0 });
    }
    let mut values = Vec::with_capacity(pairs);
    for i in 0..pairs {
        let (a, b) = (2 * i, 2 * i + 1);
        values.push(h_value(k, row(&x, a), row(&x, b), row(&y, a), row(&y, b))?);
    }
    let mmd2 = values.iter().sum::<f64>() / pairs as f64;
    Ok((mmd2, HSample { values }))
}

/// v = twice the unbiased sample variance of the h values.
pub fn empirical_variance_v(h: &HSample) -> Result<f64> {
    let m = h.values.len();
    if m < 2 {
        return Err(Error::TooFewPairs { pairs: m });
    }
    let mean = h.values.iter().sum::<f64>() / m as f64;
    let ss = h.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    Ok(2.0 * ss / (m as f64 - 1.0))
}

/// Outcome of the studentized linear-time test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestOutcome {
    pub mmd2_l: f64,
    /// variance estimate v (twice the sample variance of h)
    pub v: f64,
    /// √n · MMD²_l / √v
    pub statistic: f64,
    pub z_alpha: f64,
    pub reject: bool,
    pub p_value: f64,
    /// effective (even) sample size used
    pub n: usize,
    pub gamma_used: f64,
    /// v was zero; the decision fell back to the sign of mmd2_l
    pub degenerate: bool,
    /// an odd observation was dropped from each sample
    pub trimmed: bool,
}

/// One-sided linear-time MMD test: reject when √n·MMD²_l/√v > z_{1-α}.
///
/// The bandwidth rule is resolved on the pooled sample before any kernel
/// evaluation; the resolved value is recorded in `gamma_used`.
pub fn linear_test(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    family: KernelFamily,
    rule: &BandwidthRule,
    alpha: f64,
) -> Result<TestOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0,1), got {alpha}"
        )));
    }
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.nrows(),
        });
    }
    let d = x.ncols();
    let gamma = if family == KernelFamily::Linear {
        1.0
    } else {
        match rule {
            BandwidthRule::MedianHeuristic => {
                let mut pooled = Array2::zeros((0, d));
                pooled.append(Axis(0), x).expect("same width");
                pooled.append(Axis(0), y).expect("same width");
                resolve_bandwidth(rule, d, Some(pooled.view()))?
            }
            _ => resolve_bandwidth(rule, d, None)?,
        }
    };
    let spec = KernelSpec::new(family, gamma)?;
    let trimmed = x.nrows() % 2 == 1;
    let n = x.nrows() & !1;
    let (mmd2_l, h) = mmd2_linear(&spec, x, y)?;
    let v = empirical_variance_v(&h)?;
    let z_alpha = normal_quantile(1.0 - alpha)?;

    let (statistic, degenerate) = if v > 0.0 {
        ((n as f64).sqrt() * mmd2_l / v.sqrt(), false)
    } else if mmd2_l > 0.0 {
        (f64::INFINITY, true)
    } else if mmd2_l < 0.0 {
        (f64::NEG_INFINITY, true)
    } else {
        (0.0, true)
    };
    let reject = statistic > z_alpha;
    let p_value = if degenerate {
        if mmd2_l > 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        1.0 - phi(statistic)
    };
    Ok(TestOutcome {
        mmd2_l,
        v,
        statistic,
        z_alpha,
        reject,
        p_value,
        n,
        gamma_used: gamma,
        degenerate,
        trimmed,
    })
}

/// Quadratic-time unbiased MMD² U-statistic.
pub fn mmd2_u(k: &KernelSpec, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<f64> {
    let n = x.nrows();
    let m = y.nrows();
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter(
            "mmd2_u needs at least 2 observations per sample".into(),
        ));
    }
    if x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: y.ncols(),
        });
    }
    let mut xx = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                xx += eval_kernel(k, row(&x, i), row(&x, j))?;
            }
        }
    }
    let mut yy = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                yy += eval_kernel(k, row(&y, i), row(&y, j))?;
            }
        }
    }
    let mut xy = 0.0;
    for i in 0..n {
        for j in 0..m {
            xy += eval_kernel(k, row(&x, i), row(&y, j))?;
        }
    }
    Ok(xx / (n as f64 * (n as f64 - 1.0)) + yy / (m as f64 * (m as f64 - 1.0))
        - 2.0 * xy / (n as f64 * m as f64))
}

/// Chen-Qin high-dimensional mean-test statistic. Identical to `mmd2_u`
/// with the linear kernel; kept as an independent computation so the two
/// routes can check each other.
pub fn cq_statistic(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<f64> {
    let n = x.nrows();
    let m = y.nrows();
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter(
            "cq_statistic needs at least 2 observations per sample".into(),
        ));
    }
    if x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: y.ncols(),
        });
    }
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(p, q)| p * q).sum() };
    let mut within = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                within += dot(row(&x, i), row(&x, j));
            }
        }
    }
    let mut within_y = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                within_y += dot(row(&y, i), row(&y, j));
            }
        }
    }
    let mut cross = 0.0;
    for i in 0..n {
        for j in 0..m {
            cross += dot(row(&x, i), row(&y, j));
        }
    }
    Ok(within / (n as f64 * (n as f64 - 1.0)) + within_y / (m as f64 * (m as f64 - 1.0))
        - 2.0 * cross / (n as f64 * m as f64))
}

pub use crate::normal::normal_quantile as quantile;

/// Permutation calibration for an arbitrary two-sample statistic.
///
/// Recomputes `stat_fn` on `b` label-permuted poolings of the rows.
/// Returns the empirical (1-α) quantile of the permuted statistics and the
/// p-value `(1 + #{perm >= observed}) / (b + 1)`. Each permutation draws
/// its own substream from `seed`, so the result is independent of
/// evaluation order.
pub fn permutation_threshold<F>(
    stat_fn: F,
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<(f64, f64)>
where
    F: Fn(ArrayView2<'_, f64>, ArrayView2<'_, f64>) -> Result<f64> + Sync,
{
    if b == 0 {
        return Err(Error::InvalidParameter("need at least 1 permutation".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0,1), got {alpha}"
        )));
    }
    if x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: y.ncols(),
        });
    }
    let observed = stat_fn(x, y)?;
    let n = x.nrows();
    let total = n + y.nrows();
    let d = x.ncols();
    let mut pooled = Array2::zeros((0, d));
    pooled.append(Axis(0), x).expect("same width");
    pooled.append(Axis(0), y).expect("same width");

    let base = Tag::Permutation.seed(seed);
    let mut stats = Vec::with_capacity(b);
    let mut idx: Vec<usize> = (0..total).collect();
    let mut xp = Array2::zeros((n, d));
    let mut yp = Array2::zeros((total - n, d));
    for rep in 0..b {
        let mut rng = ChaCha8Rng::seed_from_u64(substream(base, rep as u64));
        idx.shuffle(&mut rng);
        for (r, &i) in idx[..n].iter().enumerate() {
            xp.row_mut(r).assign(&pooled.row(i));
        }
        for (r, &i) in idx[n..].iter().enumerate() {
            yp.row_mut(r).assign(&pooled.row(i));
        }
        stats.push(stat_fn(xp.view(), yp.view())?);
    }
    let ge = stats.iter().filter(|s| **s >= observed).count();
    let p_value = (1 + ge) as f64 / (b + 1) as f64;
    let mut sorted = stats;
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // order statistic at ceil((1-alpha) b), 1-based
    let k = (((1.0 - alpha) * b as f64).ceil() as usize).clamp(1, b);
    let threshold = sorted[k - 1];
    Ok((threshold, p_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use ndarray::array;

    fn g1() -> KernelSpec {
        KernelSpec::gaussian(1.0).unwrap()
    }

    #[test]
    fn h_cancels_when_samples_coincide() {
        let k = g1();
        let v = h_value(&k, &[1.0, 2.0], &[0.5, 0.1], &[1.0, 2.0], &[0.5, 0.1]).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn h_hand_evaluated_example() {
        // four kernel terms: 1 + 1 - e^{-1} - e^{-1}
        let k = g1();
        let v = h_value(&k, &[0.0], &[0.0], &[1.0], &[1.0]).unwrap();
        assert_relative_eq!(v, 2.0 - 2.0 * (-1.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(v, 1.264_241_1, max_relative = 1e-7);
    }

    #[test]
    fn h_symmetric_under_pair_swap() {
        let k = g1();
        let a = h_value(&k, &[0.3], &[1.7], &[-0.2], &[0.9]).unwrap();
        let b = h_value(&k, &[1.7], &[0.3], &[0.9], &[-0.2]).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
    }

    #[test]
    fn mmd2_linear_single_pair() {
        let x = array![[0.0], [0.0]];
        let y = array![[1.0], [1.0]];
        let (m, h) = mmd2_linear(&g1(), x.view(), y.view()).unwrap();
        assert_eq!(h.values.len(), 1);
        assert_relative_eq!(m, 2.0 - 2.0 * (-1.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn mmd2_linear_zero_when_x_equals_y() {
        let x = array![[0.1, 2.0], [-1.0, 0.3], [0.7, 0.7], [2.2, -0.1]];
        let (m, _) = mmd2_linear(&g1(), x.view(), x.view()).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn mmd2_linear_matches_pairing_oracle() {
        // brute-force pairing oracle on n=6
        let x = array![[0.1], [1.2], [-0.4], [0.9], [2.0], [-1.5]];
        let y = array![[0.6], [-0.2], [1.1], [0.0], [-0.9], [0.4]];
        let k = g1();
        let (m, h) = mmd2_linear(&k, x.view(), y.view()).unwrap();
        let mut expect = 0.0;
        for i in 0..3 {
            expect += h_value(
                &k,
                row(&x.view(), 2 * i),
                row(&x.view(), 2 * i + 1),
                row(&y.view(), 2 * i),
                row(&y.view(), 2 * i + 1),
            )
            .unwrap();
        }
        expect /= 3.0;
        assert_abs_diff_eq!(m, expect, epsilon = 1e-12);
        assert_eq!(h.values.len(), 3);
    }

    #[test]
    fn odd_n_trims_last_observation() {
        let x = array![[0.0], [1.0], [5.0]];
        let y = array![[0.5], [1.5], [9.0]];
        let (m, h) = mmd2_linear(&g1(), x.view(), y.view()).unwrap();
        let x2 = array![[0.0], [1.0]];
        let y2 = array![[0.5], [1.5]];
        let (m2, _) = mmd2_linear(&g1(), x2.view(), y2.view()).unwrap();
        assert_eq!(m, m2);
        assert_eq!(h.values.len(), 1);
    }

    #[test]
    fn variance_hand_example() {
        let h = HSample {
            values: vec![0.0, 2.0],
        };
        assert_abs_diff_eq!(empirical_variance_v(&h).unwrap(), 4.0, epsilon = 1e-15);
        let c = HSample {
            values: vec![0.7; 5],
        };
        assert_eq!(empirical_variance_v(&c).unwrap(), 0.0);
        let one = HSample { values: vec![1.0] };
        assert!(matches!(
            empirical_variance_v(&one),
            Err(Error::TooFewPairs { pairs: 1 })
        ));
    }

    #[test]
    fn degenerate_test_when_x_equals_y() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [2.0, 2.0]];
        let out = linear_test(
            x.view(),
            x.view(),
            KernelFamily::Gaussian,
            &BandwidthRule::Fixed(1.0),
            0.05,
        )
        .unwrap();
        assert!(out.degenerate);
        assert!(!out.reject);
        assert_eq!(out.mmd2_l, 0.0);
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn linear_test_records_bandwidth_and_trims() {
        let x = array![[0.0], [1.0], [2.0], [3.0], [9.0]];
        let y = array![[0.5], [1.5], [2.5], [3.5], [7.0]];
        let out = linear_test(
            x.view(),
            y.view(),
            KernelFamily::Gaussian,
            &BandwidthRule::MedianHeuristic,
            0.05,
        )
        .unwrap();
        assert!(out.trimmed);
        assert_eq!(out.n, 4);
        assert!(out.gamma_used > 0.0);
        assert_abs_diff_eq!(out.z_alpha, 1.644_853_627, epsilon = 1e-8);
    }

    #[test]
    fn mmd2_u_brute_force_examples() {
        let k = KernelSpec::linear();
        let x = array![[1.0], [-1.0]];
        let v = mmd2_u(&k, x.view(), x.view()).unwrap();
        assert_abs_diff_eq!(v, -2.0, epsilon = 1e-14);

        let x = array![[1.0], [2.0]];
        let y = array![[0.0], [1.0]];
        let v = mmd2_u(&k, x.view(), y.view()).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn cq_equals_linear_mmd2u() {
        let x = array![[1.0], [2.0]];
        let y = array![[0.0], [1.0]];
        assert_abs_diff_eq!(cq_statistic(x.view(), y.view()).unwrap(), 0.5, epsilon = 1e-14);

        // random instance
        let x = array![
            [0.3, -1.2, 0.4],
            [1.1, 0.2, -0.5],
            [-0.7, 0.9, 1.3],
            [0.0, 0.5, -1.1],
            [2.1, -0.3, 0.8]
        ];
        let y = array![
            [1.3, 0.2, 0.0],
            [-0.1, 1.2, 0.5],
            [0.7, -0.9, 0.3],
            [1.0, 0.0, -0.2],
            [-0.4, 0.6, 1.8]
        ];
        let a = cq_statistic(x.view(), y.view()).unwrap();
        let b = mmd2_u(&KernelSpec::linear(), x.view(), y.view()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn cq_all_zero_y_reduces_to_within_x() {
        let x = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let y = Array2::zeros((3, 2));
        let v = cq_statistic(x.view(), y.view()).unwrap();
        let k = KernelSpec::linear();
        let mut xx = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    xx += eval_kernel(&k, row(&x.view(), i), row(&x.view(), j)).unwrap();
                }
            }
        }
        assert_abs_diff_eq!(v, xx / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn permutation_is_deterministic_and_calibrated() {
        let x = array![[0.2], [1.4], [-0.8], [0.9], [0.1], [2.0]];
        let y = array![[0.4], [1.1], [-0.2], [0.6], [0.3], [1.7]];
        let f = |a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>| cq_statistic(a, b);
        let (t1, p1) = permutation_threshold(f, x.view(), y.view(), 0.05, 64, 5).unwrap();
        let (t2, p2) = permutation_threshold(f, x.view(), y.view(), 0.05, 64, 5).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(p1, p2);
        assert!(p1 >= 1.0 / 65.0);

        // identical samples: observed stat can't be extreme
        let (_, p) = permutation_threshold(f, x.view(), x.view(), 0.05, 99, 1).unwrap();
        assert!(p > 0.05);
        assert!(permutation_threshold(f, x.view(), y.view(), 0.05, 0, 1).is_err());
    }
}
