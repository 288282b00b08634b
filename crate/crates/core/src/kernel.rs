//! Kernel evaluation and bandwidth resolution.
//!
//! The Gaussian kernel is `exp(-||x-y||^2 / gamma^2)` with no factor 2 in the
//! denominator; the median heuristic returns the median pairwise *distance*
//! (not squared distance), which is plugged in directly as `gamma`.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Gaussian,
    Laplace,
    Linear,
}

/// Kernel family plus bandwidth. `gamma` is ignored by the linear kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub gamma: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, gamma: f64) -> Result<Self> {
        if family != KernelFamily::Linear && !(gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be > 0 for {family:?}, got {gamma}"
            )));
        }
        Ok(Self { family, gamma })
    }

    pub fn gaussian(gamma: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, gamma)
    }

    pub fn laplace(gamma: f64) -> Result<Self> {
        Self::new(KernelFamily::Laplace, gamma)
    }

    pub fn linear() -> Self {
        Self {
            family: KernelFamily::Linear,
            gamma: 1.0,
        }
    }
}

/// How the bandwidth is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthRule {
    Fixed(f64),
    /// `gamma = c * d^alpha`
    Power { c: f64, alpha: f64 },
    MedianHeuristic,
}

impl std::fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BandwidthRule::Fixed(g) => write!(f, "fixed({g})"),
            BandwidthRule::Power { c, alpha } => {
                if *c == 1.0 {
                    write!(f, "d^{alpha}")
                } else {
                    write!(f, "{c}*d^{alpha}")
                }
            }
            BandwidthRule::MedianHeuristic => write!(f, "median"),
        }
    }
}

pub fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn l1_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// k(x, y) for the given spec. Symmetric in its arguments.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(match spec.family {
        KernelFamily::Gaussian => (-sq_dist(x, y) / (spec.gamma * spec.gamma)).exp(),
        KernelFamily::Laplace => (-l1_dist(x, y) / spec.gamma).exp(),
        KernelFamily::Linear => dot(x, y),
    })
}

/// Median of the m(m-1)/2 pairwise Euclidean distances (lower median for
/// even counts).
pub fn median_heuristic(pooled: ArrayView2<'_, f64>) -> Result<f64> {
    let m = pooled.nrows();
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "median heuristic needs at least 2 points, got {m}"
        )));
    }
    let rows: Vec<&[f64]> = (0..m)
        .map(|i| {
            pooled
                .row(i)
                .to_slice()
                .expect("pooled matrix must be contiguous")
        })
        .collect();
    let mut dists = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            dists.push(sq_dist(rows[i], rows[j]).sqrt());
        }
    }
    let idx = (dists.len() - 1) / 2; // lower median
    let (_, med, _) = dists.select_nth_unstable_by(idx, |a, b| a.partial_cmp(b).unwrap());
    let gamma = *med;
    if gamma == 0.0 {
        return Err(Error::DegenerateData(
            "median pairwise distance is zero".into(),
        ));
    }
    Ok(gamma)
}

/// Resolve a bandwidth rule to a concrete gamma.
///
/// The median heuristic requires pooled data; the power rule only needs `d`.
pub fn resolve_bandwidth(
    rule: &BandwidthRule,
    d: usize,
    pooled: Option<ArrayView2<'_, f64>>,
) -> Result<f64> {
    match rule {
        BandwidthRule::Fixed(g) => {
            if !(*g > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "fixed bandwidth must be > 0, got {g}"
                )));
            }
            Ok(*g)
        }
        BandwidthRule::Power { c, alpha } => {
            if !(*c > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "power-rule constant must be > 0, got {c}"
                )));
            }
            Ok(c * (d as f64).powf(*alpha))
        }
        BandwidthRule::MedianHeuristic => {
            let pooled = pooled.ok_or_else(|| {
                Error::MissingData("median heuristic requires pooled samples".into())
            })?;
            median_heuristic(pooled)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use ndarray::array;

    #[test]
    fn gaussian_anchors() {
        let k = KernelSpec::gaussian(2.0).unwrap();
        assert_eq!(eval_kernel(&k, &[1.0, 2.0], &[1.0, 2.0]).unwrap(), 1.0);
        // ||x-y||^2 = gamma^2 -> e^{-1}
        let v = eval_kernel(&k, &[0.0], &[2.0]).unwrap();
        assert_relative_eq!(v, (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn linear_is_dot_product() {
        let k = KernelSpec::linear();
        assert_eq!(eval_kernel(&k, &[1.0, 2.0], &[3.0, -1.0]).unwrap(), 1.0);
    }

    #[test]
    fn kernel_outputs_in_unit_interval() {
        let g = KernelSpec::gaussian(1.0).unwrap();
        let l = KernelSpec::laplace(1.0).unwrap();
        for (x, y) in [([0.5, -3.0], [2.0, 0.0]), ([0.0, 0.0], [10.0, 10.0])] {
            for k in [&g, &l] {
                let v = eval_kernel(k, &x, &y).unwrap();
                assert!(v > 0.0 && v <= 1.0);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        assert!(matches!(
            eval_kernel(&k, &[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn median_single_pair() {
        let pooled = array![[0.0], [2.0]];
        assert_eq!(median_heuristic(pooled.view()).unwrap(), 2.0);
    }

    #[test]
    fn median_three_points_enumerated() {
        // distances {1, 2, 3} -> median 2
        let pooled = array![[0.0], [1.0], [3.0]];
        assert_eq!(median_heuristic(pooled.view()).unwrap(), 2.0);
    }

    #[test]
    fn median_lower_for_even_counts() {
        // 4 points on a line at 0,1,2,4: distances {1,1,2,2,3,4} -> lower median 2
        let pooled = array![[0.0], [1.0], [2.0], [4.0]];
        assert_eq!(median_heuristic(pooled.view()).unwrap(), 2.0);
    }

    #[test]
    fn median_degenerate_data() {
        let pooled = array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]];
        assert!(matches!(
            median_heuristic(pooled.view()),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn resolve_power_and_fixed() {
        let g = resolve_bandwidth(&BandwidthRule::Power { c: 1.0, alpha: 0.75 }, 16, None).unwrap();
        assert_abs_diff_eq!(g, 8.0, epsilon = 1e-12);
        let g = resolve_bandwidth(&BandwidthRule::Fixed(5.0), 100, None).unwrap();
        assert_eq!(g, 5.0);
        assert!(matches!(
            resolve_bandwidth(&BandwidthRule::MedianHeuristic, 3, None),
            Err(Error::MissingData(_))
        ));
    }
}
