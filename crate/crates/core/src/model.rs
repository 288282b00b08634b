//! Generative model: i.i.d. coordinate laws, exact central moments, sampling
//! of the two samples, and random orthogonal rotations.
//!
//! Samples follow `x_i = U s_i + mu_p`, `y_i = U t_i + mu_q`, where the
//! coordinates of `s`, `t` are i.i.d. draws from a [`CoordinateLaw`].

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Tag;

/// Zero-mean per-coordinate law of the raw draws.
///
/// `scale` multiplies the raw draw; student-t draws are raw t (not
/// standardized to unit variance), so the reported `sigma2` is
/// `scale^2 * dof/(dof-2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CoordinateLaw {
    StandardNormal { scale: f64 },
    StudentT { scale: f64, dof: f64 },
    UniformCentered { scale: f64 },
}

impl CoordinateLaw {
    pub fn standard_normal(scale: f64) -> Result<Self> {
        check_scale(scale)?;
        Ok(Self::StandardNormal { scale })
    }

    /// Requires `dof > 2` so that the variance exists.
    pub fn student_t(dof: f64, scale: f64) -> Result<Self> {
        check_scale(scale)?;
        if !(dof > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "student-t needs dof > 2 for a finite variance, got {dof}"
            )));
        }
        Ok(Self::StudentT { scale, dof })
    }

    /// Uniform on `[-scale, scale]`.
    pub fn uniform_centered(scale: f64) -> Result<Self> {
        check_scale(scale)?;
        Ok(Self::UniformCentered { scale })
    }

    pub fn sigma2(&self) -> f64 {
        match *self {
            Self::StandardNormal { scale } => scale * scale,
            Self::StudentT { scale, dof } => scale * scale * dof / (dof - 2.0),
            Self::UniformCentered { scale } => scale * scale / 3.0,
        }
    }

    /// Exact central moment of order `k`, `None` when it does not exist.
    /// Odd moments of these symmetric laws are zero.
    pub fn central_moment(&self, k: u32) -> Option<f64> {
        if k == 0 {
            return Some(1.0);
        }
        match *self {
            Self::StandardNormal { scale } => {
                if k % 2 == 1 {
                    Some(0.0)
                } else {
                    // (k-1)!! * scale^k
                    let mut m = 1.0;
                    let mut i = k as i64 - 1;
                    while i > 1 {
                        m *= i as f64;
                        i -= 2;
                    }
                    Some(m * scale.powi(k as i32))
                }
            }
            Self::StudentT { scale, dof } => {
                if (k as f64) >= dof {
                    return None;
                }
                if k % 2 == 1 {
                    Some(0.0)
                } else {
                    // E t^k = (k-1)!! * dof^{k/2} / prod_{j=1}^{k/2} (dof - 2j)
                    let half = k / 2;
                    let mut num = 1.0;
                    let mut i = k as i64 - 1;
                    while i > 1 {
                        num *= i as f64;
                        i -= 2;
                    }
                    let mut den = 1.0;
                    for j in 1..=half {
                        den *= dof - 2.0 * j as f64;
                    }
                    Some(num * dof.powi(half as i32) / den * scale.powi(k as i32))
                }
            }
            Self::UniformCentered { scale } => {
                if k % 2 == 1 {
                    Some(0.0)
                } else {
                    Some(scale.powi(k as i32) / (k as f64 + 1.0))
                }
            }
        }
    }

    /// Draw one raw (zero-mean) value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::StandardNormal { scale } => {
                let z: f64 = rng.sample(StandardNormal);
                scale * z
            }
            Self::StudentT { scale, dof } => {
                let t = StudentT::new(dof).expect("dof validated at construction");
                scale * t.sample(rng)
            }
            Self::UniformCentered { scale } => scale * (2.0 * rng.random::<f64>() - 1.0),
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        // Match arm hoisted out of the loop; StudentT construction is not free.
        match *self {
            Self::StandardNormal { scale } => {
                for v in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = scale * z;
                }
            }
            Self::StudentT { scale, dof } => {
                let t = StudentT::new(dof).expect("dof validated at construction");
                for v in out.iter_mut() {
                    *v = scale * t.sample(rng);
                }
            }
            Self::UniformCentered { scale } => {
                for v in out.iter_mut() {
                    *v = scale * (2.0 * rng.random::<f64>() - 1.0);
                }
            }
        }
    }

    /// Density of the raw (zero-mean) law, in closed form.
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::StandardNormal { scale } => {
                let z = x / scale;
                (-0.5 * z * z).exp() / (scale * (2.0 * std::f64::consts::PI).sqrt())
            }
            Self::StudentT { scale, dof } => {
                let z = x / scale;
                let c = (ln_gamma(0.5 * (dof + 1.0))
                    - ln_gamma(0.5 * dof)
                    - 0.5 * (dof * std::f64::consts::PI).ln())
                .exp();
                c * (1.0 + z * z / dof).powf(-0.5 * (dof + 1.0)) / scale
            }
            Self::UniformCentered { scale } => {
                if x.abs() <= scale {
                    0.5 / scale
                } else {
                    0.0
                }
            }
        }
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scale must be > 0, got {scale}"
        )));
    }
    Ok(())
}

/// Lanczos approximation (g = 7, n = 9), ~1e-13 relative accuracy.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, &g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Central moments of the scaled coordinate law, populated up to the
/// requested order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub sigma2: f64,
    pub mu3: Option<f64>,
    pub mu4: Option<f64>,
    pub mu6: Option<f64>,
}

/// Exact central moments up to `max_order` (one of 2, 3, 4, 6).
///
/// Errors with [`Error::MomentUndefined`] when the law lacks a requested
/// order, e.g. student-t with `dof = 4` and `max_order = 4`.
pub fn central_moments(law: &CoordinateLaw, max_order: u32) -> Result<MomentSet> {
    if !matches!(max_order, 2 | 3 | 4 | 6) {
        return Err(Error::InvalidParameter(format!(
            "max_order must be one of 2, 3, 4, 6, got {max_order}"
        )));
    }
    let need = |k: u32| -> Result<f64> {
        law.central_moment(k).ok_or_else(|| Error::MomentUndefined {
            law: format!("{law:?}"),
            order: k,
        })
    };
    let sigma2 = need(2)?;
    let mu3 = if max_order >= 3 { Some(need(3)?) } else { None };
    let mu4 = if max_order >= 4 { Some(need(4)?) } else { None };
    let mu6 = if max_order >= 6 { Some(need(6)?) } else { None };
    Ok(MomentSet {
        sigma2,
        mu3,
        mu4,
        mu6,
    })
}

/// Rotation applied to the raw coordinates in assumption A1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rotation {
    Identity,
    Random { seed: u64 },
}

/// The full generative model: dimension, means, rotation and coordinate law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub d: usize,
    pub mu_p: Vec<f64>,
    pub mu_q: Vec<f64>,
    pub rotation: Rotation,
    pub law: CoordinateLaw,
}

impl ModelSpec {
    pub fn new(
        d: usize,
        mu_p: Vec<f64>,
        mu_q: Vec<f64>,
        rotation: Rotation,
        law: CoordinateLaw,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("d must be >= 1".into()));
        }
        if mu_p.len() != d || mu_q.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: if mu_p.len() != d {
                    mu_p.len()
                } else {
                    mu_q.len()
                },
            });
        }
        Ok(Self {
            d,
            mu_p,
            mu_q,
            rotation,
            law,
        })
    }

    /// Mean-shift model with SNR `psi`: the shift is spread equally across
    /// coordinates, `delta_i = psi * sigma / sqrt(d)`, and `mu_q = 0`.
    pub fn mean_shift(d: usize, psi: f64, law: CoordinateLaw) -> Result<Self> {
        if psi < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "psi must be >= 0, got {psi}"
            )));
        }
        let sigma = law.sigma2().sqrt();
        let di = psi * sigma / (d as f64).sqrt();
        Self::new(d, vec![di; d], vec![0.0; d], Rotation::Identity, law)
    }

    /// `delta = mu_p - mu_q`.
    pub fn delta(&self) -> Vec<f64> {
        self.mu_p
            .iter()
            .zip(&self.mu_q)
            .map(|(p, q)| p - q)
            .collect()
    }

    pub fn delta_norm(&self) -> f64 {
        self.delta().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// SNR Ψ = ‖δ‖/σ.
    pub fn snr_psi(&self) -> f64 {
        self.delta_norm() / self.law.sigma2().sqrt()
    }
}

/// Draw `n` observations from each of P and Q.
///
/// Rows of X are `U s + mu_p`, rows of Y are `U t + mu_q`; the output is a
/// pure function of `(model, n, seed)`.
pub fn sample_pair(model: &ModelSpec, n: usize, seed: u64) -> Result<(Array2<f64>, Array2<f64>)> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let d = model.d;
    let mut rng = ChaCha8Rng::seed_from_u64(Tag::Sample.seed(seed));
    let mut s = Array2::<f64>::zeros((n, d));
    let mut t = Array2::<f64>::zeros((n, d));
    model.law.fill(&mut rng, s.as_slice_mut().expect("standard layout"));
    model.law.fill(&mut rng, t.as_slice_mut().expect("standard layout"));

    let (mut x, mut y) = match model.rotation {
        Rotation::Identity => (s, t),
        Rotation::Random { seed } => {
            let u = random_rotation(d, seed);
            // row vectors: x_i^T = s_i^T U^T
            (s.dot(&u.t()), t.dot(&u.t()))
        }
    };
    for mut row in x.rows_mut() {
        for (v, m) in row.iter_mut().zip(&model.mu_p) {
            *v += m;
        }
    }
    for mut row in y.rows_mut() {
        for (v, m) in row.iter_mut().zip(&model.mu_q) {
            *v += m;
        }
    }
    Ok((x, y))
}

/// Random d×d orthogonal matrix: modified Gram-Schmidt orthonormalization of
/// a seeded standard-normal matrix. The triangular factor's diagonal is
/// positive by construction, which makes the output unique for a given seed.
pub fn random_rotation(d: usize, seed: u64) -> Array2<f64> {
    assert!(d >= 1, "d must be >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(Tag::Rotation.seed(seed));
    let mut q = Array2::<f64>::zeros((d, d));
    let mut col = vec![0.0f64; d];
    for j in 0..d {
        loop {
            for v in col.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v = z;
            }
            // two MGS passes keep ‖QᵀQ − I‖ near machine precision
            for _ in 0..2 {
                for k in 0..j {
                    let proj: f64 = (0..d).map(|i| q[[i, k]] * col[i]).sum();
                    for i in 0..d {
                        col[i] -= proj * q[[i, k]];
                    }
                }
            }
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for i in 0..d {
                    q[[i, j]] = col[i] / norm;
                }
                break;
            }
            // resample on (astronomically unlikely) near-dependence
        }
    }
    q
}
