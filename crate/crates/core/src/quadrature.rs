//! Adaptive 1-d quadrature built on a Gauss-Legendre rule, plus the nested
//! 2-d driver used by the integral oracles.
//!
//! Nodes and weights are generated at startup by Newton iteration on the
//! Legendre polynomial, so there are no hand-copied coefficient tables.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const GL_ORDER: usize = 15;
const MAX_DEPTH: usize = 48;

/// Gauss-Legendre nodes/weights on [-1, 1].
fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GL_ORDER))
}

/// Newton iteration for the roots of P_n; weights 2/((1-x²)P_n'(x)²).
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn gl_integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive bisection: accept an interval when the two-half refinement
/// agrees with the single-panel value within the local tolerance.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> std::result::Result<f64, ()> {
        let mid = 0.5 * (a + b);
        let left = gl_integrate(f, a, mid);
        let right = gl_integrate(f, mid, b);
        let refined = left + right;
        // the relative floor keeps round-off from stalling the refinement
        let accept = tol.max(1e-13 * (left.abs() + right.abs() + whole.abs()));
        if (refined - whole).abs() <= accept || (b - a) < 1e-14 {
            return Ok(refined);
        }
        if depth == 0 {
            return Err(());
        }
        let l = recurse(f, a, mid, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, mid, b, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }
    let whole = gl_integrate(f, a, b);
    recurse(f, a, b, whole, tol, MAX_DEPTH).map_err(|_| Error::QuadratureNonConvergence { tol })
}

/// Nested adaptive 2-d integral of `w(u, v) f(u) g(v)` over a box.
///
/// The inner integral (over u) is resolved one order of magnitude tighter
/// than the outer request.
pub fn adaptive_quad2<W, F, G>(
    w: &W,
    f: &F,
    g: &G,
    u_range: (f64, f64),
    v_range: (f64, f64),
    tol: f64,
) -> Result<f64>
where
    W: Fn(f64, f64) -> f64,
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let inner_tol = tol * 0.1 / (v_range.1 - v_range.0).max(1.0);
    // Inner non-convergence is reported through a sentinel; NaN would
    // otherwise poison the outer integral silently.
    let failed = std::cell::Cell::new(false);
    let outer = |v: f64| -> f64 {
        let gv = g(v);
        if gv == 0.0 {
            return 0.0;
        }
        match adaptive_quad(&|u: f64| w(u, v) * f(u), u_range.0, u_range.1, inner_tol) {
            Ok(val) => val * gv,
            Err(_) => {
                failed.set(true);
                0.0
            }
        }
    };
    let result = adaptive_quad(&outer, v_range.0, v_range.1, tol)?;
    if failed.get() {
        return Err(Error::QuadratureNonConvergence { tol });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let f = |x: f64| 3.0 * x * x;
        assert_abs_diff_eq!(adaptive_quad(&f, 0.0, 2.0, 1e-12).unwrap(), 8.0, epsilon = 1e-11);
    }

    #[test]
    fn gaussian_integral() {
        // ∫ e^{-x²} over R = √π
        let f = |x: f64| (-x * x).exp();
        let v = adaptive_quad(&f, -12.0, 12.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::PI.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn oscillatory_needs_subdivision() {
        let f = |x: f64| (20.0 * x).sin().powi(2);
        let v = adaptive_quad(&f, 0.0, std::f64::consts::PI, 1e-11).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::PI / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn two_dimensional_product() {
        // ∫∫ u v² du dv over [0,1]² = 1/6
        let v = adaptive_quad2(
            &|_, _| 1.0,
            &|u| u,
            &|v| v * v,
            (0.0, 1.0),
            (0.0, 1.0),
            1e-11,
        )
        .unwrap();
        assert_abs_diff_eq!(v, 1.0 / 6.0, epsilon = 1e-9);
    }
}
