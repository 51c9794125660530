use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use crate::error::{Error, Result};

/// Stopping rules of [`nlls_minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Bound on `‖Jᵀr‖∞ / (‖J‖_F ‖r‖)`.
    pub gradient_tolerance: f64,
    /// Relative parameter step below which the iteration stops.
    pub step_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-15,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NllsResult {
    pub params: Vec<f64>,
    /// `s² (JᵀJ)⁻¹` with `s² = RSS / (m − n)`, row-major; `None` if `JᵀJ`
    /// is singular or `m = n`.
    pub covariance: Option<Vec<Vec<f64>>>,
    /// `√RSS`
    pub residual_norm: f64,
    pub initial_residual_norm: f64,
    pub iterations: usize,
    /// Relative gradient norm at the solution.
    pub gradient_norm: f64,
}

impl NllsResult {
    /// Square roots of the covariance diagonal.
    pub fn uncertainties(&self) -> Option<Vec<f64>> {
        self.covariance
            .as_ref()
            .map(|c| (0..c.len()).map(|i| c[i][i].max(0.0).sqrt()).collect())
    }
}

fn rss(model: &dyn Fn(f64, &[f64]) -> f64, x: &[f64], y: &[f64], p: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - model(xi, p);
            r * r
        })
        .sum()
}

/// Central-difference Jacobian of the model values, `m × n`.
fn jacobian(model: &dyn Fn(f64, &[f64]) -> f64, x: &[f64], p: &[f64]) -> Vec<Vec<f64>> {
    let mut jac = vec![vec![0.0; p.len()]; x.len()];
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = 1e-6 * p[j].abs().max(1e-3);
        q[j] = p[j] + h;
        let up: Vec<f64> = x.iter().map(|&xi| model(xi, &q)).collect();
        q[j] = p[j] - h;
        for (i, &xi) in x.iter().enumerate() {
            jac[i][j] = (up[i] - model(xi, &q)) / (2.0 * h);
        }
        q[j] = p[j];
    }
    jac
}

/// Solves `a x = b` by Gauss–Jordan elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[piv][col].abs() > 1e-300 * scale) || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for k in col..n {
            a[col][k] /= d;
        }
        b[col] /= d;
        for row in 0..n {
            if row != col {
                let f = a[row][col];
                if f != 0.0 {
                    for k in col..n {
                        a[row][k] -= f * a[col][k];
                    }
                    b[row] -= f * b[col];
                }
            }
        }
    }
    Some(b)
}

/// Inverse of a square matrix, `None` if singular.
pub fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve(a.to_vec(), e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

/// Levenberg–Marquardt minimization of `Σ (y_i − model(x_i, p))²`.
///
/// The damping is scaled by the diagonal of `JᵀJ`. A step is accepted only
/// if it lowers the residual sum, so the result never fits worse than
/// `init`. When the damping saturates without further progress the
/// current point is returned as the minimum reachable in floating point.
pub fn nlls_minimize(
    model: &dyn Fn(f64, &[f64]) -> f64,
    x: &[f64],
    y: &[f64],
    init: &[f64],
    options: &LmOptions,
) -> Result<NllsResult> {
    let (m, n) = (x.len(), init.len());
    if x.len() != y.len() {
        return Err(Error::Usage("x and y lengths differ".into()));
    }
    if m < n {
        return Err(Error::InsufficientData { needed: n, got: m });
    }
    if x.iter().chain(y).chain(init).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite fit input".into()));
    }
    let mut p = init.to_vec();
    let mut cost = rss(model, x, y, &p);
    let initial_cost = cost;
    let mut lambda = options.initial_damping;
    let mut iterations = 0;
    let mut gradient_norm;
    loop {
        let jac = jacobian(model, x, &p);
        let r: Vec<f64> = x.iter().zip(y).map(|(&xi, &yi)| yi - model(xi, &p)).collect();
        let mut jtj = vec![vec![0.0; n]; n];
        let mut g = vec![0.0; n];
        for (row, ri) in jac.iter().zip(&r) {
            for a in 0..n {
                g[a] += row[a] * ri;
                for b in 0..n {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let jnorm = (0..n).map(|a| jtj[a][a]).sum::<f64>().sqrt();
        let rnorm = cost.sqrt();
        gradient_norm = if jnorm * rnorm > 0.0 {
            g.iter().fold(0.0f64, |mx, v| mx.max(v.abs())) / (jnorm * rnorm)
        } else {
            0.0
        };
        if cost == 0.0 || gradient_norm <= options.gradient_tolerance {
            break;
        }
        if iterations >= options.max_iterations {
            return Err(Error::FitNotConverged {
                iterations,
                best_params: p,
                best_residual_norm: cost.sqrt(),
            });
        }
        iterations += 1;
        let mut accepted = false;
        let mut small_step = false;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[k][k] += lambda * jtj[k][k].max(1e-30);
            }
            let Some(step) = solve(a, g.clone()) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
            let trial_cost = rss(model, x, y, &trial);
            if trial_cost.is_finite() && trial_cost < cost {
                small_step = step
                    .iter()
                    .zip(&p)
                    .all(|(s, v)| s.abs() <= options.step_tolerance * v.abs().max(1e-300));
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || small_step {
            break;
        }
    }
    let covariance = if m > n {
        let jac = jacobian(model, x, &p);
        let mut jtj = vec![vec![0.0; n]; n];
        for row in &jac {
            for a in 0..n {
                for b in 0..n {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let s2 = cost / (m - n) as f64;
        invert(&jtj).map(|inv| {
            let mut c: Vec<Vec<f64>> = inv
                .into_iter()
                .map(|row| row.into_iter().map(|v| v * s2).collect())
                .collect();
            for a in 0..n {
                for b in 0..a {
                    let v = 0.5 * (c[a][b] + c[b][a]);
                    c[a][b] = v;
                    c[b][a] = v;
                }
            }
            c
        })
    } else {
        None
    };
    Ok(NllsResult {
        params: p,
        covariance,
        residual_norm: cost.sqrt(),
        initial_residual_norm: initial_cost.sqrt(),
        iterations,
        gradient_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_exact() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let r = nlls_minimize(&|x, p| p[0] * x + p[1], &x, &y, &[0.0, 0.0], &LmOptions::default())
            .unwrap();
        assert!((r.params[0] - 2.5).abs() < 1e-12);
        assert!((r.params[1] + 1.0).abs() < 1e-12);
        assert!(r.residual_norm < 1e-10);
    }

    #[test]
    fn exponential_noise_free() {
        let x: Vec<f64> = (0..40).map(f64::from).collect();
        let f = |x: f64, p: &[f64]| p[0] + p[1] * (-p[2] * x).exp();
        let y: Vec<f64> = x.iter().map(|&v| f(v, &[1.5, 3.0, 0.12])).collect();
        let r = nlls_minimize(&f, &x, &y, &[1.0, 2.0, 0.05], &LmOptions::default()).unwrap();
        for (a, b) in r.params.iter().zip([1.5, 3.0, 0.12]) {
            assert!((a - b).abs() < 1e-8 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn duplicate_x_is_solvable() {
        let x = [0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
        let y = [1.0, 1.2, 2.9, 3.1, 5.0, 5.2];
        let r = nlls_minimize(&|x, p| p[0] + p[1] * x, &x, &y, &[0.0, 0.0], &LmOptions::default())
            .unwrap();
        assert!((r.params[1] - 2.0).abs() < 1e-10);
        assert!((r.params[0] - 3.2 / 3.0).abs() < 1e-10);
        let c = r.covariance.unwrap();
        assert_eq!(c[0][1], c[1][0]);
        assert!(c[0][0] >= 0.0 && c[1][1] >= 0.0);
        assert!(c[0][0] * c[1][1] >= c[0][1] * c[0][1]);
    }

    #[test]
    fn too_few_points() {
        let r = nlls_minimize(&|x, p| p[0] * x + p[1], &[1.0], &[1.0], &[0.0, 0.0], &LmOptions::default());
        assert!(matches!(r, Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn budget_exhaustion_carries_best() {
        let x: Vec<f64> = (0..40).map(f64::from).collect();
        let f = |x: f64, p: &[f64]| p[0] + p[1] * (-p[2] * x).exp();
        let y: Vec<f64> = x.iter().map(|&v| f(v, &[1.5, 3.0, 0.12]) + 0.01 * (v * 1.7).sin()).collect();
        let opts = LmOptions {
            max_iterations: 1,
            ..LmOptions::default()
        };
        match nlls_minimize(&f, &x, &y, &[1.0, 2.0, 0.05], &opts) {
            Err(Error::FitNotConverged { best_params, .. }) => assert_eq!(best_params.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inversion() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let inv = invert(&a).unwrap();
        assert!((inv[0][0] - 3.0 / 11.0).abs() < 1e-15);
        assert!((inv[0][1] + 1.0 / 11.0).abs() < 1e-15);
        assert!(invert(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_none());
    }
}
