//! Quadrature on the reference triangle.
//!
//! Weights are normalized to sum to one, so a physical integral is
//! `|triangle| * sum(w_q * f(p_q))`. Low exactness uses compact symmetric
//! rules; higher exactness is generated as a conical product of
//! Gauss-Legendre and Gauss-Jacobi(1,0) rules, which keeps all weights
//! positive at any degree.

use crate::error::{Error, Result};

/// Highest polynomial exactness [`quadrature_rule`] supports.
pub const MAX_EXACTNESS: usize = 12;

/// Points in barycentric coordinates with weights summing to one.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Returns a rule exact for all bivariate polynomials of total degree
/// `exactness` on the reference triangle.
pub fn quadrature_rule(exactness: usize) -> Result<QuadratureRule> {
    if exactness == 0 || exactness > MAX_EXACTNESS {
        return Err(Error::InvalidArgument(format!(
            "quadrature exactness must be in 1..={MAX_EXACTNESS}, got {exactness}"
        )));
    }
    Ok(match exactness {
        1 => QuadratureRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![1.0],
        },
        2 => {
            let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
            QuadratureRule {
                points: vec![[a, b, b], [b, a, b], [b, b, a]],
                weights: vec![1.0 / 3.0; 3],
            }
        }
        3 | 4 => {
            // Two symmetric orbits, exact to degree 4.
            let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new() };
            push_orbit3(&mut rule, 0.445948490915965, 0.223381589678011);
            push_orbit3(&mut rule, 0.091576213509771, 0.109951743655322);
            rule
        }
        5 => {
            let mut rule = QuadratureRule {
                points: vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
                weights: vec![0.225],
            };
            push_orbit3(&mut rule, 0.470142064105115, 0.132394152788506);
            push_orbit3(&mut rule, 0.101286507323456, 0.125939180544827);
            rule
        }
        p => conical_product(p),
    })
}

fn push_orbit3(rule: &mut QuadratureRule, a: f64, w: f64) {
    let b = 1.0 - 2.0 * a;
    rule.points.push([b, a, a]);
    rule.points.push([a, b, a]);
    rule.points.push([a, a, b]);
    rule.weights.extend_from_slice(&[w, w, w]);
}

/// Conical product rule: Gauss-Jacobi(1,0) in x and Gauss-Legendre in the
/// collapsed direction, both on [0,1].
fn conical_product(degree: usize) -> QuadratureRule {
    let n = degree / 2 + 1;
    let (xg, wg) = gauss_legendre_unit(n);
    let (xj, wj) = gauss_jacobi10_unit(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = xj[j];
            let y = xg[i] * (1.0 - xj[j]);
            points.push([1.0 - x - y, x, y]);
            // weight already contains the (1-x) Jacobian factor; the factor
            // 2 renormalizes from the reference area 1/2 to 1.
            weights.push(2.0 * wg[i] * wj[j]);
        }
    }
    QuadratureRule { points, weights }
}

/// Gauss-Legendre nodes/weights on [0,1].
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Newton iteration from the Chebyshev initial guess on [-1,1].
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        x[n - 1 - i] = 0.5 * (t + 1.0);
        w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Value and derivative of the Legendre polynomial P_n at t.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// Gauss-Jacobi nodes/weights for weight (1-x) on [0,1]; node placement via
/// Newton on the Jacobi(1,0) recurrence, weights from the moment equations.
fn gauss_jacobi10_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        // initial guesses: Chebyshev-like spread, slightly biased left where
        // the weight (1-x) pushes nodes.
        let mut t = -((std::f64::consts::PI * (i as f64 + 0.5) / (n as f64 + 0.5)).cos());
        for _ in 0..200 {
            let (p, dp) = jacobi10(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        nodes.push(0.5 * (t + 1.0));
    }
    nodes.sort_by(f64::total_cmp);
    // moments of (1-x) on [0,1]: m_k = 1/(k+1) - 1/(k+2)
    let moments: Vec<f64> =
        (0..n).map(|k| 1.0 / (k as f64 + 1.0) - 1.0 / (k as f64 + 2.0)).collect();
    let weights = solve_vandermonde(&nodes, &moments);
    (nodes, weights)
}

/// Value and derivative of the Jacobi polynomial P_n^(1,0) at t in [-1,1].
fn jacobi10(n: usize, t: f64) -> (f64, f64) {
    // recurrence: (k+1)(2k-1) P_k = ((2k+1)(2k-1) t + 1) P_{k-1} - (k-1)(2k+1) P_{k-2}
    let eval = |t: f64| -> f64 {
        let (mut p0, mut p1) = (1.0, (3.0 * t + 1.0) / 2.0);
        if n == 0 {
            return 1.0;
        }
        for k in 2..=n {
            let kf = k as f64;
            let a = (2.0 * kf + 1.0) * (2.0 * kf - 1.0);
            let b = 1.0;
            let c = (kf - 1.0) * (2.0 * kf + 1.0);
            let d = (kf + 1.0) * (2.0 * kf - 1.0);
            let p2 = ((a * t + b) * p1 - c * p0) / d;
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    let p = eval(t);
    let h = 1e-7;
    let dp = (eval(t + h) - eval(t - h)) / (2.0 * h);
    (p, dp)
}

/// Solves sum_i w_i x_i^k = m_k by Gaussian elimination with partial
/// pivoting; the systems here are at most 7x7.
fn solve_vandermonde(nodes: &[f64], moments: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for k in 0..n {
        for (i, &x) in nodes.iter().enumerate() {
            a[k][i] = x.powi(k as i32);
        }
        a[k][n] = moments[k];
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let factor = a[row][col] / a[col][col];
                for j in col..=n {
                    let v = a[col][j];
                    a[row][j] -= factor * v;
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}
