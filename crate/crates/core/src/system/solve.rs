//! Sparse direct solve with a residual contract.

use super::SparseSystem;
use crate::error::{Error, Result};
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use std::sync::Once;

static PARALLELISM: Once = Once::new();

/// Solves the (constrained) system by sparse LU with partial pivoting.
///
/// The returned vector satisfies
/// `|Ax - b|_inf <= 1e-10 * (|A|_inf |x|_inf + |b|_inf)`;
/// up to two rounds of iterative refinement are spent on meeting it. The
/// solve is single-threaded and deterministic for a fixed system.
pub fn solve_linear(system: &SparseSystem) -> Result<Vec<f64>> {
    let a = &system.matrix;
    let n = a.n_rows();
    if a.n_cols() != n || system.rhs.len() != n {
        return Err(Error::InvalidArgument(format!(
            "system is not square: {}x{} with rhs length {}",
            a.n_rows(),
            a.n_cols(),
            system.rhs.len()
        )));
    }
    PARALLELISM.call_once(|| faer::set_global_parallelism(faer::Par::Seq));

    let mut triplets = Vec::with_capacity(a.n_nonzeros());
    for (r, c, v) in a.iter() {
        if !v.is_finite() {
            return Err(Error::Solver(format!("matrix entry ({r}, {c}) is not finite")));
        }
        triplets.push(Triplet::new(r, c, v));
    }
    let sparse = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Solver(format!("building sparse matrix failed: {e:?}")))?;
    let lu = sparse
        .sp_lu()
        .map_err(|e| Error::Solver(format!("sparse LU factorization failed: {e:?}")))?;

    let b = faer::Mat::<f64>::from_fn(n, 1, |i, _| system.rhs[i]);
    let mut x: Vec<f64> = {
        let sol = lu.solve(&b);
        (0..n).map(|i| sol[(i, 0)]).collect()
    };
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Solver(format!(
            "factorization produced a non-finite solution entry at row {i} (singular pivot)"
        )));
    }

    let a_norm = a.inf_norm();
    let b_norm = system.rhs.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let mut residual = residual_inf(system, &x);
    for _ in 0..2 {
        let x_norm = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if residual <= 1e-10 * (a_norm * x_norm + b_norm) {
            break;
        }
        // one refinement pass reusing the factorization
        let ax = a.matvec(&x);
        let r = faer::Mat::<f64>::from_fn(n, 1, |i, _| system.rhs[i] - ax[i]);
        let dx = lu.solve(&r);
        for i in 0..n {
            x[i] += dx[(i, 0)];
        }
        residual = residual_inf(system, &x);
    }
    let x_norm = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let bound = 1e-10 * (a_norm * x_norm + b_norm);
    if residual > bound {
        return Err(Error::ResidualTooLarge { residual, bound });
    }
    Ok(x)
}

fn residual_inf(system: &SparseSystem, x: &[f64]) -> f64 {
    let ax = system.matrix.matvec(x);
    ax.iter()
        .zip(system.rhs.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
