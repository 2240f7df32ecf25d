//! Strong imposition of Dirichlet data by symmetric elimination.

use super::csr::CooMatrix;
use super::SparseSystem;
use crate::error::{Error, Result};
use crate::fem::FunctionSpace;
use std::collections::BTreeMap;

/// Boundary data for one marker; the function returns the constrained
/// components at a node location (scalar spaces read component 0).
pub type BcFn<'a> = &'a dyn Fn(f64, f64) -> [f64; 2];

/// Replaces constrained rows by identity rows and eliminates the matching
/// columns with a right-hand-side correction, preserving symmetry. Applying
/// the same data twice is a no-op.
pub fn apply_dirichlet(
    system: &mut SparseSystem,
    space: &FunctionSpace,
    bcs: &[(i32, BcFn)],
) -> Result<()> {
    let mut constrained: BTreeMap<usize, f64> = system.constrained.iter().copied().collect();
    for &(marker, g) in bcs {
        let nodes = space.boundary_nodes(marker)?;
        for &node in nodes {
            let [x, y] = space.node_coords(node);
            let v = g(x, y);
            for c in 0..space.components() {
                if !v[c].is_finite() {
                    return Err(Error::Evaluation(format!(
                        "boundary data is not finite at node {node} ({x}, {y})"
                    )));
                }
                constrained.insert(node * space.components() + c, v[c]);
            }
        }
    }

    let n = system.matrix.n_rows();
    let mut value = vec![None; n];
    for (&d, &g) in &constrained {
        value[d] = Some(g);
    }

    // rhs correction from eliminated columns, then rebuild the pattern
    for (r, c, v) in system.matrix.iter() {
        if value[r].is_none() {
            if let Some(g) = value[c] {
                system.rhs[r] -= v * g;
            }
        }
    }
    let mut coo = CooMatrix::new(n, n);
    for (r, c, v) in system.matrix.iter() {
        if value[r].is_none() && value[c].is_none() {
            coo.push(r, c, v);
        }
    }
    for (&d, &g) in &constrained {
        coo.push(d, d, 1.0);
        system.rhs[d] = g;
    }
    system.matrix = coo.into_csr();
    system.constrained = constrained.into_iter().collect();
    Ok(())
}
