//! Lagrange finite element spaces, quadrature and discrete fields.

pub mod basis;
mod field;
mod quadrature;
mod space;

pub use field::{DiscreteField, FieldSample};
pub use quadrature::{quadrature_rule, QuadratureRule, MAX_EXACTNESS};
pub use space::{FunctionSpace, TriangleGeometry};

use crate::error::Result;
use crate::mesh::Mesh;
use std::sync::Arc;

/// Builds a conforming Lagrange space of the given degree with 1 (scalar) or
/// 2 (vector) components per node.
pub fn build_space(mesh: Arc<Mesh>, degree: usize, components: usize) -> Result<FunctionSpace> {
    FunctionSpace::new(mesh, degree, components)
}

/// Default quadrature exactness for the bilinear forms of a given element
/// degree: integrates products of gradients with room for the quartic
/// divergence terms of low-degree elements.
pub fn default_form_exactness(degree: usize) -> usize {
    2 * degree + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::basis::{basis_values, n_local_nodes};
    use crate::mesh::generate_rectangle_mesh;

    #[test]
    fn partition_of_unity_on_physical_elements() {
        let mesh = Arc::new(generate_rectangle_mesh(3, 3, [0.0, 0.0, 1.0, 1.0]).unwrap());
        for degree in 1..=3 {
            let points = [[0.1, 0.6, 0.3], [0.5, 0.25, 0.25], [1.0 / 3.0; 3]];
            for p in points {
                let phi = basis_values(degree, p);
                let sum: f64 = phi[..n_local_nodes(degree)].iter().sum();
                assert!((sum - 1.0).abs() < 1e-14);
            }
        }
        drop(mesh);
    }

    #[test]
    fn interpolation_reproduces_polynomials_of_space_degree() {
        let mesh = Arc::new(generate_rectangle_mesh(4, 4, [0.0, 0.0, 1.0, 1.0]).unwrap());
        for degree in 1..=3usize {
            let space = Arc::new(build_space(mesh.clone(), degree, 1).unwrap());
            // polynomial of exactly the space degree
            let poly = |x: f64, y: f64| match degree {
                1 => 1.0 + 2.0 * x - y,
                2 => 1.0 + x * y + x * x,
                _ => x * x * x - 2.0 * x * y * y + 0.5,
            };
            let f = DiscreteField::interpolate_scalar(&space, poly).unwrap();
            let rule = quadrature_rule(2 * degree + 1).unwrap();
            for t in 0..mesh.n_triangles() {
                for (p, _) in rule.iter() {
                    let [x, y] = space.physical_point(t, p);
                    let s = f.evaluate(t, p);
                    assert!(
                        (s.values[0] - poly(x, y)).abs() < 1e-12,
                        "degree {degree}: {} vs {}",
                        s.values[0],
                        poly(x, y)
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_matches_directional_finite_differences() {
        // evaluate_field gradients against physical-space finite differences
        // with observed convergence order >= 1 under step halving
        let mesh = Arc::new(generate_rectangle_mesh(4, 4, [0.0, 0.0, 1.0, 1.0]).unwrap());
        for degree in 1..=3usize {
            let space = Arc::new(build_space(mesh.clone(), degree, 1).unwrap());
            let f = DiscreteField::interpolate_scalar(&space, |x, y| {
                (1.3 * x + 0.4 * y).sin() + x * y
            })
            .unwrap();
            // interior triangle, interior point; steps in barycentric space
            let t = 12;
            let l = [0.4, 0.3, 0.3];
            let g = f.evaluate(t, l).gradients[0];
            let mut errors = Vec::new();
            for k in 0..3 {
                let h = 0.05 / 2f64.powi(k);
                // fd along the xi direction in physical coordinates
                let lp = [l[0] - h, l[1] + h, l[2]];
                let lm = [l[0] + h, l[1] - h, l[2]];
                let (pp, pm) = (space.physical_point(t, lp), space.physical_point(t, lm));
                let dv = f.evaluate(t, lp).values[0] - f.evaluate(t, lm).values[0];
                let dx = [pp[0] - pm[0], pp[1] - pm[1]];
                let fd = dv / (dx[0] * dx[0] + dx[1] * dx[1]).sqrt();
                let dir = [dx[0], dx[1]];
                let norm = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
                let exact_dir = (g[0] * dir[0] + g[1] * dir[1]) / norm;
                errors.push((fd - exact_dir).abs());
            }
            // order >= 1: error should at least halve with the step
            for k in 1..errors.len() {
                assert!(
                    errors[k] <= 0.6 * errors[k - 1] + 1e-13,
                    "degree {degree}: fd errors {errors:?}"
                );
            }
        }
    }
}
