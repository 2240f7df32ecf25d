//! Coefficient vectors over a function space.

use super::basis::{basis_gradients, basis_values};
use super::space::FunctionSpace;
use crate::error::{Error, Result};
use std::sync::Arc;

/// A discrete function: one coefficient per degree of freedom.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    space: Arc<FunctionSpace>,
    coefficients: Vec<f64>,
}

/// Value and physical gradient of a field at one point.
///
/// Component-major: `values[c]` and `gradients[c]` belong to component `c`;
/// scalar fields use index 0 only.
#[derive(Debug, Clone, Copy)]
pub struct FieldSample {
    pub values: [f64; 2],
    pub gradients: [[f64; 2]; 2],
}

impl FieldSample {
    /// Divergence of a two-component field.
    pub fn divergence(&self) -> f64 {
        self.gradients[0][0] + self.gradients[1][1]
    }
}

impl DiscreteField {
    pub fn zeros(space: Arc<FunctionSpace>) -> Self {
        let n = space.n_dofs();
        DiscreteField { space, coefficients: vec![0.0; n] }
    }

    pub fn from_coefficients(space: Arc<FunctionSpace>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != space.n_dofs() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a space with {} dofs",
                coefficients.len(),
                space.n_dofs()
            )));
        }
        if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::Evaluation(format!("non-finite coefficient at dof {i}")));
        }
        Ok(DiscreteField { space, coefficients })
    }

    /// Nodal interpolant of a vector-valued function.
    pub fn interpolate_vector(
        space: &Arc<FunctionSpace>,
        f: impl Fn(f64, f64) -> [f64; 2],
    ) -> Result<Self> {
        assert_eq!(space.components(), 2, "interpolate_vector needs a vector space");
        let mut coefficients = vec![0.0; space.n_dofs()];
        for node in 0..space.n_nodes() {
            let [x, y] = space.node_coords(node);
            let v = f(x, y);
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(Error::Evaluation(format!(
                    "non-finite value at node {node} ({x}, {y})"
                )));
            }
            coefficients[2 * node] = v[0];
            coefficients[2 * node + 1] = v[1];
        }
        Ok(DiscreteField { space: space.clone(), coefficients })
    }

    /// Nodal interpolant of a scalar function.
    pub fn interpolate_scalar(
        space: &Arc<FunctionSpace>,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        assert_eq!(space.components(), 1, "interpolate_scalar needs a scalar space");
        let mut coefficients = vec![0.0; space.n_dofs()];
        for node in 0..space.n_nodes() {
            let [x, y] = space.node_coords(node);
            let v = f(x, y);
            if !v.is_finite() {
                return Err(Error::Evaluation(format!(
                    "non-finite value at node {node} ({x}, {y})"
                )));
            }
            coefficients[node] = v;
        }
        Ok(DiscreteField { space: space.clone(), coefficients })
    }

    pub fn space(&self) -> &Arc<FunctionSpace> {
        &self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    /// Value and physical gradient at a barycentric point of triangle `t`.
    pub fn evaluate(&self, t: usize, bary: [f64; 3]) -> FieldSample {
        let space = &self.space;
        let degree = space.degree();
        let comps = space.components();
        let phi = basis_values(degree, bary);
        let dphi = basis_gradients(degree, bary);
        let geo = space.geometry(t);
        let dofs = space.dofs(t);
        let mut values = [0.0; 2];
        let mut gradients = [[0.0; 2]; 2];
        for local in 0..space.n_local_nodes() {
            let g = geo.physical_gradient(dphi[local]);
            for c in 0..comps {
                let coeff = self.coefficients[dofs[local * comps + c]];
                values[c] += coeff * phi[local];
                gradients[c][0] += coeff * g[0];
                gradients[c][1] += coeff * g[1];
            }
        }
        FieldSample { values, gradients }
    }

    /// Value of component `c` at mesh vertex `v` (vertex nodes carry the
    /// function value for Lagrange elements).
    pub fn vertex_value(&self, v: usize, c: usize) -> f64 {
        self.coefficients[v * self.space.components() + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_rectangle_mesh;

    fn vector_space(n: usize, degree: usize) -> Arc<FunctionSpace> {
        let mesh = Arc::new(generate_rectangle_mesh(n, n, [0.0, 0.0, 1.0, 1.0]).unwrap());
        Arc::new(FunctionSpace::new(mesh, degree, 2).unwrap())
    }

    #[test]
    fn linear_field_has_constant_gradient() {
        let space = vector_space(4, 1);
        let f = DiscreteField::interpolate_vector(&space, |x, y| [x + 2.0 * y, 0.0]).unwrap();
        for t in 0..space.mesh().n_triangles() {
            let s = f.evaluate(t, [0.3, 0.3, 0.4]);
            assert!((s.gradients[0][0] - 1.0).abs() < 1e-13);
            assert!((s.gradients[0][1] - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_field_evaluates_exactly() {
        let space = vector_space(3, 2);
        let f = DiscreteField::interpolate_vector(&space, |_, _| [3.25, -1.5]).unwrap();
        let s = f.evaluate(5, [0.2, 0.5, 0.3]);
        assert!((s.values[0] - 3.25).abs() < 1e-14);
        assert!((s.values[1] + 1.5).abs() < 1e-14);
        assert!(s.gradients[0][0].abs() < 1e-13 && s.gradients[1][1].abs() < 1e-13);
    }

    #[test]
    fn p1_reproduces_linears_pointwise() {
        let space = vector_space(10, 1);
        let f = DiscreteField::interpolate_vector(&space, |x, _| [x, 0.0]).unwrap();
        let s = f.evaluate(7, [0.25, 0.25, 0.5]);
        let p = space.physical_point(7, [0.25, 0.25, 0.5]);
        assert!((s.values[0] - p[0]).abs() < 1e-14);
    }

    #[test]
    fn test1_interpolant_vertex_value() {
        // u = (20 x y^3, 5 x^4 - 5 y^4) at (0.5, 0.5) is (1.25, 0)
        let space = vector_space(10, 1);
        let f = DiscreteField::interpolate_vector(&space, |x, y| {
            [20.0 * x * y.powi(3), 5.0 * x.powi(4) - 5.0 * y.powi(4)]
        })
        .unwrap();
        let v = space
            .mesh()
            .vertices()
            .iter()
            .position(|&p| (p[0] - 0.5).abs() < 1e-14 && (p[1] - 0.5).abs() < 1e-14)
            .unwrap();
        assert!((f.vertex_value(v, 0) - 1.25).abs() < 1e-14);
        assert!(f.vertex_value(v, 1).abs() < 1e-14);
    }

    #[test]
    fn zero_function_gives_zero_coefficients() {
        let space = vector_space(3, 3);
        let f = DiscreteField::interpolate_vector(&space, |_, _| [0.0, 0.0]).unwrap();
        assert!(f.coefficients().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn non_finite_interpolation_names_the_node() {
        let space = vector_space(2, 1);
        let err = DiscreteField::interpolate_vector(&space, |x, y| {
            [if x == 0.5 && y == 0.5 { f64::NAN } else { 0.0 }, 0.0]
        })
        .unwrap_err();
        assert!(err.to_string().contains("node"), "{err}");
    }

    #[test]
    fn divergence_of_interpolated_rotation_vanishes() {
        // rigid rotation (-y, x) is linear, so P1 interpolation is exact and
        // its divergence is identically zero
        let space = vector_space(6, 1);
        let f = DiscreteField::interpolate_vector(&space, |x, y| [-y, x]).unwrap();
        for t in 0..space.mesh().n_triangles() {
            let s = f.evaluate(t, [1.0 / 3.0; 3]);
            assert!(s.divergence().abs() < 1e-14);
        }
    }
}
