//! Element-by-element assembly of the weak forms.
//!
//! All routines walk triangles in mesh order and push triplets in a fixed
//! order, so repeated assembly of the same data is bit-identical.

use super::csr::CooMatrix;
use super::PenaltyState;
use crate::error::{Error, Result};
use crate::fem::basis::{basis_gradients, basis_values, MAX_LOCAL_NODES};
use crate::fem::{default_form_exactness, quadrature_rule, DiscreteField, FunctionSpace};
use crate::fem::MAX_EXACTNESS;

/// Per-quadrature-point basis data on one element.
struct ElementBasis {
    phi: Vec<[f64; MAX_LOCAL_NODES]>,
    grad: Vec<[[f64; 2]; MAX_LOCAL_NODES]>,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

fn element_basis(space: &FunctionSpace, exactness: usize) -> Result<ElementBasis> {
    let rule = quadrature_rule(exactness)?;
    let mut phi = Vec::with_capacity(rule.len());
    let mut grad = Vec::with_capacity(rule.len());
    for (p, _) in rule.iter() {
        phi.push(basis_values(space.degree(), p));
        grad.push(basis_gradients(space.degree(), p));
    }
    Ok(ElementBasis {
        phi,
        grad,
        points: rule.points().to_vec(),
        weights: rule.weights().to_vec(),
    })
}

/// nu * (grad u, grad v); block-diagonal over components.
pub fn assemble_diffusion(space: &FunctionSpace, nu: f64) -> Result<CooMatrix> {
    if nu <= 0.0 {
        return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
    }
    let basis = element_basis(space, default_form_exactness(space.degree()))?;
    let n_local = space.n_local_nodes();
    let comps = space.components();
    let mesh = space.mesh();
    let mut coo = CooMatrix::new(space.n_dofs(), space.n_dofs());
    let mut pg = vec![[0.0f64; 2]; n_local];
    for t in 0..mesh.n_triangles() {
        let geo = space.geometry(t);
        let area = mesh.area(t);
        let dofs = space.dofs(t);
        let mut local = vec![0.0; n_local * n_local];
        for q in 0..basis.weights.len() {
            for (i, slot) in pg.iter_mut().enumerate().take(n_local) {
                *slot = geo.physical_gradient(basis.grad[q][i]);
            }
            let w = basis.weights[q] * area * nu;
            for i in 0..n_local {
                for j in 0..n_local {
                    local[i * n_local + j] += w * (pg[i][0] * pg[j][0] + pg[i][1] * pg[j][1]);
                }
            }
        }
        for i in 0..n_local {
            for j in 0..n_local {
                for c in 0..comps {
                    coo.push(dofs[i * comps + c], dofs[j * comps + c], local[i * n_local + j]);
                }
            }
        }
    }
    Ok(coo)
}

/// sum over elements of (1/eps) * (div u, div v) restricted to each element.
pub fn assemble_divdiv_weighted(space: &FunctionSpace, state: &PenaltyState) -> Result<CooMatrix> {
    if let Some(t) = state.eps.iter().position(|&e| e <= 0.0) {
        return Err(Error::InvalidState(format!(
            "penalty parameter of element {t} is {:.3e}, must be positive",
            state.eps[t]
        )));
    }
    let weights: Vec<f64> = state.eps.iter().map(|&e| 1.0 / e).collect();
    assemble_divdiv_elementwise(space, &weights)
}

/// Div-div form with a constant weight per element.
pub fn assemble_divdiv_elementwise(space: &FunctionSpace, weights: &[f64]) -> Result<CooMatrix> {
    assert_eq!(space.components(), 2, "div-div form needs a vector space");
    let basis = element_basis(space, default_form_exactness(space.degree()))?;
    divdiv_with(space, &basis, |t, _q| weights[t])
}

/// Pointwise-weighted div-div form: the weight at a quadrature point is
/// |div u_prev|^2 / loc_tol of the element. The integrand is quartic in the
/// gradients, hence the 4*degree quadrature.
pub fn assemble_divdiv_pointwise(
    space: &FunctionSpace,
    prev: &DiscreteField,
    loc_tol: &[f64],
) -> Result<CooMatrix> {
    assert_eq!(space.components(), 2, "div-div form needs a vector space");
    let basis = element_basis(space, (4 * space.degree()).min(MAX_EXACTNESS))?;
    let divs: Vec<Vec<f64>> = (0..space.mesh().n_triangles())
        .map(|t| basis.points.iter().map(|&p| prev.evaluate(t, p).divergence()).collect())
        .collect();
    divdiv_with(space, &basis, |t, q| divs[t][q] * divs[t][q] / loc_tol[t])
}

fn divdiv_with(
    space: &FunctionSpace,
    basis: &ElementBasis,
    weight: impl Fn(usize, usize) -> f64,
) -> Result<CooMatrix> {
    let n_local = space.n_local_nodes();
    let mesh = space.mesh();
    let mut coo = CooMatrix::new(space.n_dofs(), space.n_dofs());
    let mut pg = vec![[0.0f64; 2]; n_local];
    let n_ldofs = n_local * 2;
    for t in 0..mesh.n_triangles() {
        let geo = space.geometry(t);
        let area = mesh.area(t);
        let dofs = space.dofs(t);
        let mut local = vec![0.0; n_ldofs * n_ldofs];
        for q in 0..basis.weights.len() {
            for (i, slot) in pg.iter_mut().enumerate().take(n_local) {
                *slot = geo.physical_gradient(basis.grad[q][i]);
            }
            let w = basis.weights[q] * area * weight(t, q);
            // div of basis dof (node i, component c) is pg[i][c]
            for i in 0..n_local {
                for ci in 0..2 {
                    let di = pg[i][ci];
                    for j in 0..n_local {
                        for cj in 0..2 {
                            local[(i * 2 + ci) * n_ldofs + (j * 2 + cj)] += w * di * pg[j][cj];
                        }
                    }
                }
            }
        }
        for li in 0..n_ldofs {
            for lj in 0..n_ldofs {
                coo.push(dofs[li], dofs[lj], local[li * n_ldofs + lj]);
            }
        }
    }
    Ok(coo)
}

/// Rectangular block B with (B p) . v = (p, div v).
pub fn assemble_mixed_divergence(
    vel_space: &FunctionSpace,
    pres_space: &FunctionSpace,
) -> Result<CooMatrix> {
    assert_eq!(vel_space.components(), 2);
    assert_eq!(pres_space.components(), 1);
    if !std::sync::Arc::ptr_eq(vel_space.mesh(), pres_space.mesh()) {
        return Err(Error::InvalidArgument(
            "velocity and pressure spaces live on different meshes".into(),
        ));
    }
    let exactness = default_form_exactness(vel_space.degree().max(pres_space.degree()));
    let vel_basis = element_basis(vel_space, exactness)?;
    let pres_basis = element_basis(pres_space, exactness)?;
    let mesh = vel_space.mesh();
    let nv = vel_space.n_local_nodes();
    let np = pres_space.n_local_nodes();
    let mut coo = CooMatrix::new(vel_space.n_dofs(), pres_space.n_dofs());
    let mut pg = vec![[0.0f64; 2]; nv];
    for t in 0..mesh.n_triangles() {
        let geo = vel_space.geometry(t);
        let area = mesh.area(t);
        let vdofs = vel_space.dofs(t);
        let pdofs = pres_space.dofs(t);
        let mut local = vec![0.0; nv * 2 * np];
        for q in 0..vel_basis.weights.len() {
            for (i, slot) in pg.iter_mut().enumerate().take(nv) {
                *slot = geo.physical_gradient(vel_basis.grad[q][i]);
            }
            let w = vel_basis.weights[q] * area;
            for i in 0..nv {
                for c in 0..2 {
                    let div_i = pg[i][c];
                    for j in 0..np {
                        local[(i * 2 + c) * np + j] += w * div_i * pres_basis.phi[q][j];
                    }
                }
            }
        }
        for li in 0..nv * 2 {
            for j in 0..np {
                coo.push(vdofs[li], pdofs[j], local[li * np + j]);
            }
        }
    }
    Ok(coo)
}

/// Temam-modified convection: (w . grad u, v) + 1/2 ((div w) u, v).
///
/// The skew-symmetrizing term makes the form vanish at u = v for any
/// advecting field when u has zero boundary trace.
pub fn assemble_convection_temam(
    vel_space: &FunctionSpace,
    advecting: &DiscreteField,
) -> Result<CooMatrix> {
    assert_eq!(vel_space.components(), 2);
    if advecting.space().n_dofs() != vel_space.n_dofs()
        || advecting.space().degree() != vel_space.degree()
        || !std::sync::Arc::ptr_eq(advecting.space().mesh(), vel_space.mesh())
    {
        return Err(Error::InvalidArgument(
            "advecting field must live on the velocity space".into(),
        ));
    }
    let d = vel_space.degree();
    // exact integration of the trilinear product needs 3d-1; 2d+1 covers the
    // low degrees
    let exactness = default_form_exactness(d).max(3 * d - 1).min(MAX_EXACTNESS);
    let basis = element_basis(vel_space, exactness)?;
    let mesh = vel_space.mesh();
    let n_local = vel_space.n_local_nodes();
    let mut coo = CooMatrix::new(vel_space.n_dofs(), vel_space.n_dofs());
    let mut pg = vec![[0.0f64; 2]; n_local];
    for t in 0..mesh.n_triangles() {
        let geo = vel_space.geometry(t);
        let area = mesh.area(t);
        let dofs = vel_space.dofs(t);
        let mut local = vec![0.0; n_local * n_local];
        for q in 0..basis.weights.len() {
            for (i, slot) in pg.iter_mut().enumerate().take(n_local) {
                *slot = geo.physical_gradient(basis.grad[q][i]);
            }
            let sample = advecting.evaluate(t, basis.points[q]);
            let wvec = sample.values;
            let divw = sample.divergence();
            let w = basis.weights[q] * area;
            // scalar kernel: phi_i * (w . grad phi_j + 1/2 div w phi_j)
            for i in 0..n_local {
                let vi = basis.phi[q][i];
                for j in 0..n_local {
                    let adv = wvec[0] * pg[j][0] + wvec[1] * pg[j][1];
                    local[i * n_local + j] += w * vi * (adv + 0.5 * divw * basis.phi[q][j]);
                }
            }
        }
        for i in 0..n_local {
            for j in 0..n_local {
                let v = local[i * n_local + j];
                for c in 0..2 {
                    coo.push(dofs[i * 2 + c], dofs[j * 2 + c], v);
                }
            }
        }
    }
    Ok(coo)
}

/// (u, v) mass matrix.
pub fn assemble_mass(space: &FunctionSpace) -> Result<CooMatrix> {
    let basis = element_basis(space, default_form_exactness(space.degree()))?;
    let n_local = space.n_local_nodes();
    let comps = space.components();
    let mesh = space.mesh();
    let mut coo = CooMatrix::new(space.n_dofs(), space.n_dofs());
    for t in 0..mesh.n_triangles() {
        let area = mesh.area(t);
        let dofs = space.dofs(t);
        let mut local = vec![0.0; n_local * n_local];
        for q in 0..basis.weights.len() {
            let w = basis.weights[q] * area;
            for i in 0..n_local {
                for j in 0..n_local {
                    local[i * n_local + j] += w * basis.phi[q][i] * basis.phi[q][j];
                }
            }
        }
        for i in 0..n_local {
            for j in 0..n_local {
                for c in 0..comps {
                    coo.push(dofs[i * comps + c], dofs[j * comps + c], local[i * n_local + j]);
                }
            }
        }
    }
    Ok(coo)
}

/// Load vector (f, v) for a vector space.
pub fn assemble_load(
    space: &FunctionSpace,
    f: impl Fn(f64, f64) -> [f64; 2],
) -> Result<Vec<f64>> {
    assert_eq!(space.components(), 2);
    let basis = element_basis(space, default_form_exactness(space.degree()))?;
    let mesh = space.mesh();
    let n_local = space.n_local_nodes();
    let mut rhs = vec![0.0; space.n_dofs()];
    for t in 0..mesh.n_triangles() {
        let area = mesh.area(t);
        let dofs = space.dofs(t);
        for q in 0..basis.weights.len() {
            let [x, y] = space.physical_point(t, basis.points[q]);
            let fv = f(x, y);
            if !fv[0].is_finite() || !fv[1].is_finite() {
                return Err(Error::Evaluation(format!(
                    "forcing is not finite at ({x}, {y})"
                )));
            }
            let w = basis.weights[q] * area;
            for i in 0..n_local {
                for c in 0..2 {
                    rhs[dofs[i * 2 + c]] += w * basis.phi[q][i] * fv[c];
                }
            }
        }
    }
    Ok(rhs)
}

/// Load vector (f, v) for a scalar space.
pub fn assemble_load_scalar(
    space: &FunctionSpace,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Vec<f64>> {
    assert_eq!(space.components(), 1);
    let basis = element_basis(space, default_form_exactness(space.degree()))?;
    let mesh = space.mesh();
    let n_local = space.n_local_nodes();
    let mut rhs = vec![0.0; space.n_dofs()];
    for t in 0..mesh.n_triangles() {
        let area = mesh.area(t);
        let dofs = space.dofs(t);
        for q in 0..basis.weights.len() {
            let [x, y] = space.physical_point(t, basis.points[q]);
            let fv = f(x, y);
            if !fv.is_finite() {
                return Err(Error::Evaluation(format!("forcing is not finite at ({x}, {y})")));
            }
            let w = basis.weights[q] * area;
            for i in 0..n_local {
                rhs[dofs[i]] += w * basis.phi[q][i] * fv;
            }
        }
    }
    Ok(rhs)
}

/// Integrals of the scalar basis functions: row enforcing a zero-mean
/// pressure through a Lagrange multiplier.
pub fn pressure_integral_row(space: &FunctionSpace) -> Result<Vec<f64>> {
    assemble_load_scalar(space, |_, _| 1.0)
}
