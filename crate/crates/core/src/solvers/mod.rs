//! Solver drivers: coupled Stokes reference, adaptive elementwise penalty,
//! pointwise penalty fixed point, and the semi-implicit Navier-Stokes
//! stepper with optional step retry.

mod nse;
mod stokes;

pub use nse::{run_nse_ep, step_nse_ep, InitialVelocity, NseRun, NseStepRecord, TimeVectorFn};
pub use stokes::{
    solve_constant_penalty_stokes, solve_coupled_stokes, solve_ep_stokes, solve_pp_stokes,
};

use crate::error::{Error, Result};
use crate::fem::{quadrature_rule, DiscreteField};
use crate::mesh::Mesh;
use crate::system::PenaltyState;
use std::time::Duration;

/// Parameters of the adaptive penalty loop.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveConfig {
    /// Global divergence tolerance TOL.
    pub tol: f64,
    /// Floor for the penalty parameter.
    pub lower_eps: f64,
    /// Cap for the penalty parameter (also the initial value by default).
    pub upper_eps: f64,
    /// Maximum adaptive iterations per solve (or per time step in retry mode).
    pub max_iter: usize,
    pub initial_eps: f64,
}

impl AdaptiveConfig {
    pub fn new(tol: f64, lower_eps: f64) -> Result<Self> {
        let config =
            AdaptiveConfig { tol, lower_eps, upper_eps: 1.0, max_iter: 10, initial_eps: 1.0 };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.lower_eps > 0.0 && self.lower_eps <= self.upper_eps) {
            return Err(Error::InvalidArgument(format!(
                "penalty bounds [{:e}, {:e}] must be positive and ordered",
                self.lower_eps, self.upper_eps
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Time discretization parameters.
#[derive(Debug, Clone, Copy)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Re-solve each step with updated penalty parameters until the local
    /// tolerances hold (or `max_iter` inner iterations).
    pub retry: bool,
}

impl TimeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt) {
            return Err(Error::InvalidArgument(format!(
                "final time {} is shorter than one step {}",
                self.t_final, self.dt
            )));
        }
        Ok(())
    }
}

/// Summary of the penalty state at the end of a solve.
#[derive(Debug, Clone, Copy)]
pub struct EpsSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Fraction of elements meeting their local tolerance.
    pub satisfaction: f64,
    pub locally_satisfied: bool,
    /// Whether the global target |div u|^2 <= TOL^2 / 2 was reached.
    pub global_target_met: bool,
}

/// Outcome of one solver driver run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Solve-estimate cycles used (Picard iterations for the pointwise
    /// penalty method).
    pub iterations: usize,
    /// Final global |div u|^2.
    pub div_l2_sq: f64,
    /// Global |div u|^2 after each iteration.
    pub div_history: Vec<f64>,
    /// Per-iteration coefficient increments (pointwise penalty only).
    pub increments: Vec<f64>,
    /// Penalty summary; absent for the coupled reference solve.
    pub eps: Option<EpsSummary>,
    pub wall_time: Duration,
}

/// Local tolerance share of each element: `tol^2 |elem| / (2 |domain|)`.
pub fn compute_loc_tol(mesh: &Mesh, tol: f64) -> Vec<f64> {
    assert!(tol > 0.0, "tolerance must be positive");
    let factor = 0.5 * tol * tol / mesh.domain_area();
    mesh.areas().iter().map(|&a| factor * a).collect()
}

/// Per-element divergence residual: the integral of |div u|^2 over each
/// element, integrated exactly for the polynomial degree of the field.
pub fn element_div_estimator(u: &DiscreteField) -> Result<Vec<f64>> {
    let space = u.space();
    if space.components() != 2 {
        return Err(Error::InvalidArgument(
            "divergence estimator needs a two-component field".into(),
        ));
    }
    let rule = quadrature_rule((2 * space.degree()).max(1))?;
    let mesh = space.mesh();
    let mut est = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let mut acc = 0.0;
        for (p, w) in rule.iter() {
            let d = u.evaluate(t, p).divergence();
            acc += w * d * d;
        }
        est.push(acc * mesh.area(t));
    }
    Ok(est)
}

/// How [`update_epsilon`] treats elements that already meet the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonUpdateMode {
    /// Update only where the estimator exceeds the local tolerance, so the
    /// parameter never increases.
    Stokes,
    /// Update every element; the ratio may grow the parameter up to the cap.
    Transient,
}

/// Multiplicative penalty update `eps <- max(lower, (loctol/est) * eps)`.
/// Elements with a zero estimator keep their parameter in both modes.
/// Returns true if any parameter changed.
pub fn update_epsilon(state: &mut PenaltyState, mode: EpsilonUpdateMode) -> bool {
    let mut changed = false;
    for t in 0..state.n_elements() {
        let est = state.est[t];
        if est == 0.0 {
            continue;
        }
        if mode == EpsilonUpdateMode::Stokes && est <= state.loc_tol[t] {
            continue;
        }
        let r = state.loc_tol[t] / est;
        let eps = (r * state.eps[t]).clamp(state.lower_eps, state.upper_eps);
        if eps != state.eps[t] {
            state.eps[t] = eps;
            changed = true;
        }
    }
    changed
}

/// Elementwise pressure recovered from the penalty identity
/// `p = -(1/eps) div u`, projected onto piecewise constants and shifted to
/// zero mean.
pub fn recover_pressure(u: &DiscreteField, state: &PenaltyState) -> Result<Vec<f64>> {
    let space = u.space();
    if space.components() != 2 {
        return Err(Error::InvalidArgument("pressure recovery needs a vector field".into()));
    }
    let mesh = space.mesh();
    let rule = quadrature_rule(space.degree())?;
    let mut p = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let mut mean_div = 0.0;
        for (pt, w) in rule.iter() {
            mean_div += w * u.evaluate(t, pt).divergence();
        }
        p.push(-mean_div / state.eps[t]);
    }
    let mean: f64 =
        p.iter().zip(mesh.areas()).map(|(&v, &a)| v * a).sum::<f64>() / mesh.domain_area();
    for v in &mut p {
        *v -= mean;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_space;
    use crate::mesh::generate_rectangle_mesh;
    use std::sync::Arc;

    #[test]
    fn loc_tol_formula_and_sum() {
        let mesh = generate_rectangle_mesh(40, 40, [0.0, 0.0, 1.0, 1.0]).unwrap();
        let loc = compute_loc_tol(&mesh, 1e-5);
        // uniform elements: each is tol^2 / (2 N)
        for &l in &loc {
            assert!((l - 1.5625e-14).abs() < 1e-26, "{l}");
        }
        let sum: f64 = loc.iter().sum();
        let target = 0.5e-10;
        assert!((sum - target).abs() <= 1e-12 * target);
        // doubling TOL quadruples every entry
        let loc2 = compute_loc_tol(&mesh, 2e-5);
        for (a, b) in loc.iter().zip(&loc2) {
            assert!((b / a - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn estimator_matches_analytic_divergence() {
        let mesh = Arc::new(generate_rectangle_mesh(6, 6, [0.0, 0.0, 1.0, 1.0]).unwrap());
        let space = Arc::new(build_space(mesh.clone(), 1, 2).unwrap());
        // u = (x, 0): div = 1, total = 1
        let u = DiscreteField::interpolate_vector(&space, |x, _| [x, 0.0]).unwrap();
        let est = element_div_estimator(&u).unwrap();
        let total: f64 = est.iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
        // u = (x, y): div = 2, total = 4
        let u = DiscreteField::interpolate_vector(&space, |x, y| [x, y]).unwrap();
        let total: f64 = element_div_estimator(&u).unwrap().iter().sum();
        assert!((total - 4.0).abs() < 1e-12, "{total}");
        // rigid rotation: estimator vanishes elementwise
        let u = DiscreteField::interpolate_vector(&space, |x, y| [-y, x]).unwrap();
        for e in element_div_estimator(&u).unwrap() {
            assert!(e <= 1e-24, "{e}");
        }
    }

    #[test]
    fn estimator_rejects_scalar_fields() {
        let mesh = Arc::new(generate_rectangle_mesh(2, 2, [0.0, 0.0, 1.0, 1.0]).unwrap());
        let space = Arc::new(build_space(mesh, 1, 1).unwrap());
        let u = DiscreteField::zeros(space);
        assert!(element_div_estimator(&u).is_err());
    }

    #[test]
    fn epsilon_update_ratio_floor_and_guard() {
        let mut state = PenaltyState::new(vec![1e-14; 3], 1.0, 1e-10, 1.0);
        state.est = vec![1e-10, 1e-2, 0.5e-14];
        // element 0: r = 1e-4, new eps 1e-4
        // element 1: r = 1e-12, floored at 1e-10
        // element 2: satisfied, untouched in stokes mode
        let changed = update_epsilon(&mut state, EpsilonUpdateMode::Stokes);
        assert!(changed);
        assert!((state.eps[0] - 1e-4).abs() < 1e-19);
        assert_eq!(state.eps[1], 1e-10);
        assert_eq!(state.eps[2], 1.0);
        // transient mode also updates satisfied elements, capped above
        let mut state = PenaltyState::new(vec![1e-14; 2], 1e-6, 1e-10, 1.0);
        state.est = vec![0.5e-14, 0.0];
        update_epsilon(&mut state, EpsilonUpdateMode::Transient);
        assert!((state.eps[0] - 2e-6).abs() < 1e-18, "{}", state.eps[0]);
        assert_eq!(state.eps[1], 1e-6, "zero estimator leaves eps unchanged");
    }

    #[test]
    fn stokes_mode_never_increases_epsilon() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut state = PenaltyState::new(vec![1e-12; 50], 1.0, 1e-9, 1.0);
        for _ in 0..20 {
            let before = state.eps.clone();
            for e in state.est.iter_mut() {
                *e = 10f64.powf(rng.gen_range(-16.0..-2.0));
            }
            update_epsilon(&mut state, EpsilonUpdateMode::Stokes);
            for (a, b) in before.iter().zip(&state.eps) {
                assert!(b <= a, "epsilon increased from {a} to {b}");
            }
        }
    }

    #[test]
    fn recovered_pressure_of_divergence_free_field_is_zero() {
        let mesh = Arc::new(generate_rectangle_mesh(4, 4, [0.0, 0.0, 1.0, 1.0]).unwrap());
        let space = Arc::new(build_space(mesh.clone(), 1, 2).unwrap());
        let u = DiscreteField::interpolate_vector(&space, |x, y| [-y, x]).unwrap();
        let state = PenaltyState::new(compute_loc_tol(&mesh, 1e-5), 1e-3, 1e-8, 1.0);
        let p = recover_pressure(&u, &state).unwrap();
        for v in &p {
            assert!(v.abs() < 1e-10, "{v}");
        }
        // scaling: halving eps doubles the recovered pressure
        let u = DiscreteField::interpolate_vector(&space, |x, _| [x * x, 0.0]).unwrap();
        let mut state2 = state.clone();
        state2.eps.iter_mut().for_each(|e| *e *= 0.5);
        let p1 = recover_pressure(&u, &state).unwrap();
        let p2 = recover_pressure(&u, &state2).unwrap();
        for (a, b) in p1.iter().zip(&p2) {
            assert!((b - 2.0 * a).abs() < 1e-10 * a.abs().max(1e-30), "{a} {b}");
        }
        // zero mean
        let mean: f64 = p1
            .iter()
            .zip(mesh.areas())
            .map(|(&v, &a)| v * a)
            .sum::<f64>();
        assert!(mean.abs() < 1e-10);
    }
}
