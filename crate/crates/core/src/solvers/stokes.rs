//! Steady Stokes drivers: coupled Taylor-Hood reference, adaptive
//! elementwise penalty, constant penalty, and the pointwise penalty fixed
//! point.

use super::{
    compute_loc_tol, element_div_estimator, update_epsilon, AdaptiveConfig, EpsSummary,
    EpsilonUpdateMode, SolveReport,
};
use crate::error::{Error, Result};
use crate::fem::{build_space, DiscreteField, FunctionSpace};
use crate::mesh::Mesh;
use crate::system::{
    apply_dirichlet, assemble_diffusion, assemble_divdiv_pointwise, assemble_divdiv_weighted,
    assemble_load, assemble_mixed_divergence, pressure_integral_row, solve_linear, BcFn,
    CooMatrix, PenaltyState, SparseSystem,
};
use std::sync::Arc;
use std::time::Instant;

fn eps_summary(state: &PenaltyState, div_l2_sq: f64, tol: f64) -> EpsSummary {
    let (min, max, mean) = state.eps_summary();
    EpsSummary {
        min,
        max,
        mean,
        satisfaction: state.satisfaction_fraction(),
        locally_satisfied: state.locally_satisfied(),
        global_target_met: div_l2_sq <= 0.5 * tol * tol,
    }
}

/// Solves the coupled Stokes system with a Taylor-Hood pair: continuous
/// P`degree` velocity and P`degree-1` pressure, plus a scalar Lagrange
/// multiplier pinning the pressure mean to zero.
pub fn solve_coupled_stokes(
    mesh: &Arc<Mesh>,
    nu: f64,
    f: &dyn Fn(f64, f64) -> [f64; 2],
    bcs: &[(i32, BcFn)],
    degree: usize,
) -> Result<(DiscreteField, DiscreteField, SolveReport)> {
    if degree < 2 {
        return Err(Error::InvalidArgument(format!(
            "the coupled solve needs velocity degree >= 2 for inf-sup stability, got {degree}"
        )));
    }
    let start = Instant::now();
    let vel_space = Arc::new(build_space(mesh.clone(), degree, 2)?);
    let pres_space = Arc::new(build_space(mesh.clone(), degree - 1, 1)?);
    let (n_u, n_p) = (vel_space.n_dofs(), pres_space.n_dofs());
    let n = n_u + n_p + 1;

    let k = assemble_diffusion(&vel_space, nu)?;
    let b = assemble_mixed_divergence(&vel_space, &pres_space)?;
    let m = pressure_integral_row(&pres_space)?;

    let mut coo = CooMatrix::new(n, n);
    coo.add_block(0, 0, &k);
    coo.add_scaled_block(0, n_u, &b, -1.0);
    coo.add_transposed_block(n_u, 0, &b);
    for (j, &mj) in m.iter().enumerate() {
        coo.push(n_u + j, n_u + n_p, mj);
        coo.push(n_u + n_p, n_u + j, mj);
    }

    let mut rhs = vec![0.0; n];
    rhs[..n_u].copy_from_slice(&assemble_load(&vel_space, f)?);

    let mut system = SparseSystem::new(coo.into_csr(), rhs);
    apply_dirichlet(&mut system, &vel_space, bcs)?;
    let x = solve_linear(&system)?;

    let velocity = DiscreteField::from_coefficients(vel_space, x[..n_u].to_vec())?;
    let pressure = DiscreteField::from_coefficients(pres_space, x[n_u..n_u + n_p].to_vec())?;
    let div_l2_sq: f64 = element_div_estimator(&velocity)?.iter().sum();
    let report = SolveReport {
        iterations: 1,
        div_l2_sq,
        div_history: vec![div_l2_sq],
        increments: Vec::new(),
        eps: None,
        wall_time: start.elapsed(),
    };
    Ok((velocity, pressure, report))
}

struct PenaltyAssembly {
    space: Arc<FunctionSpace>,
    stiffness: CooMatrix,
    load: Vec<f64>,
}

impl PenaltyAssembly {
    fn new(
        mesh: &Arc<Mesh>,
        nu: f64,
        f: &dyn Fn(f64, f64) -> [f64; 2],
        degree: usize,
    ) -> Result<Self> {
        let space = Arc::new(build_space(mesh.clone(), degree, 2)?);
        let stiffness = assemble_diffusion(&space, nu)?;
        let load = assemble_load(&space, f)?;
        Ok(PenaltyAssembly { space, stiffness, load })
    }

    fn solve_with(&self, penalty: CooMatrix, bcs: &[(i32, BcFn)]) -> Result<DiscreteField> {
        let n = self.space.n_dofs();
        let mut coo = CooMatrix::new(n, n);
        coo.add_block(0, 0, &self.stiffness);
        coo.add_block(0, 0, &penalty);
        let mut system = SparseSystem::new(coo.into_csr(), self.load.clone());
        apply_dirichlet(&mut system, &self.space, bcs)?;
        let x = solve_linear(&system)?;
        DiscreteField::from_coefficients(self.space.clone(), x)
    }
}

/// Adaptive elementwise penalty method for Stokes: solve, estimate the
/// per-element divergence residual, shrink the penalty parameter where the
/// local tolerance is violated, and repeat. The loop stops when every local
/// tolerance holds, when no parameter can change any more (all violating
/// elements sit on the floor), or after `max_iter` iterations.
pub fn solve_ep_stokes(
    mesh: &Arc<Mesh>,
    nu: f64,
    f: &dyn Fn(f64, f64) -> [f64; 2],
    bcs: &[(i32, BcFn)],
    degree: usize,
    config: &AdaptiveConfig,
) -> Result<(DiscreteField, PenaltyState, SolveReport)> {
    config.validate()?;
    let start = Instant::now();
    let assembly = PenaltyAssembly::new(mesh, nu, f, degree)?;
    let mut state = PenaltyState::new(
        compute_loc_tol(mesh, config.tol),
        config.initial_eps,
        config.lower_eps,
        config.upper_eps,
    );

    let mut u =
        assembly.solve_with(assemble_divdiv_weighted(&assembly.space, &state)?, bcs)?;
    let mut iterations = 1;
    let mut div_history = Vec::new();
    loop {
        state.est = element_div_estimator(&u)?;
        div_history.push(state.est.iter().sum::<f64>());
        if state.locally_satisfied() || iterations >= config.max_iter {
            break;
        }
        if !update_epsilon(&mut state, EpsilonUpdateMode::Stokes) {
            // every violating element is already floored; the next solve
            // would reproduce the same iterate
            break;
        }
        u = assembly.solve_with(assemble_divdiv_weighted(&assembly.space, &state)?, bcs)?;
        iterations += 1;
    }

    let div_l2_sq = *div_history.last().unwrap();
    let report = SolveReport {
        iterations,
        div_l2_sq,
        div_history,
        increments: Vec::new(),
        eps: Some(eps_summary(&state, div_l2_sq, config.tol)),
        wall_time: start.elapsed(),
    };
    Ok((u, state, report))
}

/// One penalty solve with a constant parameter, as used by the engineering
/// baseline the adaptive method is compared against.
pub fn solve_constant_penalty_stokes(
    mesh: &Arc<Mesh>,
    nu: f64,
    f: &dyn Fn(f64, f64) -> [f64; 2],
    bcs: &[(i32, BcFn)],
    degree: usize,
    eps: f64,
    tol: f64,
) -> Result<(DiscreteField, PenaltyState, SolveReport)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("penalty parameter must be positive, got {eps}")));
    }
    let start = Instant::now();
    let assembly = PenaltyAssembly::new(mesh, nu, f, degree)?;
    let mut state = PenaltyState::new(compute_loc_tol(mesh, tol), eps, eps, eps);
    let u = assembly.solve_with(assemble_divdiv_weighted(&assembly.space, &state)?, bcs)?;
    state.est = element_div_estimator(&u)?;
    let div_l2_sq: f64 = state.est.iter().sum();
    let report = SolveReport {
        iterations: 1,
        div_l2_sq,
        div_history: vec![div_l2_sq],
        increments: Vec::new(),
        eps: Some(eps_summary(&state, div_l2_sq, tol)),
        wall_time: start.elapsed(),
    };
    Ok((u, state, report))
}

/// Pointwise penalty method: the weight `|div u|^2 / loctol` makes the
/// grad-div term cubic, solved here by a damped Picard iteration seeded with
/// the unit-penalty linear solution. Iterates until the coefficient
/// increment drops below 1e-10 in the max norm, failing after 50 iterations.
pub fn solve_pp_stokes(
    mesh: &Arc<Mesh>,
    nu: f64,
    f: &dyn Fn(f64, f64) -> [f64; 2],
    bcs: &[(i32, BcFn)],
    degree: usize,
    config: &AdaptiveConfig,
) -> Result<(DiscreteField, SolveReport)> {
    config.validate()?;
    const MAX_PICARD: usize = 50;
    const INCREMENT_TOL: f64 = 1e-10;
    let start = Instant::now();
    let assembly = PenaltyAssembly::new(mesh, nu, f, degree)?;
    let loc_tol = compute_loc_tol(mesh, config.tol);

    // initial guess: the linear penalty solution with unit parameter
    let unit = PenaltyState::new(loc_tol.clone(), 1.0, 1.0, 1.0);
    let mut u =
        assembly.solve_with(assemble_divdiv_weighted(&assembly.space, &unit)?, bcs)?;

    let mut increments = Vec::new();
    let mut damping = 0.5;
    let mut converged = false;
    for _ in 0..MAX_PICARD {
        let penalty = assemble_divdiv_pointwise(&assembly.space, &u, &loc_tol)?;
        let fresh = assembly.solve_with(penalty, bcs)?;
        let mut increment = 0.0f64;
        {
            let prev = u.coefficients_mut();
            for (p, &nw) in prev.iter_mut().zip(fresh.coefficients()) {
                let next = (1.0 - damping) * *p + damping * nw;
                increment = increment.max((next - *p).abs());
                *p = next;
            }
        }
        if let Some(&last) = increments.last() {
            if increment > last {
                damping = (damping * 0.7).max(0.15);
            }
        }
        increments.push(increment);
        if increment <= INCREMENT_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::PicardNonConvergence { history: increments });
    }

    let div_l2_sq: f64 = element_div_estimator(&u)?.iter().sum();
    let report = SolveReport {
        iterations: increments.len(),
        div_l2_sq,
        div_history: vec![div_l2_sq],
        increments,
        eps: None,
        wall_time: start.elapsed(),
    };
    Ok((u, report))
}
