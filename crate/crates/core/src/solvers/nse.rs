//! Semi-implicit time stepping for the penalized Navier-Stokes equations.
//!
//! Each step solves the linear system
//! `(M/dt + C(u_n) + nu K + divdiv(eps)) u_{n+1} = M u_n / dt + F(t_{n+1})`
//! where `C` carries the Temam-modified convection frozen at the previous
//! velocity. In retry mode the step is re-solved with updated penalty
//! parameters until every local tolerance holds or the iteration cap is hit;
//! the parameters for the next step always come from the update applied to
//! the accepted solution.

use super::{
    compute_loc_tol, element_div_estimator, solve_ep_stokes, update_epsilon, AdaptiveConfig,
    EpsilonUpdateMode, TimeConfig,
};
use crate::error::{Error, Result};
use crate::fem::{build_space, DiscreteField, FunctionSpace};
use crate::mesh::Mesh;
use crate::system::{
    apply_dirichlet, assemble_convection_temam, assemble_diffusion, assemble_divdiv_weighted,
    assemble_load, assemble_mass, solve_linear, BcFn, CooMatrix, CsrMatrix, PenaltyState,
    SparseSystem,
};
use std::sync::Arc;
use std::time::{Duration, Instant};

/// Time-dependent vector function `(t, x, y) -> [f64; 2]`.
pub type TimeVectorFn<'a> = &'a (dyn Fn(f64, f64, f64) -> [f64; 2] + 'a);

/// Initial velocity for a transient run.
pub enum InitialVelocity<'a> {
    /// Adaptive penalty solve of the steady Stokes problem with data at t=0.
    SteadyStokes,
    /// Nodal interpolant of the given function.
    Interpolate(&'a dyn Fn(f64, f64) -> [f64; 2]),
}

/// One accepted time step.
#[derive(Debug, Clone, Copy)]
pub struct NseStepRecord {
    pub step: usize,
    pub t: f64,
    pub div_l2_sq: f64,
    /// Penalty parameters used by the accepted solve.
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_mean: f64,
    pub inner_iterations: usize,
    pub locally_satisfied: bool,
    /// Max-norm of the velocity update over the step.
    pub increment: f64,
}

/// Transient run outcome. `failure` preserves the history up to a failed
/// step instead of discarding it.
pub struct NseRun {
    pub records: Vec<NseStepRecord>,
    pub velocity: DiscreteField,
    pub state: PenaltyState,
    pub failure: Option<String>,
    pub wall_time: Duration,
}

struct Stepper {
    space: Arc<FunctionSpace>,
    mass: CooMatrix,
    mass_csr: CsrMatrix,
    stiffness: CooMatrix,
}

impl Stepper {
    fn new(mesh: &Arc<Mesh>, nu: f64, degree: usize) -> Result<Self> {
        let space = Arc::new(build_space(mesh.clone(), degree, 2)?);
        let mass = assemble_mass(&space)?;
        let mass_csr = mass.clone().into_csr();
        let stiffness = assemble_diffusion(&space, nu)?;
        Ok(Stepper { space, mass, mass_csr, stiffness })
    }

    /// Advances one step of size `dt`; data is already bound to t_{n+1}.
    fn step(
        &self,
        u_prev: &DiscreteField,
        state: &mut PenaltyState,
        f: &dyn Fn(f64, f64) -> [f64; 2],
        bcs: &[(i32, BcFn)],
        dt: f64,
        retry: bool,
        max_inner: usize,
    ) -> Result<(DiscreteField, usize)> {
        let n = self.space.n_dofs();
        let convection = assemble_convection_temam(&self.space, u_prev)?;
        let mut base = CooMatrix::new(n, n);
        base.add_scaled_block(0, 0, &self.mass, 1.0 / dt);
        base.add_block(0, 0, &convection);
        base.add_block(0, 0, &self.stiffness);
        let mut rhs_base = self.mass_csr.matvec(u_prev.coefficients());
        let load = assemble_load(&self.space, f)?;
        for (r, l) in rhs_base.iter_mut().zip(&load) {
            *r = *r / dt + l;
        }

        let mut inner = 0;
        loop {
            inner += 1;
            let mut coo = CooMatrix::new(n, n);
            coo.add_block(0, 0, &base);
            coo.add_block(0, 0, &assemble_divdiv_weighted(&self.space, state)?);
            let mut system = SparseSystem::new(coo.into_csr(), rhs_base.clone());
            apply_dirichlet(&mut system, &self.space, bcs)?;
            let x = solve_linear(&system)?;
            let u = DiscreteField::from_coefficients(self.space.clone(), x)?;
            state.est = element_div_estimator(&u)?;
            if !retry || state.locally_satisfied() || inner >= max_inner {
                return Ok((u, inner));
            }
            update_epsilon(state, EpsilonUpdateMode::Transient);
        }
    }
}

/// One semi-implicit step without retry: solve at t_{n+1}, then update the
/// penalty parameters from the new velocity for the following step.
pub fn step_nse_ep(
    u_prev: &DiscreteField,
    state: &mut PenaltyState,
    nu: f64,
    f: &dyn Fn(f64, f64) -> [f64; 2],
    bcs: &[(i32, BcFn)],
    dt: f64,
) -> Result<DiscreteField> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let space = u_prev.space();
    let stepper = Stepper::new(space.mesh(), nu, space.degree())?;
    let (u, _) = stepper.step(u_prev, state, f, bcs, dt, false, 1)?;
    update_epsilon(state, EpsilonUpdateMode::Transient);
    Ok(u)
}

/// Runs the elementwise penalty Navier-Stokes scheme from t = 0 to
/// `time.t_final`.
pub fn run_nse_ep(
    mesh: &Arc<Mesh>,
    nu: f64,
    forcing: TimeVectorFn,
    boundary: &[(i32, TimeVectorFn)],
    initial: &InitialVelocity,
    degree: usize,
    time: &TimeConfig,
    config: &AdaptiveConfig,
) -> Result<NseRun> {
    time.validate()?;
    config.validate()?;
    let start = Instant::now();
    let stepper = Stepper::new(mesh, nu, degree)?;

    let u0 = match initial {
        InitialVelocity::Interpolate(g) => {
            DiscreteField::interpolate_vector(&stepper.space, |x, y| g(x, y))?
        }
        InitialVelocity::SteadyStokes => {
            let f0 = |x: f64, y: f64| forcing(0.0, x, y);
            let bound = bind_bcs(boundary, 0.0);
            let bcs = bc_refs(&bound);
            let (u, _, _) = solve_ep_stokes(mesh, nu, &f0, &bcs, degree, config)?;
            u
        }
    };

    let mut state = PenaltyState::new(
        compute_loc_tol(mesh, config.tol),
        config.initial_eps,
        config.lower_eps,
        config.upper_eps,
    );
    let mut u = u0;
    let mut records = Vec::new();
    let mut failure = None;

    let n_steps = ((time.t_final / time.dt) - 1e-9).ceil().max(1.0) as usize;
    for step in 1..=n_steps {
        let t1 = step as f64 * time.dt;
        let f_t = |x: f64, y: f64| forcing(t1, x, y);
        let bound = bind_bcs(boundary, t1);
        let bcs = bc_refs(&bound);
        match stepper.step(&u, &mut state, &f_t, &bcs, time.dt, time.retry, config.max_iter) {
            Ok((u_new, inner)) => {
                // inside `step` the parameters only change before a re-solve,
                // so this is the state the accepted solve used
                let (eps_min, eps_max, eps_mean) = state.eps_summary();
                let increment = u_new
                    .coefficients()
                    .iter()
                    .zip(u.coefficients())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                records.push(NseStepRecord {
                    step,
                    t: t1,
                    div_l2_sq: state.est.iter().sum(),
                    eps_min,
                    eps_max,
                    eps_mean,
                    inner_iterations: inner,
                    locally_satisfied: state.locally_satisfied(),
                    increment,
                });
                u = u_new;
                // parameters for the next step from the accepted solution
                update_epsilon(&mut state, EpsilonUpdateMode::Transient);
            }
            Err(e) => {
                failure = Some(format!("step {step} (t = {t1:.6}): {e}"));
                break;
            }
        }
    }

    Ok(NseRun { records, velocity: u, state, failure, wall_time: start.elapsed() })
}

fn bind_bcs<'a>(
    boundary: &'a [(i32, TimeVectorFn<'a>)],
    t: f64,
) -> Vec<(i32, Box<dyn Fn(f64, f64) -> [f64; 2] + 'a>)> {
    boundary
        .iter()
        .map(|&(m, g)| {
            let f: Box<dyn Fn(f64, f64) -> [f64; 2]> = Box::new(move |x, y| g(t, x, y));
            (m, f)
        })
        .collect()
}

fn bc_refs<'a>(
    bound: &'a [(i32, Box<dyn Fn(f64, f64) -> [f64; 2] + 'a>)],
) -> Vec<(i32, BcFn<'a>)> {
    bound.iter().map(|(m, b)| (*m, b.as_ref() as BcFn)).collect()
}
