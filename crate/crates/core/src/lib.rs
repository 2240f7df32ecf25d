//! Finite-element solvers for incompressible Stokes and Navier-Stokes flow
//! with adaptive element-by-element selection of the grad-div/penalty
//! parameter.
//!
//! The crate is organized around:
//! - [`mesh`]: triangulations of the benchmark domains plus an ASCII format;
//! - [`fem`]: Lagrange spaces (P1-P3), quadrature and field evaluation;
//! - [`system`]: sparse assembly of the weak forms and the direct solver;
//! - [`solvers`]: the coupled Stokes reference, the adaptive elementwise
//!   penalty loop, the pointwise penalty fixed point and the semi-implicit
//!   Navier-Stokes stepper;
//! - [`diagnostics`]: error norms, convergence rates, the discrete dual norm
//!   and the stability/monotonicity bound checks;
//! - [`cases`]: the built-in benchmark problems.

pub mod error;
pub mod fem;
pub mod solvers;
pub mod system;
pub mod mesh;

pub use error::{Error, Result};
pub use fem::{build_space, DiscreteField, FunctionSpace, QuadratureRule};
pub use mesh::{Mesh, MeshStats};
pub use solvers::{AdaptiveConfig, SolveReport, TimeConfig};
pub use system::{PenaltyState, SparseSystem};
