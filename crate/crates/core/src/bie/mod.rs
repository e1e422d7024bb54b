//! Boundary integral machinery on circular domains: Nyström grids, the
//! Neumann-kernel operators, GMRES, the Cauchy integral and FFT interpolation.

mod cauchy;
mod gmres;
mod grid;
mod operators;
mod trig;

pub use cauchy::{cauchy_eval, cauchy_eval_guarded, cauchy_weights, DEFAULT_GUARD};
pub use gmres::{gmres, DenseMatrix, GmresConfig, GmresOutcome, LinearOperator};
pub use grid::{discretize, BoundaryGrid, CircularDomain};
pub use operators::{
    apply_m, apply_n, nu_from, solve_neumann, Density, LayerOperators, NeumannSolution, NuCollapse,
    PiecewiseConstant, ASSEMBLE_LIMIT, NU_SPREAD_TOL,
};
pub use trig::{trig_interp, Spectral, TrigInterpolant};
