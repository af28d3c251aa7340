//! The flow `d_t u = Q[u]` on geodesic balls: grid, operator, time stepping,
//! curvature of the evolving graphs, evolution-identity checks and snapshots.

pub mod grid;
pub mod identities;
pub mod linear;
pub mod operator;
pub mod sff;
pub mod snapshot;
pub mod stepper;

pub use grid::Grid;
pub use operator::{discretize_q, q_pointwise, radial_q};
pub use sff::second_fundamental_form;
pub use stepper::{radial_solve, solve_ball, step, BallProblem, FlowSolver, FlowState, Scheme, StepControl, Trajectory};
