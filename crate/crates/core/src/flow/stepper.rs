use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::barriers::height_bounds;
use crate::error::{Error, Result};
use crate::flow::grid::Grid;
use crate::flow::linear::bicgstab;
use crate::flow::operator::{apply_q, assemble_operator, gradient_norm, w_field, GridGeometry};
use crate::flow::sff::second_fundamental_form_with;
use crate::geometry::ModelGeometry;

pub type BoundaryData = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type InitialData = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

const COMPAT_TOL: f64 = 1e-12;
const COMPAT_SAMPLES: usize = 256;

/// Dirichlet problem for the flow on `B_R x [0, T]`.
#[derive(Clone)]
pub struct BallProblem<'a> {
    pub model: &'a ModelGeometry,
    pub radius: f64,
    pub t_final: f64,
    pub phi: BoundaryData,
    pub u0: InitialData,
}

impl fmt::Debug for BallProblem<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BallProblem")
            .field("radius", &self.radius)
            .field("t_final", &self.t_final)
            .finish_non_exhaustive()
    }
}

impl<'a> BallProblem<'a> {
    /// `t_final` defaults to `zeta(R)/2`.
    pub fn new(model: &'a ModelGeometry, radius: f64, t_final: Option<f64>, phi: BoundaryData, u0: InitialData) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Parameter(format!("R must be positive, got {radius}")));
        }
        let t_final = t_final.unwrap_or_else(|| 0.5 * model.zeta(radius));
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Parameter(format!("T must be positive, got {t_final}")));
        }
        for j in 0..COMPAT_SAMPLES {
            let th = std::f64::consts::TAU * j as f64 / COMPAT_SAMPLES as f64;
            let (a, b) = (u0(radius, th), phi(th));
            if !((a - b).abs() <= COMPAT_TOL) {
                return Err(Error::Parameter(format!(
                    "u0(R, theta) = {a} differs from phi(theta) = {b} at theta = {th}"
                )));
            }
            for i in 0..=16 {
                let v = u0(radius * i as f64 / 16.0, th);
                if !v.is_finite() {
                    return Err(Error::Parameter(format!("u0 is not finite at r = {}", radius * i as f64 / 16.0)));
                }
            }
        }
        Ok(BallProblem {
            model,
            radius,
            t_final,
            phi,
            u0,
        })
    }

    /// Radial data: constant `phi` and `u0` independent of `theta`.
    pub fn radial(
        model: &'a ModelGeometry,
        radius: f64,
        t_final: Option<f64>,
        profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        let edge = profile(radius);
        let p = profile.clone();
        BallProblem::new(model, radius, t_final, Arc::new(move |_| edge), Arc::new(move |r, _| p(r)))
    }

    fn check_radial(&self) -> Result<()> {
        let phi0 = (self.phi)(0.0);
        for j in 0..64 {
            let th = std::f64::consts::TAU * j as f64 / 64.0;
            if (self.phi)(th) != phi0 {
                return Err(Error::Parameter("radial solve needs constant phi".into()));
            }
            for i in 0..=8 {
                let r = self.radius * i as f64 / 8.0;
                if ((self.u0)(r, th) - (self.u0)(r, 0.0)).abs() > COMPAT_TOL {
                    return Err(Error::Parameter("radial solve needs u0 independent of theta".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExplicitEuler,
    #[default]
    SemiImplicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControl {
    pub scheme: Scheme,
    pub cfl: f64,
    pub dt_max: f64,
    pub tol_lin: f64,
    pub max_lin_iter: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            scheme: Scheme::SemiImplicit,
            cfl: 0.5,
            dt_max: 1e-2,
            tol_lin: 1e-12,
            max_lin_iter: 2000,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Schema {
                key: "cfl".into(),
                constraint: format!("must lie in (0, 1], got {}", self.cfl),
            });
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::Schema {
                key: "dt_max".into(),
                constraint: format!("must be positive, got {}", self.dt_max),
            });
        }
        if !(self.tol_lin > 0.0) {
            return Err(Error::Schema {
                key: "tol_lin".into(),
                constraint: format!("must be positive, got {}", self.tol_lin),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub step_count: usize,
}

/// Sampled time series of a scalar.
pub type Series = Vec<(f64, f64)>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: Grid,
    pub snapshots: Vec<FlowState>,
    /// `max |grad u|` over the grid at each snapshot.
    pub max_grad: Series,
    /// `max |A|` over the interior nodes at each snapshot.
    pub max_a: Series,
}

impl Trajectory {
    pub fn last(&self) -> &FlowState {
        self.snapshots.last().expect("trajectory has at least the initial snapshot")
    }
}

/// Stepper bound to one problem and grid.
pub struct FlowSolver<'p, 'a> {
    pub problem: &'p BallProblem<'a>,
    pub grid: Grid,
    pub control: StepControl,
    geo: GridGeometry,
    boundary: Vec<f64>,
}

impl<'p, 'a> FlowSolver<'p, 'a> {
    pub fn new(problem: &'p BallProblem<'a>, grid: Grid, control: StepControl) -> Result<Self> {
        control.validate()?;
        if (grid.radius - problem.radius).abs() > 1e-12 * problem.radius {
            return Err(Error::Parameter(format!(
                "grid radius {} differs from problem radius {}",
                grid.radius, problem.radius
            )));
        }
        let geo = GridGeometry::new(problem.model, &grid)?;
        let boundary = (0..grid.ntheta).map(|j| (problem.phi)(grid.theta(j))).collect();
        Ok(FlowSolver {
            problem,
            grid,
            control,
            geo,
            boundary,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geo
    }

    pub fn initial_state(&self) -> FlowState {
        let mut u = self.grid.sample(|r, th| (self.problem.u0)(r, th));
        self.impose_boundary(&mut u);
        let w = w_field(&self.grid, &self.geo, &u);
        FlowState {
            t: 0.0,
            u,
            w,
            step_count: 0,
        }
    }

    fn impose_boundary(&self, u: &mut [f64]) {
        let start = self.grid.idx(self.grid.nr, 0);
        u[start..].copy_from_slice(&self.boundary);
    }

    /// Explicit stability bound `cfl / max |L_kk|`; in one dimension this is
    /// `cfl h^2 / (2 a)`.
    pub fn cfl_bound(&self, u: &[f64]) -> f64 {
        let l = assemble_operator(&self.grid, &self.geo, u);
        let max_diag = l.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
        self.control.cfl / max_diag
    }

    /// One step of size `min(dt_max, T - t)`.
    pub fn step(&self, state: &FlowState) -> Result<FlowState> {
        let dt = self.control.dt_max.min(self.problem.t_final - state.t);
        self.step_by(state, dt)
    }

    pub fn step_by(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        if !(dt > 0.0) {
            return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
        }
        let grid = &self.grid;
        let mut u = match self.control.scheme {
            Scheme::ExplicitEuler => {
                let bound = self.cfl_bound(&state.u);
                if dt > bound {
                    return Err(Error::Cfl { dt, bound });
                }
                let q = apply_q(grid, &self.geo, &state.u);
                state
                    .u
                    .iter()
                    .zip(&q)
                    .enumerate()
                    .map(|(k, (u, q))| if grid.is_boundary(k) { *u } else { u + dt * q })
                    .collect()
            }
            Scheme::SemiImplicit => {
                let l = assemble_operator(grid, &self.geo, &state.u);
                let a = l.identity_minus(dt, |k| grid.is_boundary(k));
                let mut rhs = state.u.clone();
                self.impose_boundary(&mut rhs);
                let mut x = state.u.clone();
                bicgstab(&a, &rhs, &mut x, self.control.tol_lin, self.control.max_lin_iter)?;
                x
            }
        };
        self.impose_boundary(&mut u);
        let w = w_field(grid, &self.geo, &u);
        Ok(FlowState {
            t: state.t + dt,
            u,
            w,
            step_count: state.step_count + 1,
        })
    }

    /// `10 (max |u0| + v_{R(T)}(0))`, ten times the height bound on `B_R`.
    pub fn divergence_guard(&self, state: &FlowState) -> Result<f64> {
        let sup = state.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let inf = state.u.iter().cloned().fold(f64::INFINITY, f64::min);
        let model = self.problem.model;
        let hb = height_bounds(model, self.problem.radius, self.problem.t_final, sup, inf)?;
        Ok(10.0 * hb.upper(self.problem.radius).abs().max(hb.lower(self.problem.radius).abs()))
    }

    fn record(&self, state: &FlowState, traj: &mut Trajectory) -> Result<()> {
        let grad = gradient_norm(&self.grid, &self.geo, &state.u);
        traj.max_grad.push((state.t, grad.iter().cloned().fold(0.0, f64::max)));
        let (a2, _) = second_fundamental_form_with(self.problem.model, &self.grid, &self.geo, &state.u);
        let max_a = a2.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(*v)).sqrt();
        traj.max_a.push((state.t, max_a));
        traj.snapshots.push(state.clone());
        Ok(())
    }

    /// Integrates to `T`, keeping every `snapshot_every`-th state plus the first and last.
    pub fn solve(&self, snapshot_every: usize) -> Result<Trajectory> {
        let every = snapshot_every.max(1);
        let mut state = self.initial_state();
        let guard = self.divergence_guard(&state)?;
        let mut traj = Trajectory {
            grid: self.grid,
            snapshots: Vec::new(),
            max_grad: Vec::new(),
            max_a: Vec::new(),
        };
        self.record(&state, &mut traj)?;
        let t_end = self.problem.t_final;
        while state.t < t_end * (1.0 - 1e-14) {
            state = match self.control.scheme {
                Scheme::SemiImplicit => self.step(&state)?,
                Scheme::ExplicitEuler => {
                    let dt = self.control.dt_max.min(t_end - state.t).min(self.cfl_bound(&state.u));
                    self.step_by(&state, dt)?
                }
            };
            let sup = state.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(sup <= guard) {
                return Err(Error::Divergence { t: state.t, sup, guard });
            }
            let last = state.t >= t_end * (1.0 - 1e-14);
            if last || state.step_count.is_multiple_of(every) {
                self.record(&state, &mut traj)?;
            }
        }
        Ok(traj)
    }
}

pub fn step(state: &FlowState, problem: &BallProblem, grid: &Grid, control: &StepControl) -> Result<FlowState> {
    FlowSolver::new(problem, *grid, *control)?.step(state)
}

pub fn solve_ball(problem: &BallProblem, grid: &Grid, control: &StepControl, snapshot_every: usize) -> Result<Trajectory> {
    FlowSolver::new(problem, *grid, *control)?.solve(snapshot_every)
}

/// One-dimensional solve for radial data in any dimension `n`.
pub fn radial_solve(problem: &BallProblem, nr: usize, control: &StepControl, snapshot_every: usize) -> Result<Trajectory> {
    problem.check_radial()?;
    solve_ball(problem, &Grid::radial(problem.radius, nr)?, control, snapshot_every)
}
