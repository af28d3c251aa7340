//! Existence by exhaustion: Dirichlet problems on an increasing ladder of
//! balls, compared on a fixed observation cylinder `B_{r0} x [0, T0]`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barriers::{curvature_constants, height_bounds, interior_gradient_bound_tail};
use crate::error::{Error, Result};
use crate::flow::grid::Grid;
use crate::flow::operator::{gradient_norm, GridGeometry};
use crate::flow::sff::second_fundamental_form;
use crate::flow::stepper::{BallProblem, BoundaryData, FlowSolver, InitialData, StepControl, Trajectory};
use crate::geometry::ModelGeometry;
use crate::interp::{interpolate, interpolate_linear};

const SEARCH_LIMIT: u64 = 1_000_000;

/// `(r, theta) -> phi(theta)`.
pub fn radial_extension(phi: BoundaryData) -> InitialData {
    Arc::new(move |_, theta| phi(theta))
}

/// Smallest integer `L > r` with `zeta(r) < zeta(L) / 4`.
pub fn quarter_radius(model: &ModelGeometry, r: f64) -> Result<f64> {
    let target = 4.0 * model.zeta(r);
    let mut l = r.floor() as u64 + 1;
    while l < SEARCH_LIMIT {
        if target < model.zeta(l as f64) {
            return Ok(l as f64);
        }
        l += 1;
    }
    Err(Error::SearchOverflow { r, limit: SEARCH_LIMIT })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionPlan {
    pub r0: f64,
    /// Radii `r_k` fed to the quarter rule.
    pub seeds: Vec<f64>,
    /// Rung radii `R_k`.
    pub ladder: Vec<f64>,
    pub t0: f64,
    pub tol: f64,
    /// Radial spacing shared by every rung.
    pub h: f64,
    pub ntheta: usize,
    pub control: StepControl,
    /// Number of stored snapshots per rung (at equal step counts).
    pub snapshots: usize,
    pub parallel: bool,
    /// Stop once some `d_k < tol`.
    pub early_stop: bool,
}

/// Ladder from `r_1 = r0`, `r_{k+1} = growth r_k`, with default grids.
pub fn build_ladder(model: &ModelGeometry, r0: f64, count: usize) -> Result<ExhaustionPlan> {
    build_ladder_with(model, r0, count, 2.0)
}

pub fn build_ladder_with(model: &ModelGeometry, r0: f64, count: usize, growth: f64) -> Result<ExhaustionPlan> {
    if count < 2 {
        return Err(Error::Parameter(format!("ladder needs at least 2 rungs, got {count}")));
    }
    if !(r0 > 0.0) || !(growth > 1.0) {
        return Err(Error::Parameter(format!("need r0 > 0 and growth > 1, got {r0}, {growth}")));
    }
    let mut seeds = Vec::with_capacity(count);
    let mut ladder: Vec<f64> = Vec::with_capacity(count);
    let mut r = r0;
    while ladder.len() < count {
        let l = quarter_radius(model, r)?;
        if ladder.last().is_none_or(|&prev| l > prev) {
            seeds.push(r);
            ladder.push(l);
        }
        r *= growth;
    }
    let plan = ExhaustionPlan {
        r0,
        seeds,
        t0: 0.5 * model.zeta(ladder[0]),
        ladder,
        tol: 1e-3,
        h: 0.125,
        ntheta: 32,
        control: StepControl {
            dt_max: 1.0 / 64.0,
            ..Default::default()
        },
        snapshots: 16,
        parallel: false,
        early_stop: true,
    };
    plan.check(model)?;
    Ok(plan)
}

impl ExhaustionPlan {
    pub fn check(&self, model: &ModelGeometry) -> Result<()> {
        let quarter = model.zeta(self.r0);
        for (k, &l) in self.ladder.iter().enumerate() {
            if k > 0 && l <= self.ladder[k - 1] {
                return Err(Error::Parameter("ladder must be strictly increasing".into()));
            }
            if !(quarter < 0.25 * model.zeta(l)) {
                return Err(Error::Parameter(format!("rung R = {l} fails zeta(r0) < zeta(R)/4")));
            }
        }
        if !(self.h > 0.0 && self.t0 > 0.0 && self.tol > 0.0) {
            return Err(Error::Parameter("h, T0 and tol must be positive".into()));
        }
        Grid::with_spacing(self.r0, self.h, self.ntheta)?;
        Ok(())
    }

    /// Observation grid on `B_{r0}`.
    pub fn observation_grid(&self) -> Result<Grid> {
        Grid::with_spacing(self.r0, self.h, self.ntheta)
    }
}

/// Per-rung results on the observation cylinder.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RungReport {
    #[serde(rename = "R")]
    pub radius: f64,
    /// `sup |u^{R_{k+1}} - u^{R_k}|`; absent on the last rung.
    pub d_k: Option<f64>,
    pub max_grad: f64,
    #[serde(rename = "max_A")]
    pub max_a: f64,
    pub margins: RungMargins,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RungMargins {
    /// `min (upper - u, u - lower)` for the height bounds on `B_{r0}`.
    pub height: f64,
    /// `log(gradient bound) - log(max_grad)`; absent when `max_grad = 0`.
    pub log_gradient: Option<f64>,
    /// `curvature bound - max_A`.
    pub curvature: f64,
    /// Cubic-minus-linear interpolation indicator on the observation grid.
    pub interpolation: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConvergenceReport {
    pub rungs: Vec<RungReport>,
    pub d: Vec<f64>,
    pub tol: f64,
    pub gradient_log_bound: f64,
    pub curvature_bound: f64,
    pub stopped_early: bool,
    pub verdict: bool,
}

/// Observation data of one rung: values on the observation grid at each snapshot.
struct RungData {
    values: Vec<Vec<f64>>,
    max_grad: f64,
    max_a: f64,
    sup_w_sq: f64,
    osc: f64,
    interp_err: f64,
    height_margin: f64,
}

fn solve_rung(
    model: &ModelGeometry,
    plan: &ExhaustionPlan,
    radius: f64,
    phi: &BoundaryData,
    u0: &InitialData,
) -> Result<(Trajectory, GridGeometry)> {
    let problem = BallProblem::new(model, radius, Some(plan.t0), phi.clone(), u0.clone())?;
    let grid = Grid::with_spacing(radius, plan.h, plan.ntheta)?;
    let solver = FlowSolver::new(&problem, grid, plan.control)?;
    let steps = (plan.t0 / plan.control.dt_max).ceil() as usize;
    let every = (steps / plan.snapshots.max(1)).max(1);
    let traj = solver.solve(every)?;
    Ok((traj, solver.geometry().clone()))
}

fn observe(model: &ModelGeometry, plan: &ExhaustionPlan, traj: &Trajectory, geo: &GridGeometry) -> Result<RungData> {
    let obs = plan.observation_grid()?;
    let grid = &traj.grid;
    let inside = obs.len();
    let points: Vec<(f64, f64)> = (0..inside)
        .map(|k| {
            let (i, j) = obs.position(k);
            (obs.r(i), obs.theta(j))
        })
        .collect();
    let rings = grid.rings_within(plan.r0);
    let in_cylinder = |k: usize| grid.position(k).0 <= rings;

    let u0 = &traj.snapshots[0].u;
    let (mut sup0, mut inf0) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in (0..grid.len()).filter(|&k| in_cylinder(k)) {
        sup0 = sup0.max(u0[k]);
        inf0 = inf0.min(u0[k]);
    }
    let bounds = height_bounds(model, plan.r0, plan.t0, sup0, inf0)?;
    let r_obs: Vec<f64> = (0..=rings).map(|i| grid.r(i)).collect();
    let (lower, upper) = bounds.on_grid(&r_obs)?;

    let mut data = RungData {
        values: Vec::with_capacity(traj.snapshots.len()),
        max_grad: 0.0,
        max_a: 0.0,
        sup_w_sq: 0.0,
        osc: 0.0,
        interp_err: 0.0,
        height_margin: f64::INFINITY,
    };
    let (mut umax, mut umin) = (f64::NEG_INFINITY, f64::INFINITY);
    for (snap, state) in traj.snapshots.iter().enumerate() {
        let row: Vec<f64> = points.iter().map(|&(r, t)| interpolate(grid, &state.u, r, t)).collect();
        for &(r, t) in &points {
            let e = (interpolate(grid, &state.u, r, t) - interpolate_linear(grid, &state.u, r, t)).abs();
            data.interp_err = data.interp_err.max(e);
        }
        data.values.push(row);
        let grad = gradient_norm(grid, geo, &state.u);
        let (a2, _) = second_fundamental_form(model, grid, &state.u)?;
        for k in 0..grid.len() {
            umax = umax.max(state.u[k]);
            umin = umin.min(state.u[k]);
            data.sup_w_sq = data.sup_w_sq.max(state.w[k] * state.w[k]);
            if in_cylinder(k) {
                let i = grid.position(k).0;
                // The radial extension has no gradient at the pole at t = 0.
                if snap > 0 {
                    data.max_grad = data.max_grad.max(grad[k]);
                    data.max_a = data.max_a.max(a2[k].sqrt());
                }
                data.height_margin = data.height_margin.min(upper[i] - state.u[k]).min(state.u[k] - lower[i]);
            }
        }
    }
    data.osc = umax - umin;
    Ok(data)
}

fn sup_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Solves every rung to `T0` and compares them on the observation cylinder.
pub fn run_exhaustion(model: &ModelGeometry, plan: &ExhaustionPlan, phi: BoundaryData, u0: InitialData) -> Result<ConvergenceReport> {
    plan.check(model)?;
    let rung = |k: usize| -> Result<RungData> {
        let radius = plan.ladder[k];
        let tag = |e: Error| Error::Rung {
            index: k,
            radius,
            source: Box::new(e),
        };
        let (traj, geo) = solve_rung(model, plan, radius, &phi, &u0).map_err(tag)?;
        observe(model, plan, &traj, &geo).map_err(tag)
    };

    let mut data: Vec<RungData> = Vec::new();
    let mut d = Vec::new();
    let mut stopped_early = false;
    if plan.parallel {
        data = (0..plan.ladder.len()).into_par_iter().map(rung).collect::<Result<Vec<_>>>()?;
        for k in 1..data.len() {
            d.push(sup_diff(&data[k].values, &data[k - 1].values));
        }
    } else {
        for k in 0..plan.ladder.len() {
            data.push(rung(k)?);
            if k > 0 {
                let dk = sup_diff(&data[k].values, &data[k - 1].values);
                d.push(dk);
                if plan.early_stop && dk < plan.tol && k + 1 < plan.ladder.len() {
                    stopped_early = true;
                    break;
                }
            }
        }
    }

    // One-sided estimate checks use the constants of the first rung.
    let first = &data[0];
    let r1 = plan.ladder[0];
    let k_try = 17.0;
    let tail_for = |k: f64| {
        let rho_max = crate::geometry::sample_ladder(0.0, r1, 1024)
            .into_iter()
            .map(|r| model.rho.value(r))
            .fold(0.0, f64::max);
        0.5 / (1.0 + rho_max * rho_max * k.exp())
    };
    let gradient = match interior_gradient_bound_tail(model, r1, first.osc, tail_for(k_try), k_try) {
        Ok(g) => g,
        Err(Error::Parameter(_)) => {
            // Retry at the smallest admissible k.
            let probe = interior_gradient_bound_tail(model, r1, first.osc, tail_for(1e3), 1e3)?;
            let k = probe.k_min.max(k_try);
            interior_gradient_bound_tail(model, r1, first.osc, tail_for(k), k)?
        }
        Err(e) => return Err(e),
    };
    let curvature = curvature_constants(model, r1, plan.t0, first.sup_w_sq, 0.0, 0.0)?;

    let rungs: Vec<RungReport> = data
        .iter()
        .enumerate()
        .map(|(k, r)| RungReport {
            radius: plan.ladder[k],
            d_k: d.get(k).copied(),
            max_grad: r.max_grad,
            max_a: r.max_a,
            margins: RungMargins {
                height: r.height_margin,
                log_gradient: (r.max_grad > 0.0).then(|| gradient.log_bound - r.max_grad.ln()),
                curvature: curvature.bound - r.max_a,
                interpolation: r.interp_err,
            },
        })
        .collect();
    let budget = rungs.iter().map(|r| r.margins.interpolation).fold(0.0, f64::max);
    let last = d.last().copied().unwrap_or(f64::INFINITY);
    Ok(ConvergenceReport {
        verdict: last + nodal_budget(plan, budget) < plan.tol,
        rungs,
        d,
        tol: plan.tol,
        gradient_log_bound: gradient.log_bound,
        curvature_bound: curvature.bound,
        stopped_early,
    })
}

/// Observation nodes coincide with rung nodes when `r0` is a multiple of `h`,
/// so interpolation adds nothing; otherwise the indicator is charged.
fn nodal_budget(plan: &ExhaustionPlan, indicator: f64) -> f64 {
    let ratio = plan.r0 / plan.h;
    if (ratio - ratio.round()).abs() < 1e-9 {
        0.0
    } else {
        indicator
    }
}
