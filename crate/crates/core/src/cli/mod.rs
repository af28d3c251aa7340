//! Command-line harness: config loading, expression data and subcommands.
//!
//! Exit codes: 0 on success, 1 when a check or verdict fails (or a solve
//! breaks down), 2 on usage and configuration errors.

pub mod config;
pub mod expr;
pub mod svg;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::barriers::{
    c0_height_cap, curvature_constants, height_bounds, interior_gradient_bound_tail, make_boundary_barrier, make_sc_barrier, mu_of_t,
    verify_supersolution, CurvatureConstants, HalfplaneGeodesic, InteriorGradientBound,
};
use crate::cmc::solve_vr;
use crate::error::{Error, Result};
use crate::exhaustion::{radial_extension, run_exhaustion};
use crate::flow::operator::{q_pointwise, radial_q};
use crate::flow::snapshot::{model_hash, write_run};
use crate::flow::stepper::{solve_ball, BallProblem};
use crate::geometry::{sample_ladder, ModelGeometry, ModelSpec, ValidationRecord};
use config::{load_config, ModelKind, RunConfig, CHECKS};

#[derive(Debug, Parser)]
#[command(name = "killingflow", version, about = "Mean curvature flow of Killing graphs in warped products")]
struct Cli {
    /// Report destination (a directory for `flow` snapshots); stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write an SVG picture to this path.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// TOML run configuration; flags below override its model section.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Warping function: `one`, `cosh` or a CSV table path.
    #[arg(long)]
    rho: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Model data, validation record and radial quantities.
    ModelInfo {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
    },
    /// Radial CMC graph v_R as `r,v,vp` CSV.
    Cmc {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Barrier constants and their residual checks.
    Barrier {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        /// Final time; `zeta(l0 r0) / 2` if absent.
        #[arg(long = "T")]
        t_final: Option<f64>,
        #[arg(long, default_value_t = 3)]
        l0: u32,
        /// Oscillation bound `M` for the gradient estimate.
        #[arg(long = "M", default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 17.0)]
        k: f64,
        /// `1 - beta`; defaults to half the largest admissible value.
        #[arg(long)]
        one_minus_beta: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        c_sim: f64,
        #[arg(long, default_value_t = 0.0)]
        c_sim_tilde: f64,
    },
    /// Solve one ball problem from a config.
    Flow {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the exhaustion ladder and report d_k.
    Exhaust {
        #[command(flatten)]
        model: ModelArgs,
        /// Boundary data in `theta`; overrides the config.
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        rungs: Option<usize>,
        #[arg(long)]
        parallel: bool,
        /// Run every rung even after d_k drops below tol.
        #[arg(long)]
        no_early_stop: bool,
    },
    /// Quick self-checks against closed forms and invariants.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run every check.
        #[arg(long)]
        all: bool,
        /// Checks to run (repeatable); the config's list if absent.
        #[arg(long = "check", value_parser = clap::builder::PossibleValuesParser::new(CHECKS))]
        checks: Vec<String>,
    },
}

/// Runs the harness and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    match dispatch(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Schema { .. }
        | Error::Syntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::EvalDomain { .. }
        | Error::Io(_)
        | Error::TableFormat(_)
        | Error::Csv(_)
        | Error::Parameter(_)
        | Error::Validation { .. } => 2,
        _ => 1,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("KILLINGFLOW_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| Error::Schema {
        key: "KILLINGFLOW_THREADS".into(),
        constraint: format!("must be a positive integer, got {value:?}"),
    })?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn write_svg(path: Option<&Path>, doc: impl FnOnce() -> String) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, doc())?;
    }
    Ok(())
}

impl ModelArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(kind) = self.model {
            cfg.model.kind = kind;
        }
        if let Some(n) = self.n {
            cfg.model.n = n;
            if n != 2 && self.config.is_none() {
                cfg.grid.ntheta = 1;
            }
        }
        if let Some(kappa) = self.kappa {
            cfg.model.kappa = kappa;
        }
        if let Some(rho) = &self.rho {
            cfg.model.rho = Some(rho.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let out = cli.out.as_deref();
    let svg = cli.svg.as_deref();
    match &cli.command {
        Command::ModelInfo { model, radius } => {
            let cfg = model.config()?;
            emit_json(out, &model_info(&cfg.model()?, *radius)?)?;
            Ok(true)
        }
        Command::Cmc { model, radius, grid } => {
            let m = model.config()?.model()?;
            let prof = solve_vr(&m, *radius, *grid)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["r", "v", "vp"])?;
            for ((r, v), vp) in prof.grid.iter().zip(&prof.v).zip(&prof.vp) {
                w.write_record([r.to_string(), v.to_string(), vp.to_string()])?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            emit(out, &String::from_utf8(bytes).expect("csv output is utf-8"))?;
            write_svg(svg, || svg::curves(&[("v_R", &prof.grid, &prof.v)], &format!("v_R, R = {radius}")))?;
            Ok(true)
        }
        Command::Barrier {
            model,
            r0,
            t_final,
            l0,
            m,
            k,
            one_minus_beta,
            c_sim,
            c_sim_tilde,
        } => {
            let geo = model.config()?.model()?;
            let report = barrier_report(&geo, *r0, *t_final, *l0, *m, *k, *one_minus_beta, *c_sim, *c_sim_tilde)?;
            emit_json(out, &report)?;
            Ok(report.pass)
        }
        Command::Flow { config } => {
            let cfg = load_config(config)?;
            flow(&cfg, out, svg)
        }
        Command::Exhaust {
            model,
            phi,
            rungs,
            parallel,
            no_early_stop,
        } => {
            let mut cfg = model.config()?;
            if let Some(phi) = phi {
                cfg.problem.phi = phi.clone();
            }
            if let Some(rungs) = rungs {
                cfg.exhaust.rungs = *rungs;
            }
            cfg.exhaust.parallel |= *parallel;
            cfg.exhaust.early_stop &= !*no_early_stop;
            cfg.validate()?;
            let geo = cfg.model()?;
            let plan = cfg.exhaustion_plan(&geo)?;
            let (phi, _) = cfg.data()?;
            let report = run_exhaustion(&geo, &plan, phi.clone(), radial_extension(phi))?;
            emit_json(out, &report)?;
            if svg.is_some() {
                let radii: Vec<f64> = report.rungs.iter().take(report.d.len()).map(|r| r.radius).collect();
                write_svg(svg, || svg::curves(&[("d_k", &radii, &report.d)], "exhaustion differences"))?;
            }
            Ok(report.verdict)
        }
        Command::Verify { config, all, checks } => {
            let cfg = match config {
                Some(path) => load_config(path)?,
                None => RunConfig::default(),
            };
            let names: Vec<String> = if *all {
                CHECKS.iter().map(|s| s.to_string()).collect()
            } else if !checks.is_empty() {
                checks.clone()
            } else {
                cfg.verify.checks.clone()
            };
            let report = verify::run_checks(&cfg, &names, cli.seed)?;
            emit_json(out, &report)?;
            Ok(report.pass)
        }
    }
}

#[derive(Serialize)]
struct RadialSample {
    r: f64,
    xi: f64,
    rho: f64,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "V")]
    v: f64,
    zeta: f64,
    #[serde(rename = "H")]
    h: Option<f64>,
    #[serde(rename = "H_cyl")]
    h_cyl: Option<f64>,
}

#[derive(Serialize)]
struct ModelInfo {
    spec: ModelSpec,
    model_hash: String,
    validation: ValidationRecord,
    radius: f64,
    /// Lower bounds `(L, L1)` on the Bakry-Emery and plain Ricci tensors over `B_R`.
    ricci_lower: (f64, f64),
    samples: Vec<RadialSample>,
}

fn model_info(model: &ModelGeometry, radius: f64) -> Result<ModelInfo> {
    if !(radius > 0.0) {
        return Err(Error::Parameter(format!("R must be positive, got {radius}")));
    }
    let samples = (0..=8)
        .map(|i| {
            let r = radius * i as f64 / 8.0;
            RadialSample {
                r,
                xi: model.xi.value(r),
                rho: model.rho.value(r),
                a: model.a(r),
                v: model.volume(r),
                zeta: model.zeta(r),
                h: model.mean_curvature(r).ok(),
                h_cyl: model.cylinder_curvature(r).ok(),
            }
        })
        .collect();
    Ok(ModelInfo {
        spec: model.spec(),
        model_hash: model_hash(&model.spec())?,
        validation: model.validation.clone(),
        radius,
        ricci_lower: model.lower_ricci_bounds(radius),
        samples,
    })
}

#[derive(Serialize)]
pub struct ResidualCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Serialize)]
struct BarrierConstants {
    r0: f64,
    t_final: f64,
    final_radius: f64,
    height_top: f64,
    height_cap: f64,
    l0: u32,
    gradient: Option<InteriorGradientBound>,
    gradient_error: Option<String>,
    curvature: CurvatureConstants,
    sc_barrier: Option<crate::barriers::ScBarrier>,
}

#[derive(Serialize)]
struct BarrierReport {
    constants: BarrierConstants,
    residual_checks: Vec<ResidualCheck>,
    pass: bool,
}

#[allow(clippy::too_many_arguments)]
fn barrier_report(
    model: &ModelGeometry,
    r0: f64,
    t_final: Option<f64>,
    l0: u32,
    m: f64,
    k: f64,
    one_minus_beta: Option<f64>,
    c_sim: f64,
    c_sim_tilde: f64,
) -> Result<BarrierReport> {
    let t_final = t_final.unwrap_or(0.5 * model.zeta(l0 as f64 * r0));
    let bounds = height_bounds(model, r0, t_final, 0.0, 0.0)?;
    let mut checks = Vec::new();

    let t_grid: Vec<f64> = (0..=64).map(|j| t_final * j as f64 / 64.0).collect();
    let r_grid: Vec<f64> = (0..=256).map(|i| r0 * i as f64 / 256.0).collect();
    let sup = verify_supersolution(model, r0, &t_grid, &r_grid, &radial_q)?;
    checks.push(ResidualCheck {
        name: "supersolution_min_residual".into(),
        value: sup.min_residual,
        threshold: -1e-3,
        pass: sup.min_residual >= -1e-3,
    });

    let barrier = make_boundary_barrier(1.0, 0.5, Arc::new(|_, _| 0.0))?;
    let identity = (0..100)
        .map(|i| {
            let d = 0.5 * i as f64 / 99.0;
            (barrier.h_second(d) + barrier.l * barrier.h_prime(d).powi(2)).abs()
        })
        .fold(0.0, f64::max);
    checks.push(ResidualCheck {
        name: "boundary_barrier_identity".into(),
        value: identity,
        threshold: 1e-12,
        pass: identity <= 1e-12,
    });

    let rho_max = sample_ladder(0.0, r0, 1024)
        .into_iter()
        .map(|r| model.rho.value(r))
        .fold(0.0, f64::max);
    let omb = one_minus_beta.unwrap_or(0.5 / (1.0 + rho_max * rho_max * k.exp()));
    let (gradient, gradient_error) = match interior_gradient_bound_tail(model, r0, m, omb, k) {
        Ok(g) => (Some(g), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let curvature = curvature_constants(model, r0, t_final, 1.0, c_sim, c_sim_tilde)?;

    let sc_barrier = match make_sc_barrier(model, HalfplaneGeodesic { delta: 1.0, theta: 0.0 }, 1.0, 2.0) {
        Ok(b) => {
            let eta = |r: f64, th: f64| b.eta(r, th);
            let mut worst = f64::NEG_INFINITY;
            for i in 0..20 {
                for j in 0..10 {
                    let d = b.d0 + 0.1 + 3.9 * i as f64 / 19.0;
                    let a = -3.0 + 6.0 * j as f64 / 9.0;
                    let (r, th) = b.geodesic.point(b.kappa, d, a);
                    worst = worst.max(q_pointwise(model, &eta, r, th, 1e-3));
                }
            }
            checks.push(ResidualCheck {
                name: "sc_barrier_max_q".into(),
                value: worst,
                threshold: 1e-3,
                pass: worst <= 1e-3,
            });
            Some(b)
        }
        Err(_) => None,
    };

    Ok(BarrierReport {
        pass: checks.iter().all(|c| c.pass),
        constants: BarrierConstants {
            r0,
            t_final,
            final_radius: mu_of_t(model, r0, t_final)?,
            height_top: bounds.top,
            height_cap: c0_height_cap(model, r0, l0)?,
            l0,
            gradient,
            gradient_error,
            curvature,
            sc_barrier,
        },
        residual_checks: checks,
    })
}

#[derive(Serialize)]
struct FlowReport {
    model_hash: String,
    grid: crate::flow::grid::Grid,
    t_final: f64,
    steps: usize,
    snapshots: usize,
    sup_u: f64,
    inf_u: f64,
    max_grad: f64,
    #[serde(rename = "max_A")]
    max_a: f64,
    manifest: Option<String>,
}

fn flow(cfg: &RunConfig, out: Option<&Path>, svg: Option<&Path>) -> Result<bool> {
    let model = cfg.model()?;
    let (phi, u0) = cfg.data()?;
    let problem = BallProblem::new(&model, cfg.grid.radius, cfg.problem.t_final, phi, u0)?;
    let grid = cfg.grid()?;
    let traj = solve_ball(&problem, &grid, &cfg.control, cfg.problem.snapshot_every)?;
    let last = traj.last();
    let manifest = match out {
        Some(dir) => {
            write_run(dir, &model, &cfg.control, &traj)?;
            Some(dir.join("manifest.json").display().to_string())
        }
        None => None,
    };
    let report = FlowReport {
        model_hash: model_hash(&model.spec())?,
        grid,
        t_final: last.t,
        steps: last.step_count,
        snapshots: traj.snapshots.len(),
        sup_u: last.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        inf_u: last.u.iter().cloned().fold(f64::INFINITY, f64::min),
        max_grad: traj.max_grad.iter().map(|p| p.1).fold(0.0, f64::max),
        max_a: traj.max_a.iter().map(|p| p.1).fold(0.0, f64::max),
        manifest,
    };
    emit_json(None, &report)?;
    write_svg(svg, || svg::heatmap(&grid, &last.u, &format!("u at t = {:.4}", last.t)))?;
    Ok(true)
}
