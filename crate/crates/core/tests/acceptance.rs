//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines reach stdout in order.

use std::sync::Arc;
use std::time::{Duration, Instant};

use killingflow::barriers::{
    c0_height_cap, curvature_bound, height_bounds, interior_gradient_bound, make_sc_barrier, mu_of_t, verify_supersolution,
    HalfplaneGeodesic,
};
use killingflow::cmc::{residual_cmc, solve_vr, solve_vr_on};
use killingflow::exhaustion::{build_ladder, quarter_radius, radial_extension, run_exhaustion};
use killingflow::flow::identities::residual_identities;
use killingflow::flow::stepper::BoundaryData;
use killingflow::flow::{
    discretize_q, q_pointwise, radial_q, radial_solve, second_fundamental_form, solve_ball, BallProblem, Grid, StepControl,
};
use killingflow::{make_model, Error, ModelGeometry, ProfileSpec, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn euclidean(n: usize) -> ModelGeometry {
    make_model(ProfileSpec::Euclidean, ProfileSpec::Euclidean, ProfileSpec::constant(1.0), n, 1e-10).unwrap()
}

fn hyperbolic(rho: ProfileSpec) -> ModelGeometry {
    make_model(ProfileSpec::hyperbolic(1.0), ProfileSpec::hyperbolic(1.0), rho, 2, 1e-10).unwrap()
}

fn models() -> [(&'static str, ModelGeometry); 2] {
    [("euclidean", euclidean(2)), ("hyperbolic", hyperbolic(ProfileSpec::cosh(1.0)))]
}

/// `(pass, detail)`.
type Outcome = Result<(bool, String)>;

fn hemisphere() -> Outcome {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for n in [2, 3] {
        let model = euclidean(n);
        for radius in [0.5, 1.0, 2.0] {
            let start = Instant::now();
            let prof = solve_vr(&model, radius, 256)?;
            slowest = slowest.max(start.elapsed());
            for (r, v) in prof.grid.iter().zip(&prof.v).filter(|(r, _)| **r <= radius - 1e-3) {
                worst = worst.max((v - (radius * radius - r * r).sqrt()).abs());
            }
        }
    }
    let pass = worst <= 1e-7 && slowest < Duration::from_secs(1);
    Ok((
        pass,
        format!("max error {worst:.2e}, slowest profile {:.3} s", slowest.as_secs_f64()),
    ))
}

fn cmc_constancy() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, model) in models() {
        let coarse = residual_cmc(&model, &solve_vr(&model, 1.0, 256)?);
        let fine = residual_cmc(&model, &solve_vr(&model, 1.0, 512)?);
        // Roundoff-level residuals have no observable order.
        let order = (coarse / fine).log2();
        let ok = coarse <= 1e-3 && (coarse < 1e-10 || order >= 1.8);
        pass &= ok;
        detail.push(format!("{name}: residual {coarse:.2e}, order {order:.2}"));
    }
    Ok((pass, detail.join("; ")))
}

fn supersolution_law() -> Outcome {
    let e = euclidean(2);
    let h = hyperbolic(ProfileSpec::cosh(1.0));
    let mut law = 0.0f64;
    for r0 in [0.5, 1.0, 2.0] {
        for t in [0.01, 0.1, 0.5, 1.0, 3.0] {
            law = law.max((mu_of_t(&e, r0, t)? - (r0 * r0 + 4.0 * t).sqrt()).abs());
            law = law.max((mu_of_t(&h, r0, t)? - (r0.cosh() * (2.0 * t).exp()).acosh()).abs());
        }
    }
    let mut min = f64::INFINITY;
    for model in [&e, &h] {
        let t_grid: Vec<f64> = (0..=64).map(|j| 0.5 * j as f64 / 64.0).collect();
        let r_grid: Vec<f64> = (0..=256).map(|i| i as f64 / 256.0).collect();
        min = min.min(verify_supersolution(model, 1.0, &t_grid, &r_grid, &radial_q)?.min_residual);
    }
    Ok((
        law <= 1e-8 && min >= -1e-3,
        format!("max |R(t) - closed form| {law:.2e}, min residual {min:.2e}"),
    ))
}

/// `max |Q[v_R] - W nH(R)|` over `B_{0.7R}` on a polar grid of `B_{0.8R}`.
fn operator_error(model: &ModelGeometry, radius: f64, nr: usize) -> Result<f64> {
    let grid = Grid::new(0.8 * radius, nr, nr)?;
    let rs: Vec<f64> = (0..=nr).map(|i| grid.r(i)).chain([radius]).collect();
    let prof = solve_vr_on(model, radius, rs)?;
    let u = grid.sample(|r, _| prof.eval(r));
    let q = discretize_q(model, &grid, &u)?;
    let nh = model.n as f64 * model.mean_curvature(radius)?;
    let mut err = 0.0f64;
    for (k, v) in q.iter().enumerate() {
        let i = grid.position(k).0;
        if v.is_finite() && grid.r(i) <= 0.7 * radius + 1e-12 {
            let rho = model.rho.value(grid.r(i));
            let w = (1.0 / (rho * rho) + prof.vp[i] * prof.vp[i]).sqrt();
            err = err.max((v - w * nh).abs());
        }
    }
    Ok(err)
}

fn operator() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, model) in models() {
        let errs = [16, 32, 64].map(|nr| operator_error(&model, 1.0, nr));
        let errs = [
            errs[0].as_ref().map_err(clone_err)?,
            errs[1].as_ref().map_err(clone_err)?,
            errs[2].as_ref().map_err(clone_err)?,
        ];
        let orders = [(errs[0] / errs[1]).log2(), (errs[1] / errs[2]).log2()];
        pass &= orders.iter().all(|&p| p >= 1.8);
        detail.push(format!(
            "{name}: errors {:.2e} {:.2e} {:.2e}, orders {:.2} {:.2}",
            errs[0], errs[1], errs[2], orders[0], orders[1]
        ));
    }
    Ok((pass, detail.join("; ")))
}

fn clone_err(e: &Error) -> Error {
    Error::Parameter(e.to_string())
}

fn height_conformance() -> Outcome {
    let mut margin = f64::INFINITY;
    let mut runs = 0;
    for (_, model) in models() {
        let lambda0 = quarter_radius(&model, 1.0)?;
        let t_final = 0.5 * model.zeta(lambda0);
        for (a, b) in [(0.0, 0.5), (0.3, -0.4), (-0.2, 1.0)] {
            let profile = Arc::new(move |r: f64| a + b * (1.0 - r * r) * (1.0 + r));
            let problem = BallProblem::radial(&model, 1.0, Some(t_final), profile.clone())?;
            let traj = radial_solve(&problem, 64, &StepControl::default(), 4)?;
            let grid = traj.grid;
            let first = &traj.snapshots[0].u;
            let sup = first.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let inf = first.iter().cloned().fold(f64::INFINITY, f64::min);
            let bounds = height_bounds(&model, 1.0, t_final, sup, inf)?;
            let rs: Vec<f64> = (0..=grid.nr).map(|i| grid.r(i)).collect();
            let (lower, upper) = bounds.on_grid(&rs)?;
            for state in &traj.snapshots {
                for (k, u) in state.u.iter().enumerate() {
                    let i = grid.position(k).0;
                    margin = margin.min(upper[i] - u).min(u - lower[i]);
                }
            }
            runs += 1;
        }
    }
    Ok((
        margin >= -1e-3,
        format!("{runs} radial runs to T = zeta(Lambda0)/2, min margin {margin:.3e}"),
    ))
}

fn comparison() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = f64::NEG_INFINITY;
    let models = models();
    let grid = Grid::new(1.0, 16, 16)?;
    for pair in 0..20 {
        let model = &models[pair % 2].1;
        let t_final = 0.25 * model.zeta(1.0);
        let (a, b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..0.5));
        let k = rng.gen_range(1..4) as f64;
        let base = move |r: f64, t: f64| a * r * r + b * r * (k * t).cos();
        let bump = rng.gen_range(0.0..0.5);
        let lo = BallProblem::new(model, 1.0, Some(t_final), Arc::new(move |t| base(1.0, t)), Arc::new(base))?;
        let hi = BallProblem::new(
            model,
            1.0,
            Some(t_final),
            Arc::new(move |t| base(1.0, t) + c),
            Arc::new(move |r, t| base(r, t) + c + bump * (1.0 - r * r)),
        )?;
        let control = StepControl::default();
        let tl = solve_ball(&lo, &grid, &control, 1)?;
        let th = solve_ball(&hi, &grid, &control, 1)?;
        for (sl, sh) in tl.snapshots.iter().zip(&th.snapshots) {
            for (x, y) in sl.u.iter().zip(&sh.u) {
                worst = worst.max(x - y);
            }
        }
    }
    Ok((worst <= 1e-9, format!("20 ordered pairs, max (u_low - u_high) = {worst:.3e}")))
}

fn second_fundamental_form_check() -> Outcome {
    let model = euclidean(2);
    let grid = Grid::new(0.9, 256, 64)?;
    let u = grid.sample(|r, _| (1.0 - r * r).sqrt());
    let (a2, _) = second_fundamental_form(&model, &grid, &u)?;
    let err = a2.iter().filter(|v| v.is_finite()).map(|v| (v - 2.0).abs()).fold(0.0, f64::max);
    let mut zero_exact = true;
    for (name, model) in models() {
        let (z, _) = second_fundamental_form(&model, &grid, &vec![0.0; grid.len()])?;
        // |A|^2 is undefined on the boundary ring.
        let ok = z
            .iter()
            .enumerate()
            .all(|(k, v)| if grid.is_boundary(k) { v.is_nan() } else { *v == 0.0 });
        if !ok {
            eprintln!("{name}: |A|^2 of u = 0 is not exactly 0");
        }
        zero_exact &= ok;
    }
    Ok((
        err <= 1e-3 && zero_exact,
        format!("max ||A|^2 - 2| = {err:.2e} on B_0.9, u = 0 exact: {zero_exact}"),
    ))
}

fn identities() -> Outcome {
    let model = euclidean(2);
    let mut reports = Vec::new();
    for nr in [64, 128, 256] {
        let p = BallProblem::new(
            &model,
            1.0,
            Some(0.05),
            Arc::new(|_| 0.0),
            Arc::new(|r, _| 0.3 * (1.0 - r * r).powi(3)),
        )?;
        let control = StepControl {
            dt_max: 2.0 / (nr * nr) as f64,
            tol_lin: 1e-14,
            ..Default::default()
        };
        reports.push(residual_identities(&model, &radial_solve(&p, nr, &control, 1)?)?);
    }
    let mut order = f64::INFINITY;
    for w in reports.windows(2) {
        order = order.min((w[0].evol_w / w[1].evol_w).log2()).min((w[0].par_s / w[1].par_s).log2());
    }
    let last = &reports[2];
    let slack = last.par_zeta_slack;
    Ok((
        order >= 1.0 && slack >= -1e-3,
        format!(
            "min order {order:.2}, evolW {:.2e}, par-s {:.2e}, zeta slack {slack:.2e}",
            last.evol_w, last.par_s
        ),
    ))
}

fn constants() -> Outcome {
    let model = euclidean(2);
    let cap = c0_height_cap(&model, 1.0, 3)?;
    let grad = interior_gradient_bound(&model, 1.0, 1.0, 1.0 - 1e-8, 17.0)?;
    let curv = curvature_bound(0.1, 2.0, 1.0, 1.0, 0.5, 1.0, 1.0)?;
    let target = 12.6491 * 6f64.sqrt();
    let pass = (cap - 3.0).abs() <= 1e-12 && (grad.mu - 0.783).abs() <= 1e-3 && (curv - target).abs() <= 1e-3;
    Ok((
        pass,
        format!(
            "cap {cap:.15}, delta {:.4}, delta' {:.4}, mu {:.5}, curvature {curv:.5} (target {target:.5})",
            grad.delta, grad.delta_prime, grad.mu
        ),
    ))
}

/// Criteria 10 and 12 share one run per model.
fn exhaustion() -> Result<((bool, String), (bool, String))> {
    let mut conv = (true, Vec::new());
    let mut one_sided = (true, Vec::new());
    for (name, model) in models() {
        let mut plan = build_ladder(&model, 1.0, 4)?;
        plan.early_stop = false;
        plan.parallel = true;
        let phi: BoundaryData = Arc::new(|t: f64| 0.5 * t.cos());
        let report = run_exhaustion(&model, &plan, phi.clone(), radial_extension(phi))?;
        let d = &report.d;
        let decreasing = d.windows(2).all(|w| w[1] < w[0]);
        let ok = d.len() == 3 && decreasing && d[2] < 1e-3 && report.verdict;
        conv.0 &= ok;
        conv.1.push(format!(
            "{name}: ladder {:?}, d_k {:?}",
            plan.ladder,
            d.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>()
        ));

        let max_grad = report.rungs.iter().map(|r| r.max_grad).fold(0.0, f64::max);
        let max_a = report.rungs.iter().map(|r| r.max_a).fold(0.0, f64::max);
        let ok = max_grad.ln() <= report.gradient_log_bound
            && max_a <= report.curvature_bound
            && report
                .rungs
                .iter()
                .all(|r| r.margins.height >= 0.0 && r.margins.log_gradient.is_none_or(|m| m >= 0.0) && r.margins.curvature >= 0.0);
        one_sided.0 &= ok;
        one_sided.1.push(format!(
            "{name}: max|grad u| {max_grad:.3} vs exp({:.1}), max|A| {max_a:.3} vs {:.1}",
            report.gradient_log_bound, report.curvature_bound
        ));
    }
    Ok(((conv.0, conv.1.join("; ")), (one_sided.0, one_sided.1.join("; "))))
}

fn barrier_at_infinity() -> Outcome {
    let model = hyperbolic(ProfileSpec::cosh(1.0));
    let geodesic = HalfplaneGeodesic { delta: 1.0, theta: 0.3 };
    let b = make_sc_barrier(&model, geodesic, 1.0, 2.0)?;
    let eta = |r: f64, th: f64| b.eta(r, th);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut max_q = f64::NEG_INFINITY;
    for _ in 0..200 {
        let (r, th) = geodesic.point(1.0, rng.gen_range(b.d0 + 0.05..b.d0 + 4.0), rng.gen_range(-3.0..3.0));
        max_q = max_q.max(q_pointwise(&model, &eta, r, th, 1e-3));
    }
    let flat = make_sc_barrier(&hyperbolic(ProfileSpec::constant(1.0)), geodesic, 1.0, 2.0);
    let degenerate = matches!(flat, Err(Error::Geometry(_)));
    Ok((
        max_q <= 1e-3 && degenerate,
        format!("alpha {:.4}, max Q[eta] {max_q:.3e}, rho = 1 rejected: {degenerate}", b.alpha),
    ))
}

struct Line {
    id: u32,
    name: &'static str,
    limit: Duration,
}

fn report(line: &Line, outcome: Outcome, elapsed: Duration) -> bool {
    let (pass, detail) = match outcome {
        Ok((pass, detail)) => (pass && elapsed < line.limit, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "{} {:>2} {:<28} {:>8.2} s (limit {:>4} s)  {detail}",
        if pass { "PASS" } else { "FAIL" },
        line.id,
        line.name,
        elapsed.as_secs_f64(),
        line.limit.as_secs()
    );
    pass
}

fn main() {
    let criteria: [(Line, fn() -> Outcome); 10] = [
        (
            Line {
                id: 1,
                name: "hemisphere oracle",
                limit: Duration::from_secs(6),
            },
            hemisphere,
        ),
        (
            Line {
                id: 2,
                name: "cmc constancy",
                limit: Duration::from_secs(5),
            },
            cmc_constancy,
        ),
        (
            Line {
                id: 3,
                name: "supersolution law",
                limit: Duration::from_secs(10),
            },
            supersolution_law,
        ),
        (
            Line {
                id: 4,
                name: "operator correctness",
                limit: Duration::from_secs(30),
            },
            operator,
        ),
        (
            Line {
                id: 5,
                name: "height conformance",
                limit: Duration::from_secs(60),
            },
            height_conformance,
        ),
        (
            Line {
                id: 6,
                name: "comparison principle",
                limit: Duration::from_secs(120),
            },
            comparison,
        ),
        (
            Line {
                id: 7,
                name: "second fundamental form",
                limit: Duration::from_secs(5),
            },
            second_fundamental_form_check,
        ),
        (
            Line {
                id: 8,
                name: "evolution identities",
                limit: Duration::from_secs(120),
            },
            identities,
        ),
        (
            Line {
                id: 9,
                name: "estimate constants",
                limit: Duration::from_secs(1),
            },
            constants,
        ),
        (
            Line {
                id: 11,
                name: "barrier at infinity",
                limit: Duration::from_secs(10),
            },
            barrier_at_infinity,
        ),
    ];
    let mut all = true;
    for (line, run) in &criteria[..9] {
        let start = Instant::now();
        let outcome = run();
        all &= report(line, outcome, start.elapsed());
    }

    let start = Instant::now();
    let shared = exhaustion();
    let elapsed = start.elapsed();
    let (conv, one_sided) = match shared {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => (Err(clone_err(&e)), Err(e)),
    };
    all &= report(
        &Line {
            id: 10,
            name: "exhaustion convergence",
            limit: Duration::from_secs(600),
        },
        conv,
        elapsed,
    );

    let (line, run) = &criteria[9];
    let start = Instant::now();
    let outcome = run();
    all &= report(line, outcome, start.elapsed());

    all &= report(
        &Line {
            id: 12,
            name: "one-sided estimate checks",
            limit: Duration::from_secs(600),
        },
        one_sided,
        elapsed,
    );

    if !all {
        std::process::exit(1);
    }
}
