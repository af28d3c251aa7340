//! Mean curvature flow of a Killing graph over a ball, with snapshots on disk
//! and a check of the comparison principle.

use std::sync::Arc;

use killingflow::cli::svg;
use killingflow::flow::snapshot::write_run;
use killingflow::flow::{second_fundamental_form, solve_ball, BallProblem, Grid, StepControl};
use killingflow::{make_model, ProfileSpec};

fn main() -> killingflow::Result<()> {
    let m = make_model(
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::cosh(1.0),
        2,
        1e-10,
    )?;
    let grid = Grid::new(1.5, 32, 32)?;
    let control = StepControl::default();
    let phi = Arc::new(|t: f64| 0.25 * (2.0 * t).cos());
    let low = BallProblem::new(
        &m,
        1.5,
        Some(0.3),
        phi.clone(),
        Arc::new(|r: f64, t: f64| 0.25 * (2.0 * t).cos() * (r / 1.5).powi(2)),
    )?;
    let high = BallProblem::new(
        &m,
        1.5,
        Some(0.3),
        phi,
        Arc::new(|r: f64, t: f64| 0.25 * (2.0 * t).cos() + 0.5 * (1.0 - (r / 1.5).powi(2))),
    )?;

    let traj = solve_ball(&low, &grid, &control, 10)?;
    let last = traj.last();
    println!(
        "t = {:.3} after {} steps; sup u = {:.5}",
        last.t,
        last.step_count,
        last.u.iter().cloned().fold(f64::MIN, f64::max)
    );
    for ((t, g), (_, a)) in traj.max_grad.iter().zip(&traj.max_a) {
        println!("  t = {t:.3}: max |grad u| = {g:.4}, max |A| = {a:.4}");
    }
    let (a2, _) = second_fundamental_form(&m, &grid, &last.u)?;
    println!("|A|^2 at the pole: {:.5}", a2[0]);

    let upper = solve_ball(&high, &grid, &control, 10)?;
    let gap = traj
        .snapshots
        .iter()
        .zip(&upper.snapshots)
        .flat_map(|(a, b)| a.u.iter().zip(&b.u).map(|(x, y)| y - x))
        .fold(f64::INFINITY, f64::min);
    println!("ordered data stay ordered: min (u_high - u_low) = {gap:.4e} (equal on the boundary)");

    let dir = std::env::temp_dir().join("killingflow-flow-ball");
    let manifest = write_run(&dir, &m, &control, &traj)?;
    std::fs::write(dir.join("u.svg"), svg::heatmap(&grid, &last.u, "u at T"))?;
    println!("wrote {} snapshots and u.svg to {}", manifest.snapshots.len(), dir.display());
    Ok(())
}
