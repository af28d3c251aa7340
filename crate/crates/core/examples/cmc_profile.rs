//! Constant mean curvature graphs `v_R` over `B_R`, checked against the hemisphere.

use killingflow::cli::svg;
use killingflow::cmc::{residual_cmc, solve_vr};
use killingflow::{make_model, ProfileSpec};

fn main() -> killingflow::Result<()> {
    let euclid = make_model(ProfileSpec::Euclidean, ProfileSpec::Euclidean, ProfileSpec::constant(1.0), 2, 1e-10)?;
    let prof = solve_vr(&euclid, 1.0, 256)?;
    let err = prof
        .grid
        .iter()
        .zip(&prof.v)
        .filter(|(r, _)| **r <= 1.0 - 1e-3)
        .map(|(r, v)| (v - (1.0 - r * r).sqrt()).abs())
        .fold(0.0, f64::max);
    println!(
        "euclidean R = 1: v(0) = {:.12}, v(0.6) = {:.12}, max |v - hemisphere| = {err:.2e}",
        prof.eval(0.0),
        prof.eval(0.6)
    );

    let hyper = make_model(
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::cosh(1.0),
        2,
        1e-10,
    )?;
    let mut curves = Vec::new();
    for radius in [0.5, 1.0, 2.0] {
        let p = solve_vr(&hyper, radius, 256)?;
        println!(
            "hyperbolic R = {radius}: v(0) = {:.6}, H = {:.6}, CMC residual {:.2e}",
            p.eval(0.0),
            hyper.mean_curvature(radius)?,
            residual_cmc(&hyper, &p)
        );
        curves.push((format!("R = {radius}"), p.grid, p.v));
    }
    if let Some(path) = std::env::args().nth(1) {
        let series: Vec<(&str, &[f64], &[f64])> = curves.iter().map(|(n, x, y)| (n.as_str(), x.as_slice(), y.as_slice())).collect();
        std::fs::write(&path, svg::curves(&series, "v_R, hyperbolic base, rho = cosh"))?;
        println!("wrote {path}");
    }
    Ok(())
}
