//! Interior gradient and curvature estimate constants.

use killingflow::barriers::{curvature_bound, curvature_constants, interior_gradient_bound, interior_gradient_bound_tail};
use killingflow::{make_model, ProfileSpec};

fn main() -> killingflow::Result<()> {
    let euclid = make_model(ProfileSpec::Euclidean, ProfileSpec::Euclidean, ProfileSpec::constant(1.0), 2, 1e-10)?;
    let g = interior_gradient_bound(&euclid, 1.0, 1.0, 1.0 - 1e-8, 17.0)?;
    println!(
        "rho = 1, beta = 1 - 1e-8, k = 17: delta = {:.4}, delta' = {:.4}, mu = {:.5}",
        g.delta, g.delta_prime, g.mu
    );
    println!("  gradient bound = exp({:.2})", g.log_bound);

    let hyper = make_model(
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::cosh(1.0),
        2,
        1e-10,
    )?;
    let k: f64 = 17.0;
    let rho_max = 1f64.cosh();
    // beta close enough to 1 that rho^2 e^k / (1 + rho^2 e^k) < beta.
    let g = interior_gradient_bound_tail(&hyper, 1.0, 1.0, 0.5 / (1.0 + rho_max * rho_max * k.exp()), k)?;
    println!(
        "rho = cosh: k_min = {:.3}, mu = {:.5}, bound = exp({:.2})",
        g.k_min, g.mu, g.log_bound
    );

    println!(
        "curvature bound example: {:.6}",
        curvature_bound(0.1, 2.0, 1.0, 1.0, 0.5, 1.0, 1.0)?
    );
    let c = curvature_constants(&hyper, 2.0, 0.5, 1.5, 0.0, 0.0)?;
    println!("hyperbolic B_2 x [0, 0.5], sup W^2 = 1.5: {c:?}");
    Ok(())
}
