//! The expanding CMC supersolution `u_+` and the height bounds it gives.

use killingflow::barriers::{c0_height_cap, height_bounds, mu_of_t, verify_supersolution};
use killingflow::flow::radial_q;
use killingflow::{make_model, ProfileSpec};

fn main() -> killingflow::Result<()> {
    let models = [
        (
            "euclidean",
            make_model(ProfileSpec::Euclidean, ProfileSpec::Euclidean, ProfileSpec::constant(1.0), 2, 1e-10)?,
        ),
        (
            "hyperbolic",
            make_model(
                ProfileSpec::hyperbolic(1.0),
                ProfileSpec::hyperbolic(1.0),
                ProfileSpec::cosh(1.0),
                2,
                1e-10,
            )?,
        ),
    ];
    for (name, m) in &models {
        println!("{name}:");
        for t in [0.1, 0.5, 1.0] {
            println!("  R({t}) = {:.10}", mu_of_t(m, 1.0, t)?);
        }
        let t_grid: Vec<f64> = (0..=64).map(|j| 0.5 * j as f64 / 64.0).collect();
        let r_grid: Vec<f64> = (0..=256).map(|i| i as f64 / 256.0).collect();
        let s = verify_supersolution(m, 1.0, &t_grid, &r_grid, &radial_q)?;
        println!("  min (d_t u_+ + Q[u_+]) = {:.3e} over {} points", s.min_residual, s.points);
        let b = height_bounds(m, 1.0, 0.5, 0.5, -0.5)?;
        println!(
            "  data in [-0.5, 0.5], T = 0.5: {:.4} <= u(o, t) <= {:.4}",
            b.lower(0.0),
            b.upper(0.0)
        );
        println!("  height cap for r0 = 1, l0 = 3: {:.6}", c0_height_cap(m, 1.0, 3)?);
    }
    Ok(())
}
