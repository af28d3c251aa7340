//! Warped-product model data: built-in profiles and a tabulated warping function.

use killingflow::{make_model, ProfileSpec, TableProfile};

fn main() -> killingflow::Result<()> {
    let euclid = make_model(ProfileSpec::Euclidean, ProfileSpec::Euclidean, ProfileSpec::constant(1.0), 3, 1e-10)?;
    let hyper = make_model(
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::cosh(1.0),
        2,
        1e-10,
    )?;

    // rho = cosh sampled on [0, 3]; validation stops at the last sample. Far out
    // rho'/rho = tanh and xi'/xi = coth agree to e^{-2r}, below what the
    // interpolated slope resolves.
    let samples: Vec<(f64, f64)> = (0..=96).map(|i| (i as f64 / 32.0, (i as f64 / 32.0).cosh())).collect();
    let tabulated = make_model(
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::Table(TableProfile::new(samples)?),
        2,
        1e-10,
    )?;

    for (name, m) in [
        ("euclidean n=3", &euclid),
        ("hyperbolic, rho=cosh", &hyper),
        ("hyperbolic, rho table", &tabulated),
    ] {
        let (l, l1) = m.lower_ricci_bounds(2.0);
        println!("{name}: Ricci lower bounds on B_2: L = {l:.4}, L1 = {l1:.4}");
        println!("  {:>5} {:>12} {:>12} {:>12} {:>12}", "r", "A", "V", "zeta", "H");
        for r in [0.5, 1.0, 1.5, 2.0] {
            println!(
                "  {r:>5} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                m.a(r),
                m.volume(r),
                m.zeta(r),
                m.mean_curvature(r)?
            );
        }
    }
    Ok(())
}
