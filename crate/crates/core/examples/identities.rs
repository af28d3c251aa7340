//! Evolution identities for `W`, `s` and `zeta` under grid refinement.

use std::sync::Arc;

use killingflow::flow::identities::residual_identities;
use killingflow::flow::{radial_solve, BallProblem, StepControl};
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
        println!(
            "  {:>4} {:>11} {:>11} {:>12} {:>12}",
            "nr", "evol W", "par s", "zeta slack", "tangential"
        );
        for nr in [32, 64, 128] {
            let p = BallProblem::new(m, 1.0, Some(0.05), Arc::new(|_| 0.0), Arc::new(|r, _| 0.3 * (1.0 - r * r).powi(3)))?;
            let control = StepControl {
                dt_max: 2.0 / (nr * nr) as f64,
                tol_lin: 1e-14,
                ..Default::default()
            };
            let rep = residual_identities(m, &radial_solve(&p, nr, &control, 1)?)?;
            println!(
                "  {nr:>4} {:>11.3e} {:>11.3e} {:>12.3e} {:>12.3e}",
                rep.evol_w, rep.par_s, rep.par_zeta_slack, rep.par_zeta_slack_tangential
            );
        }
    }
    Ok(())
}
