//! Four-rung exhaustion with boundary data `0.5 cos(theta)` in both built-in models.

use std::sync::Arc;
use std::time::Instant;

use killingflow::exhaustion::{build_ladder, radial_extension, run_exhaustion};
use killingflow::flow::stepper::BoundaryData;
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
    for (name, model) in &models {
        let start = Instant::now();
        let mut plan = build_ladder(model, 1.0, 4)?;
        plan.early_stop = false;
        let phi: BoundaryData = Arc::new(|t: f64| 0.5 * t.cos());
        let report = run_exhaustion(model, &plan, phi.clone(), radial_extension(phi))?;
        println!("{name}: ladder {:?}, T0 = {:.4}", plan.ladder, plan.t0);
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        println!("{name}: {:.1} s", start.elapsed().as_secs_f64());
    }
    Ok(())
}
