//! Upper barrier at infinity over a geodesic halfplane of the hyperbolic plane.

use killingflow::barriers::{make_sc_barrier, HalfplaneGeodesic};
use killingflow::flow::q_pointwise;
use killingflow::{make_model, ProfileSpec};

fn main() -> killingflow::Result<()> {
    let m = make_model(
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::cosh(1.0),
        2,
        1e-10,
    )?;
    let geodesic = HalfplaneGeodesic { delta: 1.0, theta: 0.0 };
    let b = make_sc_barrier(&m, geodesic, 1.0, 2.0)?;
    println!("alpha = {:.6}, C1 = {:.6}", b.alpha, b.c1);
    let eta = |r: f64, th: f64| b.eta(r, th);
    println!("{:>6} {:>6} {:>10} {:>12} {:>12}", "d", "a", "r", "eta", "Q[eta]");
    for d in [2.5, 3.5, 5.0] {
        for a in [-2.0, 0.0, 2.0] {
            let (r, th) = geodesic.point(1.0, d, a);
            println!(
                "{d:>6} {a:>6} {r:>10.4} {:>12.4e} {:>12.4e}",
                eta(r, th),
                q_pointwise(&m, &eta, r, th, 1e-3)
            );
        }
    }
    let flat = make_model(
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::hyperbolic(1.0),
        ProfileSpec::constant(1.0),
        2,
        1e-10,
    )?;
    match make_sc_barrier(&flat, geodesic, 1.0, 2.0) {
        Ok(_) => println!("rho = 1 unexpectedly admits a barrier"),
        Err(e) => println!("rho = 1: {e}"),
    }
    Ok(())
}
