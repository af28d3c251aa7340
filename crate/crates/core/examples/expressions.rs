//! Boundary data expressions and run configuration files.

use killingflow::cli::config::parse_config;
use killingflow::cli::expr::parse_expression;

fn main() -> killingflow::Result<()> {
    for src in ["0.5*cos(2*theta)", "cosh(r)", "-r^2 + max(t, 0.1)", "sqrt(1 - r^2)*exp(-t)"] {
        let e = parse_expression(src)?;
        println!("{src:<24} -> {e:<44} at (r, theta, t) = (0.5, 0, 1): {}", e.eval(0.5, 0.0, 1.0)?);
    }
    for bad in ["cos(theta", "2 * phi", "sin(1, 2)"] {
        println!("{bad:<24} -> {}", parse_expression(bad).unwrap_err());
    }

    let cfg = parse_config(
        r#"
[model]
kind = "hyperbolic"
rho = "cosh"

[grid]
nr = 48
R = 2.0

[problem]
phi = "0.5*cos(theta)"
T = 0.5
"#,
    )?;
    println!("\nwith defaults filled:\n{}", cfg.to_toml());
    println!("ntheta = 3: {}", parse_config("[grid]\nntheta = 3\n").unwrap_err());
    Ok(())
}
