//! Mass growth `∫_{W_R} G(u) ~ R^s` for the planar layer and a constant.
//!
//! `cargo run --release --example liouville`

use wulff_lab::conditions::BFunction;
use wulff_lab::duality::shared;
use wulff_lab::norm::Euclidean;
use wulff_lab::pde::{energy_trace, liouville_mass_test, solve_dirichlet, Potential, ProblemSpec};

fn main() -> wulff_lab::Result<()> {
    let radii: Vec<f64> = (0..10).map(|k| 2.5 + 7.5 * k as f64 / 9.0).collect();
    for (name, trace) in [
        ("tanh(x/√2)", Box::new(|x: f64, _: f64| (x / 2f64.sqrt()).tanh()) as Box<dyn Fn(f64, f64) -> f64 + Send + Sync>),
        ("1", Box::new(|_, _| 1.0)),
    ] {
        let spec = ProblemSpec::new(
            shared(Euclidean::new(2)),
            BFunction::quadratic(),
            Potential::allen_cahn(),
            12.0,
            128,
            name,
            trace,
        )?;
        let sol = solve_dirichlet(&spec)?;
        let et = energy_trace(&spec, &sol.field, &radii, [0.0, 0.0])?;
        let rep = liouville_mass_test(&et, Some(&sol.field), 1e-6)?;
        println!(
            "u = {name:<11} slope {:>7.4}  flagged {}  oscillation {:.2e}  {:?}",
            rep.detail("slope").unwrap_or(f64::NAN),
            rep.detail("flag").unwrap_or(0.0) == 1.0,
            rep.detail("oscillation").unwrap_or(f64::NAN),
            rep.verdict
        );
    }
    Ok(())
}
