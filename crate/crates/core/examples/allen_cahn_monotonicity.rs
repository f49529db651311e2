//! Solves Allen–Cahn with an ellipsoidal norm and prints the rescaled energy
//! `E(R)` over Wulff balls together with the pointwise bound `P ≤ G`.
//!
//! `cargo run --release --example allen_cahn_monotonicity [cells]`

use std::time::Instant;

use wulff_lab::conditions::BFunction;
use wulff_lab::duality::shared;
use wulff_lab::norm::EllipsoidNorm;
use wulff_lab::pde::{check_monotonicity, check_pointwise_bound, energy_trace, solve_dirichlet, Potential, ProblemSpec};

fn main() -> wulff_lab::Result<()> {
    let cells = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(128);
    let spec = ProblemSpec::new(
        shared(EllipsoidNorm::diagonal(&[2.0, 1.0])?),
        BFunction::quadratic(),
        Potential::allen_cahn(),
        6.0,
        cells,
        "tanh(x/2)",
        |x, _| (x / 2.0).tanh(),
    )?;
    let t = Instant::now();
    let sol = solve_dirichlet(&spec)?;
    println!("solved {cells}² in {:.1} s, residual {:.2e}", t.elapsed().as_secs_f64(), sol.residual);
    for st in &sol.stages {
        println!("  stage ε = {:?}: {} iterations, energy {:.6}", st.eps, st.iterations, st.energy);
    }
    let radii: Vec<f64> = (0..10).map(|k| 1.0 + k as f64 / 3.0).collect();
    let trace = energy_trace(&spec, &sol.field, &radii, [0.0, 0.0])?;
    println!("\n{:>6} {:>10} {:>10}", "R", "E(R)", "mass");
    for ((r, e), m) in trace.radii.iter().zip(&trace.energies).zip(&trace.masses) {
        println!("{r:>6.3} {e:>10.5} {m:>10.4}");
    }
    let mono = check_monotonicity(&trace, None)?;
    println!("monotone: {:?}", mono.verdict);
    let bound = check_pointwise_bound(&spec, &sol.field, 10.0 * sol.field.h)?;
    println!(
        "P ≤ G: {:?}, max P - G = {:.2e}, ΣP/ΣG = {:.4}",
        bound.verdict,
        bound.detail("max_P_minus_G").unwrap_or(f64::NAN),
        bound.detail("measured_ratio").unwrap_or(f64::NAN)
    );
    Ok(())
}
