//! `B_ε(t) = B(√(ε² + t²)) - B(ε)` for a singular `B`: the uniform bounds
//! and how fast `B_ε → B` as ε shrinks.

use wulff_lab::conditions::BFunction;
use wulff_lab::norm::Euclidean;
use wulff_lab::regularization::{b_epsilon, check_b_epsilon_bounds, convergence_gap};

fn main() -> wulff_lab::Result<()> {
    let grid: Vec<f64> = (1..=4000).map(|i| 8.0 * i as f64 / 4000.0).collect();
    for b in [BFunction::power(3.0)?, BFunction::regularized_power(1.5, 0.1)?] {
        println!("{}", b.name());
        let mut prev: Option<f64> = None;
        for k in 0..6 {
            let eps = 0.1 / 2f64.powi(k);
            let rep = check_b_epsilon_bounds(&b, eps, &grid, &Euclidean::new(2), 500, 3)?;
            let gap = convergence_gap(&b, eps, 1.0)?;
            let rate = prev.map_or(String::new(), |p| format!("rate {:.2}", (p / gap.b_gap).log2()));
            println!(
                "  ε = {eps:<10.6} bounds {:?}  sup|B_ε - B| on [0,1] = {:.3e} (bound {:.1e})  {rate}",
                rep.verdict, gap.b_gap, gap.b_bound
            );
            prev = Some(gap.b_gap);
        }
    }
    let q = BFunction::quadratic();
    let qe = b_epsilon(&q, 0.01)?;
    println!("t²/2 is its own regularization: B_ε(0.7) = {}, B(0.7) = {}", qe.value(0.7), q.value(0.7));
    Ok(())
}
