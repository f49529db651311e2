//! Unit circles of the glued norms `Ĥ_p` for p = 5/2, 3, 4 and their duals.

use std::f64::consts::TAU;

use wulff_lab::cli::Svg;
use wulff_lab::duality::{shared, DualNorm};
use wulff_lab::norm::Anisotropy;
use wulff_lab::planar::glued_pq_norm;

fn main() -> wulff_lab::Result<()> {
    let colours = ["#1b9e77", "#d95f02", "#7570b3"];
    let mut primal = Svg::centred(420.0, 1.5);
    let mut dual_svg = Svg::centred(420.0, 1.5);
    for (p, c) in [2.5, 3.0, 4.0].into_iter().zip(colours) {
        let h = shared(glued_pq_norm(p)?);
        let d = DualNorm::new(h.clone());
        let ring = |f: &dyn Fn(&[f64]) -> f64| -> Vec<[f64; 2]> {
            (0..900)
                .map(|k| {
                    let t = TAU * k as f64 / 900.0;
                    let u = [t.cos(), t.sin()];
                    let r = 1.0 / f(&u);
                    [r * u[0], r * u[1]]
                })
                .collect()
        };
        primal.polyline(&ring(&|x| h.value(x)), c, true);
        dual_svg.polyline(&ring(&|x| d.value(x)), c, true);
        let diag = [0.5f64.sqrt(), 0.5f64.sqrt()];
        println!(
            "p = {p}: q = {:.4}, H(e1) = {:.4}, H(e2) = {:.4}, H(diag) = {:.4}, H*(diag) = {:.4}, {:?}",
            p / (p - 1.0),
            h.value(&[1.0, 0.0]),
            h.value(&[0.0, 1.0]),
            h.value(&diag),
            d.value(&diag),
            h.smoothness()
        );
    }
    let dir = std::env::temp_dir();
    std::fs::write(dir.join("glued_pq_primal.svg"), primal.finish())?;
    std::fs::write(dir.join("glued_pq_dual.svg"), dual_svg.finish())?;
    println!("wrote glued_pq_primal.svg and glued_pq_dual.svg to {}", dir.display());
    Ok(())
}
