//! Numeric dual norm against the closed form, and the Wulff shape `{H* ≤ 1}`
//! written as SVG next to the unit ball of `H`.

use std::f64::consts::TAU;

use wulff_lab::cli::Svg;
use wulff_lab::duality::{check_polarity, psi_map, shared, DualNorm, DualStrategy};
use wulff_lab::norm::{Anisotropy, EllipsoidNorm};
use wulff_lab::planar::glued_pq_norm;

fn main() -> wulff_lab::Result<()> {
    let m = nalgebra::DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 1.0]);
    let h = shared(EllipsoidNorm::new(m)?);
    let exact = DualNorm::new(h.clone());
    let numeric = DualNorm::with_strategy(h.clone(), DualStrategy::NumericSup);
    let mut worst: f64 = 0.0;
    for k in 0..360 {
        let t = TAU * k as f64 / 360.0;
        let x = [t.cos(), t.sin()];
        worst = worst.max((numeric.dual_value(&x)? - exact.dual_value(&x)?).abs());
    }
    println!("ellipsoid: max |numeric H* - H_(M^-1)| over 360 directions = {worst:.2e}");

    let xi = [0.3, -1.1];
    let y = psi_map(&*h, &xi)?;
    let back = psi_map(&exact, &y)?;
    println!("Ψ_H({xi:?}) = {y:.6?}, Ψ_H*(Ψ_H(ξ)) = {back:.12?}");

    let glued = shared(glued_pq_norm(3.0)?);
    let dual = DualNorm::new(glued.clone());
    let pol = check_polarity(&dual, 1000, 1e-6, 0.0, 2)?;
    println!("glued p=3 polarity: H*(∇H) - 1 ≤ {:.1e}, H(∇H*) - 1 ≤ {:.1e}", pol.primal_side, pol.dual_side);

    let mut svg = Svg::centred(480.0, 1.6);
    let curve = |f: &dyn Fn(&[f64]) -> f64| -> Vec<[f64; 2]> {
        (0..720)
            .map(|k| {
                let t = TAU * k as f64 / 720.0;
                let d = [t.cos(), t.sin()];
                let r = 1.0 / f(&d);
                [r * d[0], r * d[1]]
            })
            .collect()
    };
    svg.polyline(&curve(&|x| glued.value(x)), "#1f77b4", true);
    svg.polyline(&curve(&|x| dual.value(x)), "#d62728", true);
    svg.text(-1.55, 1.45, "blue: H = 1, red: Wulff shape H* = 1");
    let path = std::env::temp_dir().join("wulff_glued_p3.svg");
    std::fs::write(&path, svg.finish())?;
    println!("wrote {}", path.display());
    Ok(())
}
