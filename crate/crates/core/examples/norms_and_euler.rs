//! Homogeneity and Euler identities for the built-in norms.

use wulff_lab::duality::shared;
use wulff_lab::norm::{check_homogeneity_and_euler, Anisotropy, EllipsoidNorm, Euclidean, PNorm, SharedNorm};
use wulff_lab::planar::glued_pq_norm;

fn main() -> wulff_lab::Result<()> {
    let norms: Vec<SharedNorm> = vec![
        shared(Euclidean::new(3)),
        shared(EllipsoidNorm::diagonal(&[2.0, 1.0])?),
        shared(PNorm::planar(4.0)?),
        shared(glued_pq_norm(3.0)?),
    ];
    println!("{:<34} {:>10} {:>10} {:>10} {:>10}", "norm", "H(tξ)", "<∇H,ξ>", "D²H ξ", "D³H");
    for h in &norms {
        let r = check_homogeneity_and_euler(&**h, 2000, 1);
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.1e}"));
        println!(
            "{:<34} {:>10.1e} {:>10.1e} {:>10} {:>10}  {}",
            h.name(),
            r.homogeneity,
            r.gradient_identity,
            opt(r.hessian_identity),
            opt(r.third_order_identity),
            if r.passed { "ok" } else { "FAILED" }
        );
    }
    let h = EllipsoidNorm::diagonal(&[2.0, 1.0])?;
    let xi = [0.6, -0.8];
    println!("\nH(0.6, -0.8) = {:.6}, ∇H = {:?}", h.value(&xi), h.gradient(&xi)?.as_slice());
    println!("Hessian:\n{:.6}", h.hessian(&xi)?);
    Ok(())
}
