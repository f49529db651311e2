//! The exact, sign and orthogonality conditions on a few norms.

use wulff_lab::conditions::{
    check_exact_condition, check_orthogonality_condition, check_sign_condition, ellipticity_constant, PairCheckOptions,
};
use wulff_lab::duality::{shared, DualNorm};
use wulff_lab::norm::{EllipsoidNorm, Euclidean, SharedNorm};
use wulff_lab::planar::{extend_profile, glued_pq_norm, support_norm, Bump, RadialProfile};

fn main() -> wulff_lab::Result<()> {
    let bumped = RadialProfile::perturbed_by(&RadialProfile::ellipse(1.5)?, Bump::standard(), 0.01);
    let norms: Vec<(&str, SharedNorm)> = vec![
        ("euclidean", shared(Euclidean::new(2))),
        ("ellipsoid diag(4,1)", shared(EllipsoidNorm::diagonal(&[4.0, 1.0])?)),
        ("glued p=3", shared(glued_pq_norm(3.0)?)),
        ("bumped ellipse", shared(support_norm(&extend_profile(&bumped)?))),
    ];
    let opts = PairCheckOptions {
        samples: 2000,
        seed: 9,
        ..Default::default()
    };
    println!("{:<20} {:>12} {:>12} {:>12} {:>8}", "norm", "exact", "sign", "orthogonal", "λ");
    for (name, h) in norms {
        let dual = DualNorm::new(h.clone());
        let exact = check_exact_condition(&dual, &opts)?;
        let sign = check_sign_condition(&dual, &opts)?;
        let orth = check_orthogonality_condition(&*h, &opts)?;
        let lambda = ellipticity_constant(&*h, 720)?.lambda;
        let show = |r: &wulff_lab::conditions::ConditionReport| {
            format!("{:?} {:.0e}", r.verdict, r.sampled_max_violation)
        };
        println!("{name:<20} {:>12} {:>12} {:>12} {lambda:>8.4}", show(&exact), show(&sign), show(&orth));
    }
    Ok(())
}
