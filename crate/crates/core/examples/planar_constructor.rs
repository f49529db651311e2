//! Extends a radial profile on the first quadrant to the second one, checks
//! the result, and compares it with the mirror-image extension.

use std::f64::consts::{FRAC_PI_2, PI};

use wulff_lab::conditions::{check_sign_condition, PairCheckOptions};
use wulff_lab::duality::{shared, DualNorm};
use wulff_lab::planar::{check_smooth_matching, extend_profile, support_norm, Bump, ExtendedProfile, RadialProfile};

fn main() -> wulff_lab::Result<()> {
    let r = RadialProfile::perturbed_by(&RadialProfile::ellipse(1.5)?, Bump::standard(), 0.01);
    let ext = extend_profile(&r)?;
    let rep = ext.profile_report();
    println!("profile {}: convexity margin {:.4}", r.name(), rep.detail("margin").unwrap_or(f64::NAN));
    let c = ext.checks();
    println!(
        "continuity {:.1e}, r~' at gluing points {:?}, reflection {:.1e}",
        c.continuity, c.derivative_at_gluing, c.reflection
    );
    let m = check_smooth_matching(&r)?;
    println!("smooth matching: {:?}, worst jump {:.2e}", m.verdict, m.sampled_max_violation);

    println!("\n{:>8} {:>10} {:>10} {:>10}", "θ", "r~(θ)", "curvature", "mirror");
    for k in 0..=8 {
        let th = (FRAC_PI_2 + FRAC_PI_2 * k as f64 / 8.0).min(PI - 1e-9);
        println!(
            "{th:>8.4} {:>10.6} {:>10.5} {:>10.6}",
            ext.r_tilde(th)?,
            ext.curvature(th)?,
            r.r(PI - th)
        );
    }

    let opts = PairCheckOptions {
        samples: 3000,
        seed: 1,
        ..Default::default()
    };
    for (label, e) in [("constructed", ext.clone()), ("mirrored", ExtendedProfile::mirrored(&r)?)] {
        let dual = DualNorm::new(shared(support_norm(&e)));
        let s = check_sign_condition(&dual, &opts)?;
        println!("{label:<12} sign condition {:?} (worst {:.2e})", s.verdict, s.sampled_max_violation);
    }
    Ok(())
}
