use std::f64::consts::{FRAC_PI_2, PI};

use crate::conditions::ConditionReport;
use crate::error::{Error, Result};

use super::extension::{extend_profile, second_quadrant};
use super::profile::{ProfileClass, RadialProfile};

/// Checks `r''(π/2) = -r* r''(0)/(1 - r''(0))` and
/// `r'''(π/2) = -r* r'''(0)/(1 - r''(0))³`, then measures the jumps of `r̃''`
/// and `r̃'''` across `π/2` and `π` with one-sided stencils of width `1e-4`.
pub fn check_smooth_matching(r: &RadialProfile) -> Result<ConditionReport> {
    if r.class() != ProfileClass::C3Alpha || r.d3(0.0).is_none() {
        return Err(Error::UnsupportedSmoothness(format!(
            "{} has no third derivative",
            r.name()
        )));
    }
    let r2_0 = r.d2(0.0);
    if !(1.0 - r2_0 > 0.0) {
        return Err(Error::InvalidProfile(format!("r''(0) = {r2_0} must be < 1")));
    }
    let rs = r.r_star();
    let r3_0 = r.d3(0.0).unwrap_or(0.0);
    let r2_q = r.d2(FRAC_PI_2);
    let r3_q = r.d3(FRAC_PI_2).unwrap_or(f64::NAN);
    let want2 = -rs * r2_0 / (1.0 - r2_0);
    let want3 = -rs * r3_0 / (1.0 - r2_0).powi(3);

    let mut rep = ConditionReport::new("smooth-matching");
    let scaled = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
    rep.observe(scaled(r2_q, want2), || vec![FRAC_PI_2, 2.0]);
    rep.observe(scaled(r3_q, want3), || vec![FRAC_PI_2, 3.0]);
    rep.push_detail("second_order_equation", r2_q - want2);
    rep.push_detail("third_order_equation", r3_q - want3);

    let ext = extend_profile(r)?;
    let h = 1e-4;
    let val = |t: f64| ext.r_tilde(t);
    let d2 = |t: f64| ext.derivs(t).map(|d| d[2]);
    // one-sided values of r̃'' at the gluing points
    let left_q = r2_q;
    let right_q = second_quadrant(r, 0.0)[2];
    let left_pi = second_quadrant(r, FRAC_PI_2)[2];
    let right_pi = r2_0;

    for (k, &g) in [FRAC_PI_2, PI].iter().enumerate() {
        let (l0, r0) = if k == 0 { (left_q, right_q) } else { (left_pi, right_pi) };
        // second derivative from values, second-order one-sided stencil
        let fl = [val(g)?, val(g - h)?, val(g - 2.0 * h)?, val(g - 3.0 * h)?];
        let fr = [val(g)?, val(g + h)?, val(g + 2.0 * h)?, val(g + 3.0 * h)?];
        let s2l = (2.0 * fl[0] - 5.0 * fl[1] + 4.0 * fl[2] - fl[3]) / (h * h);
        let s2r = (2.0 * fr[0] - 5.0 * fr[1] + 4.0 * fr[2] - fr[3]) / (h * h);
        // third derivative from one-sided differences of r̃''
        let s3l = (3.0 * l0 - 4.0 * d2(g - h)? + d2(g - 2.0 * h)?) / (2.0 * h);
        let s3r = (-3.0 * r0 + 4.0 * d2(g + h)? - d2(g + 2.0 * h)?) / (2.0 * h);
        let name = if k == 0 { "half_pi" } else { "pi" };
        rep.push_detail(&format!("second_jump_{name}"), s2r - s2l);
        rep.push_detail(&format!("third_jump_{name}"), s3r - s3l);
        rep.observe(scaled(s2l, s2r), || vec![g, 2.0]);
        rep.observe(scaled(s3l, s3r), || vec![g, 3.0]);
    }
    rep.conclude(1e-5);
    Ok(rep)
}
