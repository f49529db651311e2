use std::f64::consts::{FRAC_PI_2, PI};

use wulff_lab::conditions::{check_sign_condition, PairCheckOptions};
use wulff_lab::duality::{shared, DualNorm};
use wulff_lab::norm::{Anisotropy, Smoothness};
use wulff_lab::planar::{
    check_smooth_matching, extend_profile, support_norm, Bump, ExtendedProfile, RadialProfile,
};
use wulff_lab::Error;

fn sign_passes(ext: &ExtendedProfile) -> bool {
    let dual = DualNorm::new(shared(support_norm(ext)));
    let opts = PairCheckOptions {
        samples: 2000,
        seed: 5,
        ..Default::default()
    };
    check_sign_condition(&dual, &opts).unwrap().passed()
}

#[test]
fn ellipse_support_norm_is_the_ellipse_norm() {
    for &rs in &[1.2, 2.0, 3.0] {
        let h = support_norm(&extend_profile(&RadialProfile::ellipse(rs).unwrap()).unwrap());
        for k in 0..360 {
            let phi = 2.0 * PI * k as f64 / 360.0;
            let xi = [1.7 * phi.cos(), 1.7 * phi.sin()];
            let want = (xi[0] * xi[0] + xi[1] * xi[1] / (rs * rs)).sqrt();
            assert!((h.value(&xi) - want).abs() < 1e-8, "r* = {rs}, φ = {phi}");
        }
    }
}

#[test]
fn circle_extends_to_the_circle() {
    let ext = extend_profile(&RadialProfile::circle()).unwrap();
    for k in 0..=100 {
        let th = FRAC_PI_2 + FRAC_PI_2 * k as f64 / 100.0;
        assert!((ext.r_tilde(th.min(PI - 1e-12)).unwrap() - 1.0).abs() < 1e-12);
    }
    assert!(ext.checks().continuity < 1e-12);
}

#[test]
fn perturbed_ellipse_gives_a_smooth_norm_with_the_sign_condition() {
    let r = RadialProfile::perturbed_by(&RadialProfile::ellipse(1.5).unwrap(), Bump::standard(), 0.01);
    assert!(check_smooth_matching(&r).unwrap().passed());
    let ext = extend_profile(&r).unwrap();
    assert_eq!(support_norm(&ext).smoothness(), Smoothness::C3);
    assert!(sign_passes(&ext));
}

#[test]
fn mirrored_extension_is_only_c1_and_breaks_the_sign_condition() {
    let r = RadialProfile::perturbed_by(&RadialProfile::ellipse(1.5).unwrap(), Bump::standard(), 0.01);
    let mirrored = ExtendedProfile::mirrored(&r).unwrap();
    assert_eq!(support_norm(&mirrored).smoothness(), Smoothness::C1);
    assert!(!sign_passes(&mirrored));
}

#[test]
fn large_perturbations_are_rejected() {
    let r = RadialProfile::perturbed_by(&RadialProfile::ellipse(1.5).unwrap(), Bump::standard(), 5.0);
    assert!(matches!(extend_profile(&r), Err(Error::ProfileRejected { .. })));
}

#[test]
fn sampled_profile_tracks_its_source() {
    let src = RadialProfile::ellipse(2.0).unwrap();
    let thetas: Vec<f64> = (0..=128).map(|k| FRAC_PI_2 * k as f64 / 128.0).collect();
    let radii: Vec<f64> = thetas.iter().map(|&t| src.r(t)).collect();
    let sampled = RadialProfile::from_samples(&thetas, &radii).unwrap();
    let (a, b) = (extend_profile(&src).unwrap(), extend_profile(&sampled).unwrap());
    for k in 0..=200 {
        let th = (FRAC_PI_2 + FRAC_PI_2 * k as f64 / 200.0).min(PI - 1e-12);
        assert!((a.r_tilde(th).unwrap() - b.r_tilde(th).unwrap()).abs() < 1e-5);
    }
    assert!(support_norm(&b).smoothness() < Smoothness::C3);
}
