use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::norm::{Anisotropy, Smoothness};
use crate::sampling::norm2;

use super::extension::ExtendedProfile;
use super::matching::check_smooth_matching;
use super::profile::ProfileClass;

/// `H̃(ρcosθ, ρsinθ) = ρ/r̃(θ)` for an extended profile.
#[derive(Debug, Clone)]
pub struct SupportNorm {
    ext: ExtendedProfile,
    smoothness: Smoothness,
}

/// The norm whose unit circle is `ρ = r̃(θ)`. Tagged C3 when the source
/// profile is `C^{3,α}` and passes the matching conditions, otherwise C1
/// (the extension is only `C¹` across the coordinate axes in general).
pub fn support_norm(ext: &ExtendedProfile) -> SupportNorm {
    let smooth = !ext.is_mirrored()
        && ext.source().class() == ProfileClass::C3Alpha
        && check_smooth_matching(ext.source()).map(|r| r.passed()).unwrap_or(false);
    SupportNorm {
        ext: ext.clone(),
        smoothness: if smooth { Smoothness::C3 } else { Smoothness::C1 },
    }
}

impl SupportNorm {
    pub fn extended(&self) -> &ExtendedProfile {
        &self.ext
    }

    fn polar(xi: &[f64]) -> (f64, f64) {
        let rho = norm2(xi);
        let theta = xi[1].atan2(xi[0]).rem_euclid(PI);
        // the negative x-axis is the same ray as the positive one
        let theta = if theta >= PI { 0.0 } else { theta };
        (rho, theta)
    }
}

impl Anisotropy for SupportNorm {
    fn dim(&self) -> usize {
        2
    }

    fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    fn name(&self) -> String {
        format!("support norm of {}", self.ext.source().name())
    }

    fn value(&self, xi: &[f64]) -> f64 {
        let (rho, theta) = Self::polar(xi);
        if rho == 0.0 {
            return 0.0;
        }
        rho / self.ext.r_tilde(theta).unwrap_or(f64::NAN)
    }

    fn analytic_gradient(&self, xi: &[f64], out: &mut [f64]) -> bool {
        let (_, theta) = Self::polar(xi);
        let Ok([v, d1, _]) = self.ext.derivs(theta) else {
            return false;
        };
        let phi = xi[1].atan2(xi[0]);
        let (s, c) = phi.sin_cos();
        let q = d1 / v;
        out[0] = (c + q * s) / v;
        out[1] = (s - q * c) / v;
        true
    }

    fn analytic_hessian(&self, xi: &[f64]) -> Option<Result<DMatrix<f64>>> {
        let (rho, theta) = Self::polar(xi);
        if self.smoothness < Smoothness::C2 && (theta == 0.0 || theta == FRAC_PI_2) {
            return Some(Err(Error::UnsupportedSmoothness(format!(
                "{} is not twice differentiable on the coordinate axes",
                self.name()
            ))));
        }
        Some(self.ext.derivs(theta).and_then(|[v, d1, d2]| {
            let k = (2.0 * d1 * d1 - v * d2 + v * v) / (rho * v.powi(3));
            if !k.is_finite() {
                return Err(Error::UnsupportedSmoothness(format!(
                    "second derivative of r̃ undefined at θ = {theta}"
                )));
            }
            let phi = xi[1].atan2(xi[0]);
            let e = [-phi.sin(), phi.cos()];
            Ok(DMatrix::from_fn(2, 2, |i, j| k * e[i] * e[j]))
        }))
    }
}
