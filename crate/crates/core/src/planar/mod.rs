//! Planar norms satisfying the sign condition, built from a first-quadrant
//! radial profile `r` by the map `τ(η) = π/2 + η - atan(r'/r)` and the
//! extension `r̃(τ(η)) = r*√(r² + r'²)/r²`.

mod extension;
mod matching;
mod profile;
mod support;

pub use extension::{extend_profile, tau, tau_inverse, tau_prime, ExtendedProfile, ExtensionChecks};
pub use matching::check_smooth_matching;
pub use profile::{normalize_samples, perturbed_profile, validate_profile, Bump, ProfileClass, RadialProfile};
pub use support::{support_norm, SupportNorm};

use crate::error::{Error, Result};
use crate::norm::GluedPQNorm;

/// `Ĥ_p`: the `p`-norm where `ξ₁ξ₂ ≥ 0` and the `p/(p-1)`-norm elsewhere.
pub fn glued_pq_norm(p: f64) -> Result<GluedPQNorm> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::Range(format!("glued norm needs p > 2, got {p}")));
    }
    GluedPQNorm::new(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::Anisotropy;

    #[test]
    fn glued_norm_values() {
        let h = glued_pq_norm(3.0).unwrap();
        assert!((h.value(&[1.0, 1.0]) - 2f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert!((h.value(&[1.0, -1.0]) - 2f64.powf(2.0 / 3.0)).abs() < 1e-14);
        assert!(glued_pq_norm(2.0).is_err());
    }

    #[test]
    fn glued_profile_is_p_norm_profile() {
        let h = glued_pq_norm(4.0).unwrap();
        let r = RadialProfile::p_norm(4.0).unwrap();
        for k in 0..=100 {
            let t = std::f64::consts::FRAC_PI_2 * k as f64 / 100.0;
            assert!((1.0 / h.value(&[t.cos(), t.sin()]) - r.r(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn near_two_both_quadrants_approach_circle() {
        let h = glued_pq_norm(2.0 + 1e-6).unwrap();
        for &xi in &[[0.6, 0.8], [0.6, -0.8]] {
            assert!((h.value(&xi) - 1.0).abs() < 1e-5);
        }
    }
}
