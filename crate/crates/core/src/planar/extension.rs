use std::f64::consts::{FRAC_PI_2, PI};

use crate::conditions::ConditionReport;
use crate::error::{Error, Result};

use super::profile::{validate_profile, RadialProfile};

/// `τ(η) = π/2 + η - atan(r'(η)/r(η))`.
pub fn tau(r: &RadialProfile, eta: f64) -> f64 {
    let [v, d1, ..] = r.derivs(eta);
    FRAC_PI_2 + eta - (d1 / v).atan()
}

/// `τ'(η) = (r² + 2r'² - r r'')/(r² + r'²)`.
pub fn tau_prime(r: &RadialProfile, eta: f64) -> f64 {
    let [v, d1, d2, _] = r.derivs(eta);
    (v * v + 2.0 * d1 * d1 - v * d2) / (v * v + d1 * d1)
}

/// Preimage `η ∈ [0, π/2]` of `θ ∈ [π/2, π]` under `τ`, to `|τ(η) - θ| ≤ 1e-12`.
/// Bisection on the pinned bracket with Newton steps accepted only when they
/// stay inside it.
pub fn tau_inverse(r: &RadialProfile, theta: f64) -> Result<f64> {
    if !(FRAC_PI_2 - 1e-15..=PI + 1e-15).contains(&theta) {
        return Err(Error::Domain(format!("τ⁻¹ needs θ ∈ [π/2, π], got {theta}")));
    }
    let f = |e: f64| tau(r, e) - theta;
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    let (flo, fhi) = (f(lo), f(hi));
    if flo.abs() <= 1e-14 {
        return Ok(lo);
    }
    if fhi.abs() <= 1e-14 {
        return Ok(hi);
    }
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::InvalidProfile(format!(
            "τ does not bracket θ = {theta}: τ(0) - θ = {flo}, τ(π/2) - θ = {fhi}"
        )));
    }
    let mut x = lo + (hi - lo) * (theta - FRAC_PI_2) / FRAC_PI_2;
    for _ in 0..200 {
        let fx = f(x);
        if fx.abs() <= 1e-14 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON {
            break;
        }
        let d = tau_prime(r, x);
        let newton = x - fx / d;
        x = if d > 1e-3 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let x = 0.5 * (lo + hi);
    let res = f(x).abs();
    if res > 1e-12 {
        return Err(Error::InvalidProfile(format!(
            "τ⁻¹({theta}) stalled with residual {res:.3e}"
        )));
    }
    Ok(x)
}

/// Self-checks recorded when an extension is built.
#[derive(Debug, Clone)]
pub struct ExtensionChecks {
    /// Largest `|r̃(π/2⁺) - r(π/2)|`, `|r̃(π⁻) - r(0)|`.
    pub continuity: f64,
    /// One-sided `r̃'` at `π/2±` and `π⁻` (all should vanish).
    pub derivative_at_gluing: [f64; 3],
    /// Largest `|r̃'(τ(η))/r̃(τ(η)) + r'(η)/r(η)|` by central differences.
    pub reflection: f64,
}

/// The π-periodic extension `r̃` of a validated profile.
#[derive(Debug, Clone)]
pub struct ExtendedProfile {
    source: RadialProfile,
    mirrored: bool,
    checks: ExtensionChecks,
    profile_report: ConditionReport,
}

pub fn extend_profile(r: &RadialProfile) -> Result<ExtendedProfile> {
    let rep = validate_profile(r, 2048)?;
    if !rep.passed() {
        return Err(Error::ProfileRejected {
            margin: rep.detail("margin").unwrap_or(f64::NAN),
            reason: "convexity or tangent bound violated".into(),
        });
    }
    let mut ext = ExtendedProfile {
        source: r.clone(),
        mirrored: false,
        checks: ExtensionChecks {
            continuity: 0.0,
            derivative_at_gluing: [0.0; 3],
            reflection: 0.0,
        },
        profile_report: rep,
    };
    ext.checks = ext.self_check()?;
    Ok(ext)
}

impl ExtendedProfile {
    /// Second quadrant filled with the mirror image `r(π - θ)` instead of the
    /// `τ`-construction. Convex and even, but generally violates the sign
    /// condition; kept as a negative control.
    pub fn mirrored(r: &RadialProfile) -> Result<ExtendedProfile> {
        let mut ext = extend_profile(r)?;
        ext.mirrored = true;
        Ok(ext)
    }

    pub fn source(&self) -> &RadialProfile {
        &self.source
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    pub fn checks(&self) -> &ExtensionChecks {
        &self.checks
    }

    pub fn profile_report(&self) -> &ConditionReport {
        &self.profile_report
    }

    pub fn tau(&self, eta: f64) -> f64 {
        tau(&self.source, eta)
    }

    pub fn tau_inverse(&self, theta: f64) -> Result<f64> {
        tau_inverse(&self.source, theta)
    }

    /// `(r̃, r̃', r̃'')` at any angle. On `(π/2, π)` the second derivative
    /// blows up where `τ' = 0`, which only happens for borderline profiles.
    pub fn derivs(&self, theta: f64) -> Result<[f64; 3]> {
        let t = theta.rem_euclid(PI);
        if t <= FRAC_PI_2 {
            let [v, d1, d2, _] = self.source.derivs(t);
            return Ok([v, d1, d2]);
        }
        if self.mirrored {
            let [v, d1, d2, _] = self.source.derivs(PI - t);
            return Ok([v, -d1, d2]);
        }
        let eta = tau_inverse(&self.source, t)?;
        Ok(second_quadrant(&self.source, eta))
    }

    pub fn r_tilde(&self, theta: f64) -> Result<f64> {
        Ok(self.derivs(theta)?[0])
    }

    /// Curvature `(2r̃'² - r̃r̃'' + r̃²)/(r̃² + r̃'²)^{3/2}` of the unit circle.
    /// Where `r̃''` does not exist the error carries the one-sided values.
    pub fn curvature(&self, theta: f64) -> Result<f64> {
        let k = |t: f64| -> Result<f64> {
            let [v, d1, d2] = self.derivs(t)?;
            Ok((2.0 * d1 * d1 - v * d2 + v * v) / (v * v + d1 * d1).powf(1.5))
        };
        let val = k(theta)?;
        if val.is_finite() {
            return Ok(val);
        }
        let (a, b) = (k(theta - 1e-7)?, k(theta + 1e-7)?);
        Err(Error::UnsupportedSmoothness(format!(
            "r̃'' undefined at θ = {theta}; one-sided curvatures {a:.6e} / {b:.6e}"
        )))
    }

    /// `r̃r̃'' - 2r̃'² - r̃²` on the second quadrant in closed form:
    /// `-r̃²(r² + r'²)²/(r²(r² + 2r'² - rr''))` at `η = τ⁻¹(θ)`.
    pub fn convexity_quantity(&self, theta: f64) -> Result<f64> {
        let t = theta.rem_euclid(PI);
        if t <= FRAC_PI_2 || self.mirrored {
            let [v, d1, d2] = self.derivs(t)?;
            return Ok(v * d2 - 2.0 * d1 * d1 - v * v);
        }
        let eta = tau_inverse(&self.source, t)?;
        let [v, d1, d2, _] = self.source.derivs(eta);
        let rt = self.source.r_star() * (v * v + d1 * d1).sqrt() / (v * v);
        let s = v * v + d1 * d1;
        Ok(-rt * rt * s * s / (v * v * (v * v + 2.0 * d1 * d1 - v * d2)))
    }

    fn self_check(&self) -> Result<ExtensionChecks> {
        let r = &self.source;
        let h = 1e-6;
        let continuity = [
            (self.r_tilde(FRAC_PI_2 + 1e-13)? - r.r_star()).abs(),
            (self.r_tilde(PI - 1e-13)? - 1.0).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        let derivative_at_gluing = [
            (self.r_tilde(FRAC_PI_2)? - self.r_tilde(FRAC_PI_2 - h)?) / h,
            (self.r_tilde(FRAC_PI_2 + h)? - self.r_tilde(FRAC_PI_2)?) / h,
            (self.r_tilde(PI - 1e-13)? - self.r_tilde(PI - h)?) / h,
        ];
        let mut reflection = 0.0f64;
        if !self.mirrored {
            for k in 1..2048 {
                let eta = FRAC_PI_2 * k as f64 / 2048.0;
                let t = tau(r, eta);
                if t - h <= FRAC_PI_2 || t + h >= PI {
                    continue;
                }
                let fd = (self.r_tilde(t + h)? - self.r_tilde(t - h)?) / (2.0 * h);
                let lhs = fd / self.r_tilde(t)?;
                reflection = reflection.max((lhs + r.d1(eta) / r.r(eta)).abs());
            }
        }
        Ok(ExtensionChecks {
            continuity,
            derivative_at_gluing,
            reflection,
        })
    }
}

// (r̃, r̃', r̃'') at θ = τ(η)
pub(super) fn second_quadrant(r: &RadialProfile, eta: f64) -> [f64; 3] {
    let [v, d1, d2, _] = r.derivs(eta);
    let s = v * v + d1 * d1;
    let rt = r.r_star() * s.sqrt() / (v * v);
    let rt1 = -(d1 / v) * rt;
    let rt2 = rt1 * rt1 / rt - rt * s * (v * d2 - d1 * d1) / (v * v * (v * v + 2.0 * d1 * d1 - v * d2));
    [rt, rt1, rt2]
}
