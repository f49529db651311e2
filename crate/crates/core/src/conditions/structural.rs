use nalgebra::{DMatrix, SymmetricEigen};

use super::{BFunction, ConditionReport, Family};
use crate::error::{Error, Result};
use crate::norm::Anisotropy;
use crate::sampling;

/// Checks the four inequalities of (A)′ on `t_grid` (points `t ≤ 0` are
/// ignored). Relative violations above `1e-12` fail.
pub fn validate_assumption_a_prime(b: &BFunction, t_grid: &[f64]) -> Result<ConditionReport> {
    let Family::APrime {
        p,
        kappa,
        gamma,
        big_gamma,
    } = b.family()
    else {
        return Err(Error::Hypothesis(format!("{} carries no (A)′ parameters", b.name())));
    };
    let mut rep = ConditionReport::new("assumption-A'");
    let mut lo1 = f64::INFINITY;
    let mut hi1: f64 = 0.0;
    let mut lo2 = f64::INFINITY;
    let mut hi2: f64 = 0.0;
    for &t in t_grid.iter().filter(|t| **t > 0.0) {
        let w = (kappa + t).powf(p - 2.0);
        let r1 = b.d1(t) / (w * t);
        let r2 = b.d2(t) / w;
        lo1 = lo1.min(r1);
        hi1 = hi1.max(r1);
        lo2 = lo2.min(r2);
        hi2 = hi2.max(r2);
        let v = [
            (gamma - r1) / gamma,
            (r1 - big_gamma) / big_gamma,
            (gamma - r2) / gamma,
            (r2 - big_gamma) / big_gamma,
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        let v = if r1.is_finite() && r2.is_finite() { v } else { f64::INFINITY };
        rep.observe(v, || vec![t]);
    }
    rep.push_detail("min B'/((κ̄+t)^(p-2)t)", lo1);
    rep.push_detail("max B'/((κ̄+t)^(p-2)t)", hi1);
    rep.push_detail("min B''/(κ̄+t)^(p-2)", lo2);
    rep.push_detail("max B''/(κ̄+t)^(p-2)", hi2);
    rep.conclude(1e-12);
    Ok(rep)
}

/// One-sided estimate of `B'''(0)` from `B''`: forward differences at steps
/// `1e-3` and `1e-4`, Richardson-combined.
fn third_at_zero(b: &BFunction) -> f64 {
    if let Some(v) = b.d3(0.0) {
        return v;
    }
    let b0 = b.d2(0.0);
    let d = |h: f64| (b.d2(h) - b0) / h;
    let (h1, h2) = (1e-3, 1e-4);
    (h1 * d(h2) - h2 * d(h1)) / (h1 - h2)
}

/// `B''(0) > 0`, `B'''(0) = 0`, `B(0) = B'(0) = 0` and positivity of `B`,
/// `B'`, `B''` on `(0, 10]`.
pub fn validate_assumption_b_prime(b: &BFunction) -> ConditionReport {
    let mut rep = ConditionReport::new("assumption-B'");
    let b2 = b.d2(0.0);
    let b3 = third_at_zero(b);
    rep.push_detail("B''(0)", b2);
    rep.push_detail("B'''(0)", b3);
    if !b.has_d3() {
        rep.notes.push("B'''(0) estimated by one-sided differences".into());
    }
    let curvature = if b2.is_finite() && b2 > 0.0 { 0.0 } else { f64::INFINITY };
    rep.observe(curvature, || vec![0.0]);
    rep.observe(b3.abs() / b2.abs().max(1.0), || vec![0.0]);
    rep.observe(b.value(0.0).abs().max(b.d1(0.0).abs()), || vec![0.0]);
    for k in 1..=1000 {
        let t = 10.0 * k as f64 / 1000.0;
        let ok = b.value(t) > 0.0 && b.d1(t) > 0.0 && b.d2(t) > 0.0;
        rep.observe(if ok { 0.0 } else { 1.0 }, || vec![t]);
    }
    rep.conclude(1e-6);
    rep
}

/// `λ = (p-1)c_*^{2(2-p)}γ / (2C²(c_*+1)Γ)` with `c_* = C` for `p ≥ 2` and
/// `1/C` otherwise.
pub fn derived_lambda(p: f64, gamma: f64, big_gamma: f64, c: f64) -> Result<f64> {
    if !(p > 1.0) || !(gamma > 0.0) || !(big_gamma > 0.0) || !(c >= 1.0) {
        return Err(Error::Range(format!(
            "derived λ needs p > 1, γ, Γ > 0, C ≥ 1 (got p={p}, γ={gamma}, Γ={big_gamma}, C={c})"
        )));
    }
    let cs = if p >= 2.0 { c } else { 1.0 / c };
    Ok((p - 1.0) * cs.powf(2.0 * (2.0 - p)) * gamma / (2.0 * c * c * (cs + 1.0) * big_gamma))
}

/// Constants `(κ, γ, Γ)` of (A) implied by (A)′ with norm constant `C` and
/// ellipticity constant `λ` of `H`.
#[derive(Debug, Clone, Copy)]
pub struct AConstants {
    pub kappa: f64,
    pub gamma: f64,
    pub big_gamma: f64,
}

pub fn a_constants_from_a_prime(b: &BFunction, c: f64, lambda: f64) -> Result<AConstants> {
    let Family::APrime {
        p,
        kappa,
        gamma,
        big_gamma,
    } = b.family()
    else {
        return Err(Error::Hypothesis(format!("{} carries no (A)′ parameters", b.name())));
    };
    let cs = if p >= 2.0 { c } else { 1.0 / c };
    Ok(AConstants {
        kappa: kappa / cs,
        gamma: 0.25 * gamma * (lambda / c).min(1.0 / (c * c)) * cs.powf(2.0 - p),
        big_gamma: 2.0 * big_gamma * c * c * cs.powf(p - 2.0),
    })
}

/// Sampled extreme ratios of `Hess(B∘H)(ξ)` against `(κ+|ξ|)^{p-2}`: the
/// smallest eigenvalue ratio and the largest entry-sum ratio.
#[derive(Debug, Clone, Copy)]
pub struct SampledA {
    pub gamma: f64,
    pub big_gamma: f64,
}

pub fn sampled_a_constants<N: Anisotropy + ?Sized>(
    b: &BFunction,
    h: &N,
    kappa: f64,
    samples: usize,
    seed: u64,
) -> Result<SampledA> {
    let p = b.p();
    let n = h.dim();
    let mut rng = sampling::rng(seed);
    let mut gamma = f64::INFINITY;
    let mut big_gamma: f64 = 0.0;
    for _ in 0..samples.max(1) {
        let xi = sampling::scaled_direction(&mut rng, n);
        let t = h.evaluate(&xi)?;
        let g = h.gradient(&xi)?;
        let hs = h.hessian(&xi)?;
        let m: DMatrix<f64> = &g * g.transpose() * b.d2(t) + hs * b.d1(t);
        let w = (kappa + sampling::norm2(&xi)).powf(p - 2.0);
        let eig = SymmetricEigen::new(m.clone()).eigenvalues.min();
        gamma = gamma.min(eig / w);
        big_gamma = big_gamma.max(m.iter().map(|v| v.abs()).sum::<f64>() / w);
    }
    Ok(SampledA { gamma, big_gamma })
}

/// Minimum of `B'(t)t - B(t) - δB(t)` over the grid; fails below `-tol`.
pub fn check_coercivity_inequality(b: &BFunction, delta: f64, t_grid: &[f64], tol: f64) -> ConditionReport {
    let mut rep = ConditionReport::new("coercivity");
    let mut min_value = f64::INFINITY;
    for &t in t_grid {
        let v = b.d1(t) * t - b.value(t) - delta * b.value(t);
        min_value = min_value.min(v);
        rep.observe((-v).max(0.0), || vec![t]);
    }
    rep.push_detail("delta", delta);
    rep.push_detail("min B't - B - δB", min_value);
    rep.conclude(tol);
    rep
}

/// The margin `δ` with `B'(t)t - B(t) ≥ δB(t)` on `[0, K]`: `γ̄/Γ̄` under
/// (A)′, otherwise the ratio of the extreme values of `B''` on `[0, K]`. The
/// inequality is verified on a grid of `(0, K]`.
pub fn coercivity_margin(b: &BFunction, k: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Range(format!("K must be positive, got {k}")));
    }
    let grid: Vec<f64> = (1..=10_000).map(|i| k * i as f64 / 10_000.0).collect();
    let delta = match b.family() {
        Family::APrime { gamma, big_gamma, .. } => gamma / big_gamma,
        _ => {
            let mut lo = b.d2(0.0);
            let mut hi = lo;
            for &t in &grid {
                let v = b.d2(t);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if !(lo > 0.0) || !hi.is_finite() {
                return Err(Error::Hypothesis(format!(
                    "B'' is not bounded between positive constants on [0, {k}] (min {lo:e})"
                )));
            }
            lo / hi
        }
    };
    let rep = check_coercivity_inequality(b, delta, &grid, 1e-12);
    if !rep.passed() {
        let t = rep.witness.as_ref().and_then(|w| w.first().copied()).unwrap_or(f64::NAN);
        return Err(Error::Inconsistency(format!(
            "B't - B ≥ δB fails at t = {t} with δ = {delta} (defect {:e}); declared parameters are wrong",
            rep.sampled_max_violation
        )));
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::EllipsoidNorm;

    fn grid() -> Vec<f64> {
        (1..=10_000).map(|i| 10.0 * i as f64 / 10_000.0).collect()
    }

    #[test]
    fn quadratic_is_a_prime_with_equality() {
        let rep = validate_assumption_a_prime(&BFunction::quadratic(), &grid()).unwrap();
        assert!(rep.passed(), "{rep}");
        assert_eq!(rep.sampled_max_violation, 0.0);
    }

    #[test]
    fn cubic_power_needs_gamma_two() {
        let b = BFunction::power(3.0).unwrap();
        assert!(validate_assumption_a_prime(&b, &grid()).unwrap().passed());
        let wrong = b.with_family(Family::APrime {
            p: 3.0,
            kappa: 0.0,
            gamma: 1.0,
            big_gamma: 1.0,
        });
        let rep = validate_assumption_a_prime(&wrong, &grid()).unwrap();
        assert!(!rep.passed());
        assert!((rep.sampled_max_violation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn b_prime_examples() {
        assert!(validate_assumption_b_prime(&BFunction::quadratic()).passed());
        let even = BFunction::polynomial(&[0.0, 0.0, 0.5, 0.0, 0.25], Family::BPrime);
        assert!(validate_assumption_b_prime(&even).passed());
        let odd = BFunction::polynomial(&[0.0, 0.0, 0.5, 1.0], Family::BPrime);
        let rep = validate_assumption_b_prime(&odd);
        assert!(!rep.passed());
        assert_eq!(rep.detail("B'''(0)"), Some(6.0));
    }

    #[test]
    fn b_third_derivative_estimated_without_d3() {
        let odd = BFunction::new("t^2/2+t^3", |t| t * t / 2.0 + t.powi(3), |t| t + 3.0 * t * t, |t| 1.0 + 6.0 * t, Family::BPrime);
        assert!((third_at_zero(&odd) - 6.0).abs() < 1e-8);
        let even = BFunction::new("t^2/2+t^4/4", |t| t * t / 2.0 + t.powi(4) / 4.0, |t| t + t.powi(3), |t| 1.0 + 3.0 * t * t, Family::BPrime);
        assert!(third_at_zero(&even).abs() < 1e-9);
    }

    #[test]
    fn derived_lambda_values() {
        assert!((derived_lambda(2.0, 1.0, 1.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((derived_lambda(2.0, 7.0, 7.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
        // p=3, γ=1, Γ=2, C=2: c_*=2, λ = 2·2^{-2}·1/(2·4·3·2)
        let v = derived_lambda(3.0, 1.0, 2.0, 2.0).unwrap();
        assert!((v - 2.0 * 0.25 / 48.0).abs() < 1e-15);
        assert!(derived_lambda(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(derived_lambda(2.0, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn coercivity_margins() {
        assert_eq!(coercivity_margin(&BFunction::quadratic(), 10.0).unwrap(), 1.0);
        assert_eq!(coercivity_margin(&BFunction::power(3.0).unwrap(), 10.0).unwrap(), 0.5);
        let even = BFunction::polynomial(&[0.0, 0.0, 0.5, 0.0, 0.25], Family::BPrime);
        let d = coercivity_margin(&even, 1.0).unwrap();
        assert!((d - 1.0 / 4.0).abs() < 1e-12);
        let lying = BFunction::power(3.0).unwrap().with_family(Family::APrime {
            p: 3.0,
            kappa: 0.0,
            gamma: 5.0,
            big_gamma: 1.0,
        });
        assert!(matches!(coercivity_margin(&lying, 10.0), Err(Error::Inconsistency(_))));
    }

    #[test]
    fn sampled_constants_of_quadratic_and_euclidean() {
        let h = EllipsoidNorm::diagonal(&[1.0, 1.0]).unwrap();
        let s = sampled_a_constants(&BFunction::quadratic(), &h, 0.0, 200, 1).unwrap();
        // Hess(|ξ|²/2) = I
        assert!((s.gamma - 1.0).abs() < 1e-10 && (s.big_gamma - 2.0).abs() < 1e-10);
    }
}
