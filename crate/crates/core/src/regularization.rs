//! The approximation `B_ε(t) = B(√(ε² + t²)) - B(ε)` of a degenerate or
//! singular `B`, its uniform bounds, and the quadratic cap beyond `M`.

use crate::conditions::{
    a_constants_from_a_prime, ellipticity_constant, norm_bound_constant, validate_assumption_a_prime,
    BFunction, ConditionReport, Family,
};
use crate::error::{Error, Result};
use crate::norm::Anisotropy;
use crate::sampling;

/// `c_p = min{1, 2^{(2-p)/2}}`, `C_p = max{1, 2^{(2-p)/2}}`.
pub fn cp_constants(p: f64) -> (f64, f64) {
    let v = 2f64.powf((2.0 - p) / 2.0);
    (v.min(1.0), v.max(1.0))
}

/// `B_ε` with `B'_ε(t) = B'(s)t/s`, `B''_ε(t) = B''(s)t²/s² + B'(s)ε²/s³`,
/// `s = √(ε² + t²)`. An (A)′ family is carried over with `κ̄ + ε` and the
/// constants scaled by `c_p`, `C_p`.
pub fn b_epsilon(b: &BFunction, eps: f64) -> Result<BFunction> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Range(format!("ε must lie in (0, 1), got {eps}")));
    }
    let family = match b.family() {
        Family::APrime {
            p,
            kappa,
            gamma,
            big_gamma,
        } => {
            let (cp, big_cp) = cp_constants(p);
            Family::APrime {
                p,
                kappa: kappa + eps,
                gamma: cp * gamma,
                big_gamma: big_cp * big_gamma,
            }
        }
        f => f,
    };
    if let Family::APrime { p, gamma, big_gamma, .. } = b.family() {
        if p == 2.0 && gamma == big_gamma {
            // B'' ≡ γ̄ forces B = γ̄t²/2, which B_ε reproduces identically
            return Ok(b.clone().with_family(family));
        }
    }
    let (b0, b1, b2) = (b.clone(), b.clone(), b.clone());
    let shift = b.value(eps);
    let e2 = eps * eps;
    Ok(BFunction::new(
        format!("{} regularized at ε={eps}", b.name()),
        move |t: f64| {
            // B(s) - B(ε) through the mean value of B' when s ≈ ε
            let s = (e2 + t * t).sqrt();
            if t < 1e-4 * eps {
                let h = s - eps;
                b0.d1(eps) * h + 0.5 * b0.d2(eps) * h * h
            } else {
                b0.value(s) - shift
            }
        },
        move |t: f64| {
            let s = (e2 + t * t).sqrt();
            b1.d1(s) * t / s
        },
        move |t: f64| {
            let s2 = e2 + t * t;
            let s = s2.sqrt();
            b2.d2(s) * t * t / s2 + b2.d1(s) * e2 / (s2 * s)
        },
        family,
    ))
}

/// Checks the four inequalities of the `B_ε` family on `t_grid`, then the
/// coercivity `(B_ε∘H)(ξ) ≥ γ|ξ|^p/(2(p-1)p) - c⋆` on sampled `ξ` for the
/// planar norm `h`, with `γ` from the (A)′ ⇒ (A) constants of `B_ε` and
/// `c⋆` from [`coercivity_offset`].
pub fn check_b_epsilon_bounds<N: Anisotropy + ?Sized>(
    b: &BFunction,
    eps: f64,
    t_grid: &[f64],
    h: &N,
    samples: usize,
    seed: u64,
) -> Result<ConditionReport> {
    let be = b_epsilon(b, eps)?;
    let mut rep = validate_assumption_a_prime(&be, t_grid)?;
    rep.condition_id = format!("b-epsilon bounds (ε={eps})");
    let lambda = ellipticity_constant(h, 720)?.lambda;
    let c = norm_bound_constant(h, 720, seed);
    let consts = a_constants_from_a_prime(&be, c, lambda)?;
    let p = be.p();
    let c_star = coercivity_offset(b, consts.gamma)?;
    rep.push_detail("lambda", lambda);
    rep.push_detail("C", c);
    rep.push_detail("gamma_A", consts.gamma);
    rep.push_detail("c_star", c_star);
    let mut rng = sampling::rng(seed);
    let mut worst_slack = f64::INFINITY;
    for _ in 0..samples {
        let xi = sampling::scaled_direction(&mut rng, h.dim());
        let r = sampling::norm2(&xi);
        let lhs = be.value(h.value(&xi));
        let rhs = consts.gamma / (2.0 * (p - 1.0) * p) * r.powf(p) - c_star;
        let slack = lhs - rhs;
        worst_slack = worst_slack.min(slack / (1.0 + lhs.abs()));
        rep.observe((-slack / (1.0 + lhs.abs())).max(0.0), || xi.clone());
    }
    rep.push_detail("coercivity_min_relative_slack", worst_slack);
    rep.conclude(1e-12);
    Ok(rep)
}

/// `c⋆ = γ/((p-1)p)·(1 + (p-1)2^{1/(p-1)})·(κ̄+1)^p` for `1 < p < 2`, else `0`.
pub fn coercivity_offset(b: &BFunction, gamma: f64) -> Result<f64> {
    let Family::APrime { p, kappa, .. } = b.family() else {
        return Err(Error::Hypothesis(format!("{} carries no (A)′ parameters", b.name())));
    };
    if p >= 2.0 {
        return Ok(0.0);
    }
    Ok(gamma / ((p - 1.0) * p) * (1.0 + (p - 1.0) * 2f64.powf(1.0 / (p - 1.0))) * (kappa + 1.0).powf(p))
}

/// Measured sup-gaps of `B_ε` against `B` and of `β_ε` against `β` on `[0, M]`,
/// with the linear-in-ε bounds and the ε-uniform Lipschitz bounds.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceGap {
    pub b_gap: f64,
    pub beta_gap: f64,
    /// `2‖B'‖_{C⁰([0,2M])}ε`.
    pub b_bound: f64,
    /// `(‖B'‖_{C⁰([0,2M])} + Lip(β; [0,2M]))ε`.
    pub beta_bound: f64,
    /// Lipschitz constants of `B_ε`, `β_ε` on `[0, M]` against their bounds.
    pub b_lipschitz: (f64, f64),
    pub beta_lipschitz: (f64, f64),
}

impl ConvergenceGap {
    pub fn within_bounds(&self) -> bool {
        self.b_gap <= self.b_bound
            && self.beta_gap <= self.beta_bound
            && self.b_lipschitz.0 <= self.b_lipschitz.1
            && self.beta_lipschitz.0 <= self.beta_lipschitz.1
    }
}

const GRID: usize = 10_000;

pub fn convergence_gap(b: &BFunction, eps: f64, m: f64) -> Result<ConvergenceGap> {
    if !(m >= 1.0) || !m.is_finite() {
        return Err(Error::Range(format!("M must be ≥ 1, got {m}")));
    }
    let be = b_epsilon(b, eps)?;
    let grid = |hi: f64| (0..=GRID).map(move |i| hi * i as f64 / GRID as f64);
    let mut b_gap: f64 = 0.0;
    let mut beta_gap: f64 = 0.0;
    let mut lip_be: f64 = 0.0;
    let mut lip_betae: f64 = 0.0;
    for t in grid(m) {
        b_gap = b_gap.max((be.value(t) - b.value(t)).abs());
        beta_gap = beta_gap.max((be.beta(t) - b.beta(t)).abs());
        lip_be = lip_be.max(be.d1(t).abs());
        // β_ε' = B_ε'' t + B_ε'
        lip_betae = lip_betae.max((be.d2(t) * t + be.d1(t)).abs());
    }
    let mut sup_b1: f64 = 0.0;
    let mut lip_beta: f64 = 0.0;
    for t in grid(2.0 * m).skip(1) {
        sup_b1 = sup_b1.max(b.d1(t).abs());
        lip_beta = lip_beta.max((b.d2(t) * t + b.d1(t)).abs());
    }
    Ok(ConvergenceGap {
        b_gap,
        beta_gap,
        b_bound: 2.0 * sup_b1 * eps,
        beta_bound: (sup_b1 + lip_beta) * eps,
        b_lipschitz: (lip_be, sup_b1),
        beta_lipschitz: (lip_betae, 2.0 * sup_b1 + lip_beta),
    })
}

/// `B̂ = B` on `[0, M)` and `B(M) + B'(M)(t-M) + B''(M)(t-M)²/2` beyond.
/// Needs a non-degenerate (A)′ family; the result is (A)′ with `p = 2`,
/// `γ̂ = γ̄ min{κ̄^{p-2}, (κ̄+M)^{p-2}}`, `Γ̂ = Γ̄ max{…}`.
pub fn quadratic_cap(b: &BFunction, m: f64) -> Result<BFunction> {
    let Family::APrime {
        p,
        kappa,
        gamma,
        big_gamma,
    } = b.family()
    else {
        return Err(Error::Hypothesis(format!("{} carries no (A)′ parameters", b.name())));
    };
    if !(kappa > 0.0) {
        return Err(Error::Hypothesis("the quadratic cap needs κ̄ > 0".into()));
    }
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Range(format!("M must be positive, got {m}")));
    }
    let (a0, a1) = (kappa.powf(p - 2.0), (kappa + m).powf(p - 2.0));
    let family = Family::APrime {
        p: 2.0,
        kappa,
        gamma: gamma * a0.min(a1),
        big_gamma: big_gamma * a0.max(a1),
    };
    let (c, bb, a) = (b.value(m), b.d1(m), 0.5 * b.d2(m));
    let (f0, f1, f2) = (b.clone(), b.clone(), b.clone());
    Ok(BFunction::new(
        format!("{} capped at M={m}", b.name()),
        move |t| if t < m { f0.value(t) } else { a * (t - m).powi(2) + bb * (t - m) + c },
        move |t| if t < m { f1.d1(t) } else { 2.0 * a * (t - m) + bb },
        move |t| if t < m { f2.d2(t) } else { 2.0 * a },
        family,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::{EllipsoidNorm, Euclidean};

    fn grid() -> Vec<f64> {
        (1..=10_000).map(|i| 10.0 * i as f64 / 10_000.0).collect()
    }

    #[test]
    fn quadratic_is_fixed() {
        let b = BFunction::quadratic();
        for &eps in &[0.5, 1e-2, 1e-5] {
            let be = b_epsilon(&b, eps).unwrap();
            for &t in &[0.0, 1e-7, 0.3, 4.0] {
                assert_eq!(be.value(t), b.value(t));
                assert_eq!(be.d1(t), t);
                assert_eq!(be.d2(t), 1.0);
            }
        }
    }

    #[test]
    fn cubic_value_by_arithmetic() {
        let b = BFunction::power(3.0).unwrap();
        let be = b_epsilon(&b, 0.1).unwrap();
        let want = (1.01f64.powf(1.5) - 0.001) / 3.0;
        assert!((be.value(1.0) - want).abs() < 1e-15);
        assert_eq!(be.value(0.0), 0.0);
        assert_eq!(be.d1(0.0), 0.0);
    }

    #[test]
    fn derivatives_match_differences() {
        let b = BFunction::regularized_power(1.5, 0.1).unwrap();
        let be = b_epsilon(&b, 0.01).unwrap();
        // series branch: B_ε(t) ≈ B'(ε)t²/(2ε)
        let t = 5e-7;
        let want = b.d1(0.01) / 0.01 * t * t / 2.0;
        assert!((be.value(t) - want).abs() < 1e-6 * want);
        for &t in &[1e-4f64, 1e-3, 0.2, 2.0] {
            let h = 1e-6 * t.max(1e-2);
            let fd1 = (be.value(t + h) - be.value(t - h)) / (2.0 * h);
            let fd2 = (be.d1(t + h) - be.d1(t - h)) / (2.0 * h);
            assert!((fd1 - be.d1(t)).abs() < 1e-6 * be.d1(t).abs().max(1e-9), "t={t}");
            assert!((fd2 - be.d2(t)).abs() < 1e-6 * be.d2(t), "t={t}");
        }
    }

    #[test]
    fn bounds_hold_for_cubic_and_singular_power() {
        let h = Euclidean::new(2);
        for b in [BFunction::power(3.0).unwrap(), BFunction::regularized_power(1.5, 0.1).unwrap()] {
            for &eps in &[1e-1, 1e-2, 1e-3] {
                let rep = check_b_epsilon_bounds(&b, eps, &grid(), &h, 500, 3).unwrap();
                assert!(rep.passed(), "{} {rep}", b.name());
            }
        }
    }

    #[test]
    fn coercivity_offset_is_eps_independent() {
        let b = BFunction::regularized_power(1.5, 0.1).unwrap();
        let h = EllipsoidNorm::diagonal(&[2.0, 1.0]).unwrap();
        let offsets: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&e| {
                let rep = check_b_epsilon_bounds(&b, e, &grid(), &h, 200, 1).unwrap();
                assert!(rep.passed(), "{rep}");
                rep.detail("c_star").unwrap()
            })
            .collect();
        assert!(offsets.iter().all(|c| *c == offsets[0] && *c > 0.0));
    }

    #[test]
    fn cubic_gap_bound() {
        let b = BFunction::power(3.0).unwrap();
        let g = convergence_gap(&b, 1e-2, 1.0).unwrap();
        assert!((g.b_bound - 0.08).abs() < 1e-12);
        assert!(g.within_bounds(), "{g:?}");
        let q = convergence_gap(&BFunction::quadratic(), 1e-2, 1.0).unwrap();
        assert_eq!(q.b_gap, 0.0);
        assert!(q.within_bounds());
    }

    #[test]
    fn gap_shrinks_at_least_linearly() {
        let b = BFunction::regularized_power(1.5, 0.1).unwrap();
        let g1 = convergence_gap(&b, 0.02, 1.0).unwrap();
        let g2 = convergence_gap(&b, 0.01, 1.0).unwrap();
        let rate = (g1.b_gap / g2.b_gap).log2();
        assert!(rate >= 0.9, "rate {rate}");
    }

    #[test]
    fn cap_is_c2_and_quadratic_fixed() {
        let b = BFunction::regularized_power(1.5, 0.1).unwrap();
        let cap = quadratic_cap(&b, 2.0).unwrap();
        let m = 2.0;
        let below = m * (1.0 - f64::EPSILON);
        assert!((cap.value(below) - cap.value(m)).abs() < 1e-14);
        assert!((cap.d1(below) - cap.d1(m)).abs() < 1e-14);
        assert!((cap.d2(below) - cap.d2(m)).abs() < 1e-14);
        let Family::APrime { gamma, .. } = cap.family() else { panic!() };
        // γ̄ = 1/2, min{0.1^{-1/2}, 2.1^{-1/2}} = 2.1^{-1/2}
        assert!((gamma - 0.5 / 2.1f64.sqrt()).abs() < 1e-15);
        assert!(validate_assumption_a_prime(&cap, &grid()).unwrap().passed());

        let q = BFunction::quadratic().with_family(Family::APrime {
            p: 2.0,
            kappa: 0.5,
            gamma: 1.0,
            big_gamma: 1.0,
        });
        let qc = quadratic_cap(&q, 1.0).unwrap();
        for &t in &[0.3, 1.0, 7.0] {
            assert!((qc.value(t) - q.value(t)).abs() < 1e-15);
        }
        assert!(matches!(quadratic_cap(&BFunction::power(3.0).unwrap(), 1.0), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn gradient_of_composition_is_lipschitz_near_origin() {
        let b = BFunction::regularized_power(1.5, 0.0).unwrap();
        let be = b_epsilon(&b, 0.1).unwrap();
        let h = EllipsoidNorm::diagonal(&[2.0, 1.0]).unwrap();
        let mut worst: f64 = 0.0;
        for k in 1..=200 {
            let r = 10f64.powf(-8.0 * k as f64 / 200.0);
            let xi = [r * 0.6, r * 0.8];
            let g = h.gradient(&xi).unwrap() * be.d1(h.value(&xi));
            worst = worst.max(g.norm() / r);
        }
        assert!(worst.is_finite() && worst < 1e2);
    }

    #[test]
    fn rejects_eps_outside_unit_interval() {
        let b = BFunction::quadratic();
        assert!(b_epsilon(&b, 0.0).is_err());
        assert!(b_epsilon(&b, 1.0).is_err());
    }
}
