use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which structural assumption a nonlinearity is declared to satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `γ̄(κ̄+t)^{p-2}t ≤ B'(t) ≤ Γ̄(κ̄+t)^{p-2}t` and the same bounds for
    /// `B''` without the factor `t`.
    APrime {
        p: f64,
        kappa: f64,
        gamma: f64,
        big_gamma: f64,
    },
    /// `B''(0) > 0` and `B'''(0) = 0`.
    BPrime,
    Unspecified,
}

/// The nonlinearity `B` together with `B'`, `B''` and optionally `B'''`.
#[derive(Clone)]
pub struct BFunction {
    name: String,
    f: ScalarFn,
    d1: ScalarFn,
    d2: ScalarFn,
    d3: Option<ScalarFn>,
    family: Family,
}

impl fmt::Debug for BFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BFunction")
            .field("name", &self.name)
            .field("family", &self.family)
            .field("has_d3", &self.d3.is_some())
            .finish()
    }
}

impl BFunction {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        family: Family,
    ) -> Self {
        BFunction {
            name: name.into(),
            f: Arc::new(f),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            d3: None,
            family,
        }
    }

    pub fn with_third(mut self, d3: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d3 = Some(Arc::new(d3));
        self
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// `p` of the (A)′ family; `2` otherwise.
    pub fn p(&self) -> f64 {
        match self.family {
            Family::APrime { p, .. } => p,
            _ => 2.0,
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    #[inline]
    pub fn d1(&self, t: f64) -> f64 {
        (self.d1)(t)
    }

    #[inline]
    pub fn d2(&self, t: f64) -> f64 {
        (self.d2)(t)
    }

    pub fn d3(&self, t: f64) -> Option<f64> {
        self.d3.as_ref().map(|d| d(t))
    }

    pub fn has_d3(&self) -> bool {
        self.d3.is_some()
    }

    /// `β(t) = B'(t)t`.
    pub fn beta(&self, t: f64) -> f64 {
        self.d1(t) * t
    }

    /// `t²/2`, which lies in both families.
    pub fn quadratic() -> Self {
        BFunction::new("t^2/2", |t| 0.5 * t * t, |t| t, |_| 1.0, Family::APrime {
            p: 2.0,
            kappa: 0.0,
            gamma: 1.0,
            big_gamma: 1.0,
        })
        .with_third(|_| 0.0)
    }

    /// `t^p/p` with `γ̄ = min(1, p-1)`, `Γ̄ = max(1, p-1)`, `κ̄ = 0`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Range(format!("power B needs p > 1, got {p}")));
        }
        if p == 2.0 {
            return Ok(Self::quadratic());
        }
        Ok(BFunction::new(
            format!("t^{p}/{p}"),
            move |t: f64| t.powf(p) / p,
            move |t: f64| t.powf(p - 1.0),
            move |t: f64| (p - 1.0) * t.powf(p - 2.0),
            Family::APrime {
                p,
                kappa: 0.0,
                gamma: (p - 1.0).min(1.0),
                big_gamma: (p - 1.0).max(1.0),
            },
        )
        .with_third(move |t: f64| (p - 1.0) * (p - 2.0) * t.powf(p - 3.0)))
    }

    /// `B'(t) = (κ+t)^{p-2}t`, the non-degenerate companion of `t^p/p`.
    pub fn regularized_power(p: f64, kappa: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Range(format!("power B needs p > 1, got {p}")));
        }
        if !(0.0..1.0).contains(&kappa) {
            return Err(Error::Range(format!("κ̄ must lie in [0, 1), got {kappa}")));
        }
        if kappa == 0.0 {
            return Self::power(p);
        }
        let value = move |t: f64| {
            if t < 1e-3 * kappa {
                // series avoids the cancellation in the closed form
                kappa.powf(p - 2.0)
                    * (t * t / 2.0
                        + (p - 2.0) * t.powi(3) / (3.0 * kappa)
                        + (p - 2.0) * (p - 3.0) * t.powi(4) / (8.0 * kappa * kappa))
            } else {
                let s = kappa + t;
                (s.powf(p) - kappa.powf(p)) / p - kappa * (s.powf(p - 1.0) - kappa.powf(p - 1.0)) / (p - 1.0)
            }
        };
        Ok(BFunction::new(
            format!("regularized {p}-power, κ̄={kappa}"),
            value,
            move |t: f64| (kappa + t).powf(p - 2.0) * t,
            move |t: f64| (kappa + t).powf(p - 3.0) * (kappa + (p - 1.0) * t),
            Family::APrime {
                p,
                kappa,
                gamma: (p - 1.0).min(1.0),
                big_gamma: (p - 1.0).max(1.0),
            },
        )
        .with_third(move |t: f64| {
            let s = kappa + t;
            (p - 2.0) * s.powf(p - 4.0) * (2.0 * kappa + (p - 1.0) * t)
        }))
    }

    /// `Σ c_k t^k` for the given coefficients (index = power).
    pub fn polynomial(coeffs: &[f64], family: Family) -> Self {
        let c: Arc<[f64]> = coeffs.into();
        let (c0, c1, c2, c3) = (c.clone(), c.clone(), c.clone(), c.clone());
        let name = poly_name(coeffs);
        BFunction::new(
            name,
            move |t| horner(&c0, 0, t),
            move |t| horner(&c1, 1, t),
            move |t| horner(&c2, 2, t),
            family,
        )
        .with_third(move |t| horner(&c3, 3, t))
    }
}

// k-th derivative of Σ c_i t^i
fn horner(c: &[f64], k: usize, t: f64) -> f64 {
    let mut acc = 0.0;
    for i in (k..c.len()).rev() {
        let fall: f64 = (0..k).map(|j| (i - j) as f64).product();
        acc = acc * t + c[i] * fall;
    }
    acc
}

fn poly_name(c: &[f64]) -> String {
    let terms: Vec<String> = c
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| format!("{v}t^{i}"))
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        let b = BFunction::polynomial(&[0.0, 0.0, 0.5, 1.0], Family::BPrime);
        assert_eq!(b.value(2.0), 2.0 + 8.0);
        assert_eq!(b.d1(2.0), 2.0 + 12.0);
        assert_eq!(b.d2(2.0), 1.0 + 12.0);
        assert_eq!(b.d3(0.0), Some(6.0));
    }

    #[test]
    fn regularized_power_derivatives_match_differences() {
        let b = BFunction::regularized_power(1.5, 0.1).unwrap();
        for &t in &[1e-5f64, 0.05, 0.7, 3.0] {
            let h = 1e-6 * t.max(1e-3);
            let fd1 = (b.value(t + h) - b.value(t - h)) / (2.0 * h);
            let fd2 = (b.d1(t + h) - b.d1(t - h)) / (2.0 * h);
            let fd3 = (b.d2(t + h) - b.d2(t - h)) / (2.0 * h);
            assert!((fd1 - b.d1(t)).abs() < 1e-6 * b.d1(t).max(1e-12), "t={t}");
            assert!((fd2 - b.d2(t)).abs() < 1e-6 * b.d2(t));
            assert!((fd3 - b.d3(t).unwrap()).abs() < 1e-5 * b.d3(t).unwrap().abs().max(1.0));
        }
        assert_eq!(b.value(0.0), 0.0);
        // series and closed form agree at the switch point
        let t = 1e-4;
        let s: f64 = 0.1 + t;
        let closed = (s.powf(1.5) - 0.1f64.powf(1.5)) / 1.5 - 0.1 * (s.sqrt() - 0.1f64.sqrt()) / 0.5;
        assert!((closed - b.value(t)).abs() < 1e-9 * b.value(t));
    }

    #[test]
    fn power_rejects_bad_exponent() {
        assert!(BFunction::power(1.0).is_err());
        assert!(BFunction::regularized_power(1.5, 1.0).is_err());
    }
}
