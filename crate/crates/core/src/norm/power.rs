use nalgebra::DMatrix;

use super::{Anisotropy, Smoothness};
use crate::error::{Error, Result};

/// The standard `p`-norm `(Σ|ξ_i|^p)^{1/p}`, `p > 1`.
#[derive(Debug, Clone, Copy)]
pub struct PNorm {
    p: f64,
    dim: usize,
}

impl PNorm {
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Range(format!("p-norm needs 1 < p < ∞, got {p}")));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        Ok(PNorm { p, dim })
    }

    pub fn planar(p: f64) -> Result<Self> {
        Self::new(p, 2)
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

fn pnorm_value(p: f64, xi: &[f64]) -> f64 {
    let m = xi.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = xi.iter().map(|x| (x.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

fn pnorm_gradient(p: f64, xi: &[f64], out: &mut [f64]) {
    let h = pnorm_value(p, xi);
    for (o, x) in out.iter_mut().zip(xi) {
        *o = x.signum() * (x.abs() / h).powf(p - 1.0);
        if *x == 0.0 {
            *o = 0.0;
        }
    }
}

fn pnorm_hessian(p: f64, xi: &[f64]) -> Result<DMatrix<f64>> {
    let n = xi.len();
    if p < 2.0 && xi.contains(&0.0) {
        return Err(Error::UnsupportedSmoothness(format!(
            "{p}-norm Hessian is unbounded where a coordinate vanishes"
        )));
    }
    let h = pnorm_value(p, xi);
    let w: Vec<f64> = xi.iter().map(|x| x.abs() / h).collect();
    let s: Vec<f64> = xi.iter().map(|x| x.signum()).collect();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { w[i].powf(p - 2.0) } else { 0.0 };
        (p - 1.0) / h * (diag - s[i] * s[j] * (w[i] * w[j]).powf(p - 1.0))
    }))
}

impl Anisotropy for PNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn smoothness(&self) -> Smoothness {
        if self.p >= 2.0 {
            Smoothness::C2
        } else {
            Smoothness::C1
        }
    }

    fn name(&self) -> String {
        format!("{}-norm", self.p)
    }

    fn value(&self, xi: &[f64]) -> f64 {
        pnorm_value(self.p, xi)
    }

    fn analytic_gradient(&self, xi: &[f64], out: &mut [f64]) -> bool {
        pnorm_gradient(self.p, xi, out);
        true
    }

    fn analytic_hessian(&self, xi: &[f64]) -> Option<Result<DMatrix<f64>>> {
        Some(pnorm_hessian(self.p, xi))
    }
}

/// The planar norm equal to the `p`-norm where `ξ₁ξ₂ ≥ 0` and to the conjugate
/// `q`-norm, `q = p/(p-1)`, where `ξ₁ξ₂ < 0`. Requires `p > 2`.
#[derive(Debug, Clone, Copy)]
pub struct GluedPQNorm {
    p: f64,
    q: f64,
}

impl GluedPQNorm {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 2.0) || !p.is_finite() {
            return Err(Error::Range(format!("glued p/q norm needs p in (2, ∞), got {p}")));
        }
        Ok(GluedPQNorm { p, q: p / (p - 1.0) })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    fn exponent(&self, xi: &[f64]) -> f64 {
        if xi[0] * xi[1] >= 0.0 {
            self.p
        } else {
            self.q
        }
    }
}

impl Anisotropy for GluedPQNorm {
    fn dim(&self) -> usize {
        2
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::C1
    }

    fn name(&self) -> String {
        format!("glued-pq p={}", self.p)
    }

    fn value(&self, xi: &[f64]) -> f64 {
        pnorm_value(self.exponent(xi), xi)
    }

    fn analytic_gradient(&self, xi: &[f64], out: &mut [f64]) -> bool {
        pnorm_gradient(self.exponent(xi), xi, out);
        true
    }

    fn analytic_hessian(&self, xi: &[f64]) -> Option<Result<DMatrix<f64>>> {
        if xi[0] * xi[1] == 0.0 {
            return Some(Err(Error::UnsupportedSmoothness(format!(
                "glued p/q norm (p={}) is not C2 on the coordinate axes",
                self.p
            ))));
        }
        Some(pnorm_hessian(self.exponent(xi), xi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::check_homogeneity_and_euler;

    #[test]
    fn glued_values() {
        let h = GluedPQNorm::new(3.0).unwrap();
        let v = h.evaluate(&[1.0, -1.0]).unwrap();
        assert!((v - 2f64.powf(2.0 / 3.0)).abs() < 1e-14);
        let v = h.evaluate(&[1.0, 1.0]).unwrap();
        assert!((v - 2f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert!(GluedPQNorm::new(2.0).is_err());
    }

    #[test]
    fn glued_branches_agree_on_axes() {
        let h = GluedPQNorm::new(3.0).unwrap();
        for x in [0.3, -2.0, 7.5] {
            assert_eq!(pnorm_value(3.0, &[x, 0.0]), pnorm_value(1.5, &[x, 0.0]));
            assert_eq!(h.value(&[0.0, x]), x.abs());
        }
    }

    #[test]
    fn glued_hessian_fails_on_axes_only() {
        let h = GluedPQNorm::new(3.0).unwrap();
        assert!(matches!(h.hessian(&[1.0, 0.0]), Err(Error::UnsupportedSmoothness(_))));
        assert!(h.hessian(&[1.0, -0.5]).is_ok());
        let rep = check_homogeneity_and_euler(&h, 500, 9);
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn pnorm_gradient_matches_fd() {
        let h = PNorm::new(3.0, 3).unwrap();
        let xi = [0.4, -1.1, 0.7];
        let g = h.gradient(&xi).unwrap();
        let mut fd = [0.0; 3];
        crate::norm::fd_gradient(|v| h.value(v), &xi, &mut fd);
        for i in 0..3 {
            assert!((g[i] - fd[i]).abs() < 1e-6 * g.norm());
        }
    }
}
