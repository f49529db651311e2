//! Positive 1-homogeneous anisotropies `H` with gradient and Hessian access.
//!
//! Every norm implements [`Anisotropy`]. Analytic derivatives are used when a
//! family provides them, otherwise central finite differences with step
//! `1e-5 * max(|ξ|, 1)` are taken.

mod ellipsoid;
mod euclidean;
mod power;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sampling::{self, dot, norm2};

pub use ellipsoid::EllipsoidNorm;
pub use euclidean::Euclidean;
pub use power::{GluedPQNorm, PNorm};

/// Declared regularity of a norm away from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Smoothness {
    C1,
    C2,
    C3,
}

pub type SharedNorm = Arc<dyn Anisotropy>;

pub trait Anisotropy: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn smoothness(&self) -> Smoothness;

    fn name(&self) -> String;

    /// Raw evaluation of `H(ξ)`. Must return `0` at the origin; input is
    /// assumed finite and of length [`Anisotropy::dim`].
    fn value(&self, xi: &[f64]) -> f64;

    /// Writes `∇H(ξ)` into `out` and returns `true` when an analytic form is
    /// available. Only called with `ξ ≠ 0`.
    fn analytic_gradient(&self, _xi: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    /// Analytic Hessian, if the family has one. `Some(Err(..))` marks a point
    /// of the non-C² locus.
    fn analytic_hessian(&self, _xi: &[f64]) -> Option<Result<DMatrix<f64>>> {
        None
    }

    /// The matrix `M` when `H = sqrt(<Mξ, ξ>)`.
    fn ellipsoid_matrix(&self) -> Option<DMatrix<f64>> {
        None
    }

    /// Closed-form dual norm, when one is known.
    fn closed_form_dual(&self) -> Option<SharedNorm> {
        None
    }

    fn evaluate(&self, xi: &[f64]) -> Result<f64> {
        check_input(self.dim(), xi)?;
        Ok(self.value(xi))
    }

    fn gradient_into(&self, xi: &[f64], out: &mut [f64]) -> Result<()> {
        check_input(self.dim(), xi)?;
        if xi.iter().all(|&x| x == 0.0) {
            return Err(Error::SingularPoint("gradient"));
        }
        if !self.analytic_gradient(xi, out) {
            fd_gradient(|v| self.value(v), xi, out);
        }
        Ok(())
    }

    fn gradient(&self, xi: &[f64]) -> Result<DVector<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.gradient_into(xi, &mut out)?;
        Ok(DVector::from_vec(out))
    }

    fn hessian(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        check_input(self.dim(), xi)?;
        if xi.iter().all(|&x| x == 0.0) {
            return Err(Error::SingularPoint("hessian"));
        }
        if let Some(h) = self.analytic_hessian(xi) {
            return h;
        }
        if self.smoothness() < Smoothness::C2 {
            return Err(Error::UnsupportedSmoothness(format!(
                "{} is only C1, Hessian unavailable",
                self.name()
            )));
        }
        Ok(fd_hessian(self, xi))
    }
}

fn check_input(dim: usize, xi: &[f64]) -> Result<()> {
    if xi.len() != dim {
        return Err(Error::Domain(format!(
            "expected a vector of length {dim}, got {}",
            xi.len()
        )));
    }
    if xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite input {xi:?}")));
    }
    Ok(())
}

pub(crate) fn fd_step(xi: &[f64]) -> f64 {
    1e-5 * norm2(xi).max(1.0)
}

/// Central-difference gradient of `f` at `xi`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, xi: &[f64], out: &mut [f64]) {
    let h = fd_step(xi);
    let mut p = xi.to_vec();
    for i in 0..xi.len() {
        p[i] = xi[i] + h;
        let fp = f(&p);
        p[i] = xi[i] - h;
        let fm = f(&p);
        p[i] = xi[i];
        out[i] = (fp - fm) / (2.0 * h);
    }
}

fn fd_hessian<N: Anisotropy + ?Sized>(norm: &N, xi: &[f64]) -> DMatrix<f64> {
    let n = xi.len();
    let h = fd_step(xi);
    let mut hess = DMatrix::zeros(n, n);
    let mut p = xi.to_vec();
    let mut gp = vec![0.0; n];
    let mut gm = vec![0.0; n];
    let grad = |v: &[f64], out: &mut [f64]| {
        if !norm.analytic_gradient(v, out) {
            fd_gradient(|w| norm.value(w), v, out);
        }
    };
    for j in 0..n {
        p[j] = xi[j] + h;
        grad(&p, &mut gp);
        p[j] = xi[j] - h;
        grad(&p, &mut gm);
        p[j] = xi[j];
        for i in 0..n {
            hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    (&hess + hess.transpose()) * 0.5
}

/// Maximum violations of homogeneity and of the Euler identities
/// `H_i ξ_i = H`, `H_ij ξ_i = 0`, `H_ijk ξ_i = -H_jk`.
#[derive(Debug, Clone)]
pub struct EulerReport {
    pub samples: usize,
    pub homogeneity: f64,
    pub gradient_identity: f64,
    /// `None` when the Hessian is unavailable (C1 norms).
    pub hessian_identity: Option<f64>,
    /// `None` unless the norm is tagged C3.
    pub third_order_identity: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Samples `ξ` on the unit sphere and `t ∈ [0.1, 10]` log-uniformly and
/// records the worst violation of each identity.
pub fn check_homogeneity_and_euler<N: Anisotropy + ?Sized>(
    norm: &N,
    sample_count: usize,
    seed: u64,
) -> EulerReport {
    let tol = 1e-8;
    let n = norm.dim();
    let mut rng = sampling::rng(seed);
    let mut homogeneity: f64 = 0.0;
    let mut grad_id: f64 = 0.0;
    let mut hess_id: Option<f64> = None;
    let mut third_id: Option<f64> = None;
    let mut grad = vec![0.0; n];
    for _ in 0..sample_count.max(1) {
        let xi = sampling::unit_sphere(&mut rng, n);
        let t = sampling::log_uniform(&mut rng, 0.1, 10.0);
        let h = norm.value(&xi);
        let txi: Vec<f64> = xi.iter().map(|x| t * x).collect();
        let gap = (norm.value(&txi) - t * h).abs() / (1.0 + t * h);
        homogeneity = homogeneity.max(gap);

        if norm.gradient_into(&xi, &mut grad).is_ok() {
            grad_id = grad_id.max((dot(&grad, &xi) - h).abs());
        }
        if let Ok(hess) = norm.hessian(&xi) {
            let v = &hess * DVector::from_column_slice(&xi);
            hess_id = Some(hess_id.unwrap_or(0.0).max(v.amax()));
            if norm.smoothness() >= Smoothness::C3 {
                // directional derivative of the Hessian along ξ
                let s = 1e-4;
                let up: Vec<f64> = xi.iter().map(|x| (1.0 + s) * x).collect();
                let dn: Vec<f64> = xi.iter().map(|x| (1.0 - s) * x).collect();
                if let (Ok(hp), Ok(hm)) = (norm.hessian(&up), norm.hessian(&dn)) {
                    let d = (hp - hm) / (2.0 * s) + &hess;
                    third_id = Some(third_id.unwrap_or(0.0).max(d.amax()));
                }
            }
        }
    }
    // third-order identity goes through an extra finite difference
    let third_ok = third_id.is_none_or(|v| v < 1e-5);
    let passed = homogeneity <= 1e-10
        && grad_id <= tol
        && hess_id.is_none_or(|v| v <= tol)
        && third_ok;
    EulerReport {
        samples: sample_count.max(1),
        homogeneity,
        gradient_identity: grad_id,
        hessian_identity: hess_id,
        third_order_identity: third_id,
        tolerance: tol,
        passed,
    }
}
