use std::sync::Arc;

use nalgebra::DMatrix;

use super::{Anisotropy, SharedNorm, Smoothness};
use crate::error::Result;
use crate::sampling::norm2;

/// The Euclidean norm `|ξ|` in `n` dimensions.
#[derive(Debug, Clone, Copy)]
pub struct Euclidean {
    dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Self {
        Euclidean { dim }
    }
}

impl Anisotropy for Euclidean {
    fn dim(&self) -> usize {
        self.dim
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::C3
    }

    fn name(&self) -> String {
        "euclidean".into()
    }

    fn value(&self, xi: &[f64]) -> f64 {
        norm2(xi)
    }

    fn analytic_gradient(&self, xi: &[f64], out: &mut [f64]) -> bool {
        let r = norm2(xi);
        for (o, x) in out.iter_mut().zip(xi) {
            *o = x / r;
        }
        true
    }

    fn analytic_hessian(&self, xi: &[f64]) -> Option<Result<DMatrix<f64>>> {
        let r = norm2(xi);
        let n = self.dim;
        Some(Ok(DMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            (delta - xi[i] * xi[j] / (r * r)) / r
        })))
    }

    fn ellipsoid_matrix(&self) -> Option<DMatrix<f64>> {
        Some(DMatrix::identity(self.dim, self.dim))
    }

    fn closed_form_dual(&self) -> Option<SharedNorm> {
        Some(Arc::new(*self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_derivatives() {
        let e = Euclidean::new(2);
        assert_eq!(e.evaluate(&[1.0, 0.0]).unwrap(), 1.0);
        let g = e.gradient(&[3.0, 4.0]).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
        let h = e.hessian(&[1.0, 0.0]).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
    }
}
