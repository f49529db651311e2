use std::sync::Arc;

use nalgebra::DMatrix;

use super::{Anisotropy, SharedNorm, Smoothness};
use crate::error::{Error, Result};

/// `H_M(ξ) = sqrt(<Mξ, ξ>)` for a symmetric positive-definite `M`.
#[derive(Debug, Clone)]
pub struct EllipsoidNorm {
    m: DMatrix<f64>,
    // row-major copy for allocation-free evaluation
    flat: Vec<f64>,
}

impl EllipsoidNorm {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidMatrix(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidMatrix(format!("not symmetric (asymmetry {asym:.3e})")));
        }
        if m.clone().cholesky().is_none() {
            return Err(Error::InvalidMatrix("not positive definite".into()));
        }
        let n = m.nrows();
        let flat = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
        Ok(EllipsoidNorm { m, flat })
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// The dual ellipsoid `H_{M^{-1}}`.
    pub fn inverse(&self) -> EllipsoidNorm {
        let inv = self
            .m
            .clone()
            .cholesky()
            .expect("checked at construction")
            .inverse();
        let sym = (&inv + inv.transpose()) * 0.5;
        EllipsoidNorm::new(sym).expect("inverse of an SPD matrix is SPD")
    }

    fn apply(&self, xi: &[f64], out: &mut [f64]) {
        let n = xi.len();
        for i in 0..n {
            let row = &self.flat[i * n..(i + 1) * n];
            out[i] = row.iter().zip(xi).map(|(a, b)| a * b).sum();
        }
    }
}

impl Anisotropy for EllipsoidNorm {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::C3
    }

    fn name(&self) -> String {
        let n = self.dim();
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || self.m[(i, j)] == 0.0));
        if is_diag {
            let d: Vec<String> = (0..n).map(|i| format!("{}", self.m[(i, i)])).collect();
            format!("ellipsoid diag({})", d.join(","))
        } else {
            "ellipsoid".into()
        }
    }

    fn value(&self, xi: &[f64]) -> f64 {
        let n = xi.len();
        let mut q = 0.0;
        for i in 0..n {
            let row = &self.flat[i * n..(i + 1) * n];
            let mi: f64 = row.iter().zip(xi).map(|(a, b)| a * b).sum();
            q += mi * xi[i];
        }
        q.max(0.0).sqrt()
    }

    fn analytic_gradient(&self, xi: &[f64], out: &mut [f64]) -> bool {
        self.apply(xi, out);
        let q: f64 = out.iter().zip(xi).map(|(a, b)| a * b).sum();
        let h = q.sqrt();
        for o in out.iter_mut() {
            *o /= h;
        }
        true
    }

    fn analytic_hessian(&self, xi: &[f64]) -> Option<Result<DMatrix<f64>>> {
        let n = xi.len();
        let mut g = vec![0.0; n];
        self.analytic_gradient(xi, &mut g);
        let h = self.value(xi);
        Some(Ok(DMatrix::from_fn(n, n, |i, j| {
            (self.m[(i, j)] - g[i] * g[j]) / h
        })))
    }

    fn ellipsoid_matrix(&self) -> Option<DMatrix<f64>> {
        Some(self.m.clone())
    }

    fn closed_form_dual(&self) -> Option<SharedNorm> {
        Some(Arc::new(self.inverse()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_matrices() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(EllipsoidNorm::new(asym), Err(Error::InvalidMatrix(_))));
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(EllipsoidNorm::new(indef), Err(Error::InvalidMatrix(_))));
        let rect = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(EllipsoidNorm::new(rect).is_err());
    }

    #[test]
    fn diagonal_values() {
        let h = EllipsoidNorm::diagonal(&[4.0, 1.0]).unwrap();
        assert!((h.evaluate(&[1.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!((h.evaluate(&[0.0, 3.0]).unwrap() - 3.0).abs() < 1e-15);
        let inv = h.inverse();
        assert!((inv.evaluate(&[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hessian_annihilates_radial_direction() {
        let m = EllipsoidNorm::new(DMatrix::from_row_slice(3, 3, &[
            3.0, 1.0, 0.0, //
            1.0, 2.0, 0.5, //
            0.0, 0.5, 1.0,
        ]))
        .unwrap();
        let xi = [0.2, -0.4, 0.9];
        let h = m.hessian(&xi).unwrap();
        let v = &h * nalgebra::DVector::from_column_slice(&xi);
        assert!(v.amax() < 1e-14);
    }
}
