//! Dual norms `H*(x) = sup_{|ξ|=1} <x, ξ>/H(ξ)`, the map `Ψ_H = H∇H` and
//! the polarity identities.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::norm::{Anisotropy, EllipsoidNorm, SharedNorm, Smoothness};
use crate::sampling::{self, dot, norm2};

const SCAN: usize = 4096;
const BRACKET_WIDTH: f64 = 1e-12;
const RESTARTS: usize = 32;
const STALE_RESTARTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualStrategy {
    ClosedForm,
    NumericSup,
}

/// `H*` for a given primal norm. Ellipsoids use `H_{M^{-1}}` unless the
/// numeric strategy is forced.
#[derive(Debug, Clone)]
pub struct DualNorm {
    primal: SharedNorm,
    strategy: DualStrategy,
    closed: Option<SharedNorm>,
    // (cos φ_k, sin φ_k, 1/H(e_φ_k)) on the coarse angular grid
    table: Vec<[f64; 3]>,
}

impl DualNorm {
    pub fn new(primal: SharedNorm) -> Self {
        let strategy = if primal.closed_form_dual().is_some() {
            DualStrategy::ClosedForm
        } else {
            DualStrategy::NumericSup
        };
        Self::with_strategy(primal, strategy)
    }

    /// Falls back to the numeric supremum when no closed form exists.
    pub fn with_strategy(primal: SharedNorm, strategy: DualStrategy) -> Self {
        let closed = match strategy {
            DualStrategy::ClosedForm => primal.closed_form_dual(),
            DualStrategy::NumericSup => None,
        };
        let strategy = if closed.is_some() {
            DualStrategy::ClosedForm
        } else {
            DualStrategy::NumericSup
        };
        let table = if closed.is_none() && primal.dim() == 2 {
            (0..SCAN)
                .map(|k| {
                    let phi = TAU * k as f64 / SCAN as f64;
                    let (s, c) = phi.sin_cos();
                    [c, s, 1.0 / primal.value(&[c, s])]
                })
                .collect()
        } else {
            Vec::new()
        };
        DualNorm {
            primal,
            strategy,
            closed,
            table,
        }
    }

    pub fn primal(&self) -> &SharedNorm {
        &self.primal
    }

    pub fn strategy(&self) -> DualStrategy {
        self.strategy
    }

    /// `H*(x)`, or a convergence error carrying the best value found.
    pub fn dual_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.primal.dim() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("invalid dual argument {x:?}")));
        }
        if let Some(d) = &self.closed {
            return Ok(d.value(x));
        }
        if x.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        Ok(self.maximize(x)?.0)
    }

    /// Numeric supremum together with the maximizing unit direction.
    fn maximize(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if self.primal.dim() == 2 {
            let (v, phi) = self.sup_planar(x)?;
            Ok((v, vec![phi.cos(), phi.sin()]))
        } else {
            self.sup_ascent(x)
        }
    }

    fn objective(&self, x: &[f64], phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        (x[0] * c + x[1] * s) / self.primal.value(&[c, s])
    }

    fn sup_planar(&self, x: &[f64]) -> Result<(f64, f64)> {
        let vals: Vec<f64> = self
            .table
            .iter()
            .map(|t| (x[0] * t[0] + x[1] * t[1]) * t[2])
            .collect();
        // local maxima of the scan, best first; refine a few of them
        let mut peaks: Vec<usize> = (0..SCAN)
            .filter(|&k| {
                let prev = vals[(k + SCAN - 1) % SCAN];
                let next = vals[(k + 1) % SCAN];
                vals[k] >= prev && vals[k] >= next && vals[k] > 0.0
            })
            .collect();
        peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
        peaks.truncate(4);
        let step = TAU / SCAN as f64;
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0.0;
        let mut best_bracket = (0.0, 0.0);
        for &k in &peaks {
            let centre = step * k as f64;
            let (v, bracket) = self.golden(x, centre - step, centre + step)?;
            let (v, at) = if v >= vals[k] {
                (v, 0.5 * (bracket.0 + bracket.1))
            } else {
                (vals[k], centre)
            };
            if v > best {
                best = v;
                arg = at;
                best_bracket = bracket;
            }
        }
        if !best.is_finite() || best <= 0.0 {
            return Err(Error::DualConvergence {
                best,
                bracket: best_bracket,
            });
        }
        Ok((best, arg))
    }

    fn golden(&self, x: &[f64], mut a: f64, mut b: f64) -> Result<(f64, (f64, f64))> {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = self.objective(x, c);
        let mut fd = self.objective(x, d);
        let mut iterations = 0;
        while b - a > BRACKET_WIDTH {
            iterations += 1;
            if iterations > 200 {
                return Err(Error::DualConvergence {
                    best: fc.max(fd),
                    bracket: (a, b),
                });
            }
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = self.objective(x, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = self.objective(x, d);
            }
        }
        Ok((fc.max(fd), (a, b)))
    }

    /// Projected ascent on the sphere with restarts, for `n ≥ 3`.
    fn sup_ascent(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = x.len();
        let h = &self.primal;
        let f = |xi: &[f64]| dot(x, xi) / h.value(xi);
        let mut rng = sampling::rng(0xd0a1);
        let xn = norm2(x);
        let mut best = f64::NEG_INFINITY;
        let mut arg = vec![0.0; n];
        let mut grad_h = vec![0.0; n];
        let mut stale = 0;
        for restart in 0..RESTARTS {
            if stale >= STALE_RESTARTS {
                break;
            }
            let mut xi: Vec<f64> = if restart == 0 {
                x.iter().map(|v| v / xn).collect()
            } else {
                sampling::unit_sphere(&mut rng, n)
            };
            let mut val = f(&xi);
            let mut step = 0.5;
            for _ in 0..2000 {
                let hv = h.value(&xi);
                if h.gradient_into(&xi, &mut grad_h).is_err() {
                    break;
                }
                let xd = dot(x, &xi);
                let mut g: Vec<f64> = (0..n).map(|i| x[i] / hv - xd * grad_h[i] / (hv * hv)).collect();
                let radial = dot(&g, &xi);
                for i in 0..n {
                    g[i] -= radial * xi[i];
                }
                if norm2(&g) < 1e-15 * xn {
                    break;
                }
                let mut trial: Vec<f64> = (0..n).map(|i| xi[i] + step * g[i]).collect();
                let tn = norm2(&trial);
                trial.iter_mut().for_each(|v| *v /= tn);
                let tv = f(&trial);
                if tv > val {
                    xi = trial;
                    val = tv;
                    step *= 1.5;
                } else {
                    step *= 0.5;
                    if step < 1e-14 {
                        break;
                    }
                }
            }
            if val > best * (1.0 + 1e-13) || !best.is_finite() {
                stale = 0;
            } else {
                stale += 1;
            }
            if val > best {
                best = val;
                arg = xi;
            }
        }
        if !best.is_finite() || best <= 0.0 {
            return Err(Error::DualConvergence {
                best,
                bracket: (best, best),
            });
        }
        Ok((best, arg))
    }
}

impl Anisotropy for DualNorm {
    fn dim(&self) -> usize {
        self.primal.dim()
    }

    fn smoothness(&self) -> Smoothness {
        match &self.closed {
            Some(d) => d.smoothness(),
            None => self.primal.smoothness().min(Smoothness::C2),
        }
    }

    fn name(&self) -> String {
        format!("dual of {}", self.primal.name())
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self.dual_value(x) {
            Ok(v) => v,
            Err(Error::DualConvergence { best, .. }) => best,
            Err(_) => f64::NAN,
        }
    }

    fn analytic_gradient(&self, x: &[f64], out: &mut [f64]) -> bool {
        match &self.closed {
            Some(d) => {
                if !d.analytic_gradient(x, out) {
                    crate::norm::fd_gradient(|v| d.value(v), x, out);
                }
                true
            }
            // envelope theorem: ∇H*(x) = ξ*/H(ξ*) at the maximizer ξ*
            None => match self.maximize(x) {
                Ok((_, xi)) => {
                    let hv = self.primal.value(&xi);
                    for (o, v) in out.iter_mut().zip(&xi) {
                        *o = v / hv;
                    }
                    true
                }
                Err(_) => false,
            },
        }
    }

    fn analytic_hessian(&self, x: &[f64]) -> Option<Result<DMatrix<f64>>> {
        self.closed.as_ref().map(|d| d.hessian(x))
    }

    fn ellipsoid_matrix(&self) -> Option<DMatrix<f64>> {
        self.closed.as_ref().and_then(|d| d.ellipsoid_matrix())
    }

    fn closed_form_dual(&self) -> Option<SharedNorm> {
        self.closed.as_ref().map(|_| self.primal.clone())
    }
}

/// `H*(x)` for a single point. Prefer building a [`DualNorm`] once when many
/// points are needed.
pub fn dual_evaluate(h: &SharedNorm, x: &[f64]) -> Result<f64> {
    DualNorm::new(h.clone()).dual_value(x)
}

/// Like [`dual_evaluate`] but with an explicit strategy.
pub fn dual_evaluate_with(h: &SharedNorm, x: &[f64], strategy: DualStrategy) -> Result<f64> {
    DualNorm::with_strategy(h.clone(), strategy).dual_value(x)
}

/// The closed-form dual `H_{M^{-1}}` of an ellipsoidal norm.
pub fn ellipsoid_dual(m: &DMatrix<f64>) -> Result<EllipsoidNorm> {
    Ok(EllipsoidNorm::new(m.clone())?.inverse())
}

/// `Ψ_H(ξ) = H(ξ)∇H(ξ)`, with `Ψ_H(0) = 0`.
pub fn psi_map<N: Anisotropy + ?Sized>(h: &N, xi: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; h.dim()];
    if xi.iter().all(|&v| v == 0.0) {
        return Ok(out);
    }
    h.gradient_into(xi, &mut out)?;
    let hv = h.evaluate(xi)?;
    out.iter_mut().for_each(|v| *v *= hv);
    Ok(out)
}

/// `Ψ_H^{-1}(y) = Ψ_{H*}(y)`.
pub fn psi_inverse(dual: &DualNorm, y: &[f64]) -> Result<Vec<f64>> {
    if let Some(d) = &dual.closed {
        return psi_map(d.as_ref(), y);
    }
    if y.len() != dual.dim() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("invalid dual argument {y:?}")));
    }
    if y.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; dual.dim()]);
    }
    // H*(y)∇H*(y) = H*(y) ξ*/H(ξ*) from a single maximization
    let (hv, xi) = dual.maximize(y)?;
    let scale = hv / dual.primal.value(&xi);
    Ok(xi.into_iter().map(|v| v * scale).collect())
}

#[derive(Debug, Clone)]
pub struct PolarityReport {
    pub samples: usize,
    /// max |H*(∇H(ξ)) − 1|
    pub primal_side: f64,
    /// max |H(∇H*(ξ)) − 1|
    pub dual_side: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks `H*(∇H(ξ)) = H(∇H*(ξ)) = 1` on random unit directions. Samples
/// within `axis_margin` radians of a coordinate axis are redrawn.
pub fn check_polarity(
    dual: &DualNorm,
    sample_count: usize,
    tolerance: f64,
    axis_margin: f64,
    seed: u64,
) -> Result<PolarityReport> {
    let h = dual.primal();
    let n = h.dim();
    let mut rng = sampling::rng(seed);
    let mut primal_side: f64 = 0.0;
    let mut dual_side: f64 = 0.0;
    let mut g = vec![0.0; n];
    let mut taken = 0;
    while taken < sample_count.max(1) {
        let xi = sampling::unit_sphere(&mut rng, n);
        if axis_margin > 0.0 && xi.iter().any(|v| v.abs() < axis_margin.sin()) {
            continue;
        }
        taken += 1;
        h.gradient_into(&xi, &mut g)?;
        primal_side = primal_side.max((dual.dual_value(&g)? - 1.0).abs());
        dual.gradient_into(&xi, &mut g)?;
        dual_side = dual_side.max((h.evaluate(&g)? - 1.0).abs());
    }
    Ok(PolarityReport {
        samples: taken,
        primal_side,
        dual_side,
        tolerance,
        passed: primal_side <= tolerance && dual_side <= tolerance,
    })
}

pub fn shared<N: Anisotropy + 'static>(n: N) -> SharedNorm {
    Arc::new(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::{Euclidean, GluedPQNorm, PNorm};

    // dense-scan oracle independent of the bracketing code
    fn oracle(h: &dyn Anisotropy, x: &[f64]) -> f64 {
        let n = 400_000;
        (0..n)
            .map(|k| {
                let phi = TAU * k as f64 / n as f64;
                let (s, c) = phi.sin_cos();
                (x[0] * c + x[1] * s) / h.value(&[c, s])
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn euclidean_is_self_dual() {
        let e = shared(Euclidean::new(2));
        assert_eq!(dual_evaluate(&e, &[0.0, 2.0]).unwrap(), 2.0);
        let v = dual_evaluate_with(&e, &[0.0, 2.0], DualStrategy::NumericSup).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ellipsoid_dual_is_matrix_inverse() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let d = ellipsoid_dual(&m).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0]);
        assert!((d.matrix() - expect).amax() < 1e-14);
        let h = shared(EllipsoidNorm::new(m).unwrap());
        let x = [0.7, -1.3];
        let numeric = dual_evaluate_with(&h, &x, DualStrategy::NumericSup).unwrap();
        assert!((numeric - d.value(&x)).abs() < 1e-12 * d.value(&x));
        let diag = shared(EllipsoidNorm::diagonal(&[4.0, 1.0]).unwrap());
        assert!((dual_evaluate(&diag, &[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(ellipsoid_dual(&DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, 1.0])).is_err());
    }

    #[test]
    fn three_norm_dual_is_three_halves_norm() {
        let h = shared(PNorm::planar(3.0).unwrap());
        let v = dual_evaluate(&h, &[1.0, 1.0]).unwrap();
        let o = oracle(h.as_ref(), &[1.0, 1.0]);
        assert!((v - 2f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!(v >= o - 1e-14 && v - o < 1e-9);
    }

    #[test]
    fn numeric_dual_is_homogeneous_and_bounds_pairing() {
        let h = shared(GluedPQNorm::new(3.0).unwrap());
        let d = DualNorm::new(h.clone());
        let mut rng = sampling::rng(4);
        for _ in 0..200 {
            let x = sampling::scaled_direction(&mut rng, 2);
            let xi = sampling::scaled_direction(&mut rng, 2);
            let t = sampling::log_uniform(&mut rng, 0.01, 100.0);
            let dx = d.dual_value(&x).unwrap();
            let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
            assert!((d.dual_value(&tx).unwrap() - t * dx).abs() <= 1e-10 * t * dx);
            assert!(dot(&xi, &x) <= h.value(&xi) * dx * (1.0 + 1e-13));
        }
    }

    #[test]
    fn ascent_dual_in_three_dimensions() {
        let m = DMatrix::from_row_slice(3, 3, &[3.0, 0.5, 0.0, 0.5, 2.0, 0.2, 0.0, 0.2, 1.0]);
        let h = shared(EllipsoidNorm::new(m.clone()).unwrap());
        let exact = ellipsoid_dual(&m).unwrap();
        let x = [0.3, -1.0, 0.5];
        let v = dual_evaluate_with(&h, &x, DualStrategy::NumericSup).unwrap();
        assert!((v - exact.value(&x)).abs() < 1e-8 * exact.value(&x));
    }

    #[test]
    fn psi_round_trip() {
        let h = shared(GluedPQNorm::new(3.0).unwrap());
        let d = DualNorm::new(h.clone());
        let mut rng = sampling::rng(5);
        for _ in 0..100 {
            let xi = sampling::unit_sphere(&mut rng, 2);
            let y = psi_map(h.as_ref(), &xi).unwrap();
            let back = psi_inverse(&d, &y).unwrap();
            let err = norm2(&[back[0] - xi[0], back[1] - xi[1]]);
            assert!(err < 1e-6, "{xi:?} {err:e}");
        }
        assert_eq!(psi_map(h.as_ref(), &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let m = EllipsoidNorm::diagonal(&[4.0, 1.0]).unwrap();
        let y = psi_map(&m, &[1.0, 2.0]).unwrap();
        assert!((y[0] - 4.0).abs() < 1e-14 && (y[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polarity_holds() {
        let d = DualNorm::new(shared(EllipsoidNorm::diagonal(&[4.0, 1.0]).unwrap()));
        let rep = check_polarity(&d, 1000, 1e-8, 0.0, 1).unwrap();
        assert!(rep.passed, "{rep:?}");
        let d = DualNorm::new(shared(GluedPQNorm::new(3.0).unwrap()));
        let rep = check_polarity(&d, 300, 1e-5, 0.05, 2).unwrap();
        assert!(rep.passed, "{rep:?}");
    }
}
