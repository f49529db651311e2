use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;

use super::{ConditionReport, Verdict};
use crate::duality::{psi_inverse, psi_map, DualNorm};
use crate::error::{Error, Result};
use crate::norm::Anisotropy;
use crate::sampling::{self, dot, norm2};

#[derive(Debug, Clone)]
pub struct PairCheckOptions {
    pub samples: usize,
    pub tolerance: f64,
    /// Relative width of the band around zero excluded from sign checks.
    pub band: f64,
    pub seed: u64,
    /// Local coordinate refinement around the worst pair of a failing run.
    pub refine: bool,
    pub keep_trace: bool,
}

impl Default for PairCheckOptions {
    fn default() -> Self {
        PairCheckOptions {
            samples: 1000,
            tolerance: 1e-8,
            band: 1e-8,
            seed: 0,
            refine: true,
            keep_trace: false,
        }
    }
}

struct PairEval {
    lhs: f64,
    rhs: f64,
    scale: f64,
}

fn eval_pair(dual: &DualNorm, xi: &[f64], x: &[f64]) -> Result<PairEval> {
    let h = dual.primal();
    let a = psi_map(h.as_ref(), xi)?;
    let b = psi_inverse(dual, x)?;
    Ok(PairEval {
        lhs: dot(&a, &b),
        rhs: dot(xi, x),
        scale: h.value(xi) * dual.dual_value(x)?,
    })
}

fn draw_pairs(rng: &mut sampling::SampleRng, n: usize, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..count)
        .map(|_| {
            let xi = sampling::scaled_direction(rng, n);
            let x = sampling::scaled_direction(rng, n);
            (xi, x)
        })
        .collect()
}

fn exact_gap(dual: &DualNorm, xi: &[f64], x: &[f64]) -> Result<f64> {
    let e = eval_pair(dual, xi, x)?;
    Ok((e.lhs - e.rhs).abs() / e.scale)
}

/// Samples pairs `(ξ, x)` and measures the relative defect of
/// `<Ψ_H(ξ), Ψ_{H*}(x)> = <ξ, x>`, normalized by `H(ξ)H*(x)`.
pub fn check_exact_condition(dual: &DualNorm, opts: &PairCheckOptions) -> Result<ConditionReport> {
    let n = dual.dim();
    let mut rng = sampling::rng(opts.seed);
    let pairs = draw_pairs(&mut rng, n, opts.samples.max(1));
    let gaps: Vec<f64> = pairs
        .par_iter()
        .map(|(xi, x)| exact_gap(dual, xi, x))
        .collect::<Result<_>>()?;
    let mut rep = ConditionReport::new("exact-pairing");
    for ((xi, x), g) in pairs.iter().zip(&gaps) {
        rep.observe(*g, || [xi.as_slice(), x.as_slice()].concat());
        if opts.keep_trace {
            rep.trace.push([xi.as_slice(), x.as_slice(), &[*g]].concat());
        }
    }
    rep.conclude(opts.tolerance);
    if rep.verdict == Verdict::Fail && opts.refine {
        let w = rep.witness.clone().unwrap_or_default();
        let (best, gap) = refine_witness(w, n, |v| exact_gap(dual, &v[..n], &v[n..]).unwrap_or(0.0));
        if gap > rep.sampled_max_violation {
            rep.sampled_max_violation = gap;
            rep.witness = Some(best);
        }
        rep.notes.push("witness refined by coordinate search".into());
    }
    Ok(rep)
}

/// Coordinate ascent on the (normalized) pair maximizing `gap`.
fn refine_witness(start: Vec<f64>, n: usize, gap: impl Fn(&[f64]) -> f64) -> (Vec<f64>, f64) {
    let normalize = |v: &mut Vec<f64>| {
        let a = norm2(&v[..n]);
        let b = norm2(&v[n..]);
        v[..n].iter_mut().for_each(|c| *c /= a);
        v[n..].iter_mut().for_each(|c| *c /= b);
    };
    let mut cur = start;
    normalize(&mut cur);
    let mut best = gap(&cur);
    let mut step = 0.1;
    let mut iterations = 0;
    while step > 1e-6 && iterations < 2000 {
        iterations += 1;
        let mut improved = false;
        for k in 0..2 * n {
            for s in [step, -step] {
                let mut trial = cur.clone();
                trial[k] += s;
                normalize(&mut trial);
                let g = gap(&trial);
                if g > best {
                    best = g;
                    cur = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (cur, best)
}

/// Compares `sgn<Ψ_H(ξ), Ψ_{H*}(x)>` with `sgn<ξ, x>` until `opts.samples`
/// informative pairs are collected (at most twenty times as many draws).
pub fn check_sign_condition(dual: &DualNorm, opts: &PairCheckOptions) -> Result<ConditionReport> {
    let n = dual.dim();
    let target = opts.samples.max(1);
    let mut rng = sampling::rng(opts.seed);
    let mut rep = ConditionReport::new("sign-agreement");
    let mut drawn = 0;
    while rep.samples_checked < target && drawn < 20 * target {
        let batch = (target - rep.samples_checked).max(64);
        let pairs = draw_pairs(&mut rng, n, batch);
        drawn += batch;
        let evals: Vec<PairEval> = pairs
            .par_iter()
            .map(|(xi, x)| eval_pair(dual, xi, x))
            .collect::<Result<_>>()?;
        for ((xi, x), e) in pairs.iter().zip(&evals) {
            if rep.samples_checked >= target {
                break;
            }
            let band = opts.band * e.scale;
            if e.lhs.abs() < band || e.rhs.abs() < band {
                rep.samples_skipped += 1;
                continue;
            }
            let violation = if (e.lhs > 0.0) != (e.rhs > 0.0) {
                e.lhs.abs().min(e.rhs.abs()) / e.scale
            } else {
                0.0
            };
            rep.observe(violation, || [xi.as_slice(), x.as_slice()].concat());
            if opts.keep_trace {
                rep.trace.push([xi.as_slice(), x.as_slice(), &[violation]].concat());
            }
        }
    }
    rep.conclude(0.0);
    rep.push_detail("band", opts.band);
    Ok(rep)
}

/// Planar check of `<Ψ_H(ξ), η> = 0 ⟺ <ξ, Ψ_H(η)> = 0` in both directions.
pub fn check_orthogonality_condition<N: Anisotropy + ?Sized>(
    h: &N,
    opts: &PairCheckOptions,
) -> Result<ConditionReport> {
    if h.dim() != 2 {
        return Err(Error::Domain("orthogonality check is planar only".into()));
    }
    let mut rng = sampling::rng(opts.seed);
    let dirs: Vec<f64> = (0..opts.samples.max(1))
        .map(|_| rng_angle(&mut rng))
        .collect();
    let rows: Vec<(f64, f64)> = dirs
        .par_iter()
        .map(|&theta| orthogonality_defects(h, theta))
        .collect::<Result<_>>()?;
    let mut rep = ConditionReport::new("orthogonality");
    for (theta, (v1, v2)) in dirs.iter().zip(&rows) {
        rep.observe(v1.max(*v2), || vec![theta.cos(), theta.sin()]);
        if opts.keep_trace {
            rep.trace.push(vec![*theta, *v1, *v2]);
        }
    }
    rep.conclude(opts.tolerance);
    Ok(rep)
}

fn rng_angle(rng: &mut sampling::SampleRng) -> f64 {
    let v = sampling::unit_sphere(rng, 2);
    v[1].atan2(v[0])
}

fn orthogonality_defects<N: Anisotropy + ?Sized>(h: &N, theta: f64) -> Result<(f64, f64)> {
    let xi = [theta.cos(), theta.sin()];
    let y = psi_map(h, &xi)?;
    let eta = [-y[1], y[0]];
    let pe = psi_map(h, &eta)?;
    let first = dot(&xi, &pe).abs() / norm2(&pe);

    // η on the other side: zero of φ ↦ <ξ, Ψ_H(e_φ)> on [θ, θ + π]
    let g = |phi: f64| -> Result<f64> { Ok(dot(&xi, &psi_map(h, &[phi.cos(), phi.sin()])?)) };
    let (mut a, mut b) = (theta, theta + PI);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m)? > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let phi = 0.5 * (a + b);
    let eta2 = [phi.cos(), phi.sin()];
    let second = dot(&y, &eta2).abs() / norm2(&y);
    Ok((first, second))
}

#[derive(Debug, Clone)]
pub struct EllipticityReport {
    /// Minimum sampled tangential Rayleigh quotient on `∂B_1^H`.
    pub lambda: f64,
    pub argmin_angle: f64,
    /// Minima over the four angular quadrants of the sampling circle.
    pub sector_minima: [f64; 4],
    /// Samples where the Hessian was unavailable.
    pub unavailable: usize,
    /// Best constant in the scaled form `H_ij ζ_i ζ_j ≥ λ|ξ|^{-1}|ζ|²`,
    /// evaluated at radii 1/2 and 2.
    pub scaled_lambda: [f64; 2],
    pub scaled_form_consistent: bool,
}

/// Tangential Rayleigh quotient `H_ij(ξ)ζ_iζ_j/|ζ|²`, `ζ ⊥ ∇H(ξ)`, minimized
/// over `angular_samples` points of the unit sphere of `H`.
pub fn ellipticity_constant<N: Anisotropy + ?Sized>(h: &N, angular_samples: usize) -> Result<EllipticityReport> {
    if h.dim() != 2 {
        return Err(Error::Domain("ellipticity constant is planar only".into()));
    }
    let m = angular_samples.max(8);
    let quotient = |xi: &[f64]| -> Option<f64> {
        let g = h.gradient(xi).ok()?;
        let zeta = [-g[1], g[0]];
        let hess = h.hessian(xi).ok()?;
        let z2 = dot(&zeta, &zeta);
        let q = hess[(0, 0)] * zeta[0] * zeta[0]
            + 2.0 * hess[(0, 1)] * zeta[0] * zeta[1]
            + hess[(1, 1)] * zeta[1] * zeta[1];
        Some(q / z2)
    };
    let rows: Vec<(f64, Option<f64>, Option<f64>, Option<f64>)> = (0..m)
        .into_par_iter()
        .map(|k| {
            let theta = TAU * k as f64 / m as f64;
            let e = [theta.cos(), theta.sin()];
            let hv = h.value(&e);
            let xi = [e[0] / hv, e[1] / hv];
            let r = norm2(&xi);
            let q = quotient(&xi);
            let scaled = |t: f64| quotient(&[t * xi[0], t * xi[1]]).map(|v| v * t * r);
            (theta, q, scaled(0.5), scaled(2.0))
        })
        .collect();
    let mut lambda = f64::INFINITY;
    let mut argmin = 0.0;
    let mut sectors = [f64::INFINITY; 4];
    let mut unavailable = 0;
    let mut scaled = [f64::INFINITY; 2];
    let mut consistent = true;
    for (theta, q, s1, s2) in rows {
        match q {
            Some(v) => {
                if v < lambda {
                    lambda = v;
                    argmin = theta;
                }
                let s = ((theta / FRAC_PI_2) as usize).min(3);
                sectors[s] = sectors[s].min(v);
            }
            None => unavailable += 1,
        }
        if let (Some(a), Some(b)) = (s1, s2) {
            scaled[0] = scaled[0].min(a);
            scaled[1] = scaled[1].min(b);
            consistent &= (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1e-300);
        }
    }
    Ok(EllipticityReport {
        lambda,
        argmin_angle: argmin,
        sector_minima: sectors,
        unavailable,
        scaled_lambda: scaled,
        scaled_form_consistent: consistent,
    })
}

/// A constant `C ≥ 1` with `C^{-1}|ξ| ≤ H(ξ) ≤ C|ξ|`, `|∇H| ≤ C` and
/// `|Hess H(ξ)| ≤ C|ξ|^{-1}` (Frobenius norm) on sampled unit directions.
pub fn norm_bound_constant<N: Anisotropy + ?Sized>(h: &N, samples: usize, seed: u64) -> f64 {
    let n = h.dim();
    let mut rng = sampling::rng(seed);
    let mut c: f64 = 1.0;
    for k in 0..samples.max(1) {
        let xi = if n == 2 {
            let t = TAU * k as f64 / samples.max(1) as f64;
            vec![t.cos(), t.sin()]
        } else {
            sampling::unit_sphere(&mut rng, n)
        };
        let v = h.value(&xi);
        c = c.max(v).max(1.0 / v);
        if let Ok(g) = h.gradient(&xi) {
            c = c.max(g.norm());
        }
        if let Ok(hs) = h.hessian(&xi) {
            c = c.max(hs.norm());
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::shared;
    use crate::norm::{EllipsoidNorm, Euclidean, GluedPQNorm, PNorm};
    use nalgebra::DMatrix;

    fn opts(samples: usize, seed: u64) -> PairCheckOptions {
        PairCheckOptions {
            samples,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn ellipsoids_satisfy_exact_pairing() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let d = DualNorm::new(shared(EllipsoidNorm::new(m).unwrap()));
        let rep = check_exact_condition(&d, &opts(1000, 1)).unwrap();
        assert!(rep.passed(), "{rep}");
        let d = DualNorm::new(shared(Euclidean::new(3)));
        let rep = check_exact_condition(&d, &opts(200, 1)).unwrap();
        assert!(rep.sampled_max_violation < 1e-14);
    }

    #[test]
    fn glued_norm_fails_exact_pairing_with_witness() {
        let d = DualNorm::new(shared(GluedPQNorm::new(3.0).unwrap()));
        let rep = check_exact_condition(&d, &opts(2000, 2)).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.sampled_max_violation >= 1e-2, "{rep}");
        assert_eq!(rep.witness.as_ref().unwrap().len(), 4);
    }

    #[test]
    fn sign_condition_glued_passes_pnorm_fails() {
        let d = DualNorm::new(shared(GluedPQNorm::new(3.0).unwrap()));
        let rep = check_sign_condition(&d, &opts(3000, 3)).unwrap();
        assert!(rep.passed(), "{rep}");
        assert_eq!(rep.samples_checked, 3000);
        let d = DualNorm::new(shared(PNorm::planar(3.0).unwrap()));
        let rep = check_sign_condition(&d, &opts(20000, 4)).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail, "{rep}");
        assert!(rep.witness.is_some());
    }

    #[test]
    fn sign_condition_all_skipped_is_indeterminate() {
        let d = DualNorm::new(shared(Euclidean::new(2)));
        let o = PairCheckOptions {
            samples: 50,
            band: 1e3,
            ..Default::default()
        };
        let rep = check_sign_condition(&d, &o).unwrap();
        assert_eq!(rep.verdict, Verdict::Indeterminate);
        assert!(rep.samples_skipped > 0);
    }

    #[test]
    fn orthogonality() {
        let o = PairCheckOptions {
            samples: 500,
            tolerance: 1e-6,
            ..Default::default()
        };
        let rep = check_orthogonality_condition(&Euclidean::new(2), &o).unwrap();
        assert!(rep.sampled_max_violation < 1e-14, "{rep}");
        let rep = check_orthogonality_condition(&GluedPQNorm::new(3.0).unwrap(), &o).unwrap();
        assert!(rep.passed(), "{rep}");
        let rep = check_orthogonality_condition(&PNorm::planar(3.0).unwrap(), &o).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn ellipticity_values() {
        let rep = ellipticity_constant(&Euclidean::new(2), 720).unwrap();
        assert!((rep.lambda - 1.0).abs() < 1e-12);
        assert!(rep.scaled_form_consistent);
        let rep = ellipticity_constant(&EllipsoidNorm::diagonal(&[4.0, 1.0]).unwrap(), 2048).unwrap();
        // dense oracle: quotient of H_M on its unit circle
        let oracle = (0..200_000)
            .map(|k| {
                let t = TAU * k as f64 / 200_000.0;
                let (x, y) = (t.cos() / 2.0, t.sin());
                // H = sqrt(4x²+y²) is 1 on (x, y); Hess = (M - gg^T)/H
                let g = [4.0 * x, y];
                let z = [-g[1], g[0]];
                let q = 4.0 * z[0] * z[0] + z[1] * z[1] - (g[0] * z[0] + g[1] * z[1]).powi(2);
                q / (z[0] * z[0] + z[1] * z[1])
            })
            .fold(f64::INFINITY, f64::min);
        assert!(rep.lambda > 0.0 && (rep.lambda - oracle).abs() < 1e-4, "{} {oracle}", rep.lambda);
        let rep = ellipticity_constant(&GluedPQNorm::new(3.0).unwrap(), 4096).unwrap();
        assert!(rep.lambda < 0.05, "{rep:?}");
        assert!(rep.unavailable > 0);
    }

    #[test]
    fn bound_constant_of_ellipse() {
        let c = norm_bound_constant(&EllipsoidNorm::diagonal(&[4.0, 1.0]).unwrap(), 1000, 0);
        assert!(c >= 2.0 && c < 10.0);
    }
}
