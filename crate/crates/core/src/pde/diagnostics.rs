use rayon::prelude::*;

use crate::conditions::{coercivity_margin, BFunction, ConditionReport, Verdict};
use crate::duality::DualNorm;
use crate::error::{Error, Result};
use crate::norm::SharedNorm;

use super::field::GridField;
use super::problem::{Potential, ProblemSpec};

/// Membership in the open Wulff shape `W_R(center) = {x : H*(x - center) < R}`.
pub fn wulff_indicator(h: &SharedNorm, r: f64, x: &[f64], center: &[f64]) -> Result<bool> {
    if !(r > 0.0) {
        return Err(Error::Range(format!("Wulff radius must be positive, got {r}")));
    }
    if x.len() != center.len() {
        return Err(Error::Domain("point and center differ in dimension".into()));
    }
    let d: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
    Ok(DualNorm::new(h.clone()).dual_value(&d)? < r)
}

/// `c_u = sup F` over the range `[u_*, u*]` of the field.
pub fn gauge(f: &Potential, field: &GridField) -> f64 {
    let (lo, hi) = (field.u_min(), field.u_max());
    if hi - lo <= 0.0 {
        return f.value(lo);
    }
    const N: usize = 4096;
    let step = (hi - lo) / N as f64;
    let (mut best, mut at) = (f64::NEG_INFINITY, lo);
    for k in 0..=N {
        let t = lo + step * k as f64;
        let v = f.value(t);
        if v > best {
            best = v;
            at = t;
        }
    }
    let (mut a, mut b) = ((at - step).max(lo), (at + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..80 {
        if f.value(c) > f.value(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    best.max(f.value(0.5 * (a + b)))
}

/// `B'(H(g))H(g) - B(H(g))`.
pub fn p_function(b: &BFunction, h: &SharedNorm, grad: &[f64]) -> f64 {
    let t = h.value(grad);
    b.d1(t) * t - b.value(t)
}

/// `E(R)` and `∫_{W_R} G(u)` over a list of radii.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrace {
    pub radii: Vec<f64>,
    pub energies: Vec<f64>,
    pub masses: Vec<f64>,
    pub center: [f64; 2],
    pub h: f64,
}

impl EnergyTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# wulff-energy-trace v1\nR,energy,mass\n");
        for k in 0..self.radii.len() {
            s.push_str(&format!("{},{},{}\n", self.radii[k], self.energies[k], self.masses[k]));
        }
        s
    }
}

struct Densities {
    dual_dist: Vec<f64>,
    kinetic: Vec<f64>,
    potential: Vec<f64>,
}

fn densities(spec: &ProblemSpec, field: &GridField, center: [f64; 2]) -> Result<Densities> {
    let dual = DualNorm::new(spec.norm.clone());
    let c_u = gauge(&spec.potential, field);
    let (nx, ny) = (field.nx, field.ny);
    let rows: Vec<Vec<[f64; 3]>> = (0..ny - 1)
        .into_par_iter()
        .map(|j| {
            (0..nx - 1)
                .map(|i| {
                    let (x, y) = field.center(i, j);
                    let d = dual.dual_value(&[x - center[0], y - center[1]])?;
                    let k = spec.b.value(spec.norm.value(&field.grad(i, j)));
                    let g = c_u - spec.potential.value(field.at(i, j));
                    Ok([d, k, g])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = Densities {
        dual_dist: Vec::new(),
        kinetic: Vec::new(),
        potential: Vec::new(),
    };
    for [d, k, g] in rows.into_iter().flatten() {
        out.dual_dist.push(d);
        out.kinetic.push(k);
        out.potential.push(g);
    }
    Ok(out)
}

fn admissible(norm: &SharedNorm, bounds: (f64, f64, f64, f64), h: f64, r: f64, center: [f64; 2]) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Range(format!("Wulff radius must be positive, got {r}")));
    }
    let margin = 2.0 * h;
    let (xmin, xmax, ymin, ymax) = bounds;
    for (axis, lo, hi) in [(0usize, xmin, xmax), (1, ymin, ymax)] {
        let mut e = [0.0; 2];
        e[axis] = 1.0;
        // the extent of {H* < R} along e is R·H(e)
        let reach = r * norm.value(&e);
        if center[axis] - reach < lo + margin || center[axis] + reach > hi - margin {
            return Err(Error::Range(format!(
                "Wulff ball of radius {r} around {center:?} leaves the domain (reach {reach} along axis {axis})"
            )));
        }
    }
    Ok(())
}

/// Range error unless every `W_R(center)` stays `2h` inside the problem box.
pub fn check_radii(spec: &ProblemSpec, radii: &[f64], center: [f64; 2]) -> Result<()> {
    let a = spec.half_width;
    let bounds = (spec.center[0] - a, spec.center[0] + a, spec.center[1] - a, spec.center[1] + a);
    radii.iter().try_for_each(|&r| admissible(&spec.norm, bounds, spec.h(), r, center))
}

/// `E(R) = R^{-1} ∫_{W_R} B(H(∇u)) + G(u)`, summed over cells whose centres
/// lie in `W_R(center)`.
pub fn rescaled_energy(spec: &ProblemSpec, field: &GridField, r: f64, center: [f64; 2]) -> Result<f64> {
    Ok(energy_trace(spec, field, &[r], center)?.energies[0])
}

pub fn energy_trace(spec: &ProblemSpec, field: &GridField, radii: &[f64], center: [f64; 2]) -> Result<EnergyTrace> {
    if radii.is_empty() {
        return Err(Error::Range("no radii given".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Range(format!("radii must be strictly increasing, got {radii:?}")));
    }
    for &r in radii {
        admissible(&spec.norm, field.extent(), field.h, r, center)?;
    }
    let dens = densities(spec, field, center)?;
    let h2 = field.h * field.h;
    let mut energies = Vec::with_capacity(radii.len());
    let mut masses = Vec::with_capacity(radii.len());
    for &r in radii {
        let (mut e, mut m) = (0.0, 0.0);
        for k in 0..dens.dual_dist.len() {
            if dens.dual_dist[k] < r {
                e += dens.kinetic[k] + dens.potential[k];
                m += dens.potential[k];
            }
        }
        energies.push(e * h2 / r);
        masses.push(m * h2);
    }
    Ok(EnergyTrace {
        radii: radii.to_vec(),
        energies,
        masses,
        center,
        h: field.h,
    })
}

/// Passes iff `E(R_{k+1}) - E(R_k) ≥ -tol·(1 + E(R_k))` for every `k`;
/// `tol` defaults to `5h`.
pub fn check_monotonicity(trace: &EnergyTrace, tol: Option<f64>) -> Result<ConditionReport> {
    let n = trace.radii.len();
    if n < 3 || trace.energies.len() != n {
        return Err(Error::Range(format!("monotonicity needs at least 3 radii, got {n}")));
    }
    let tol = tol.unwrap_or(5.0 * trace.h);
    let mut rep = ConditionReport::new("monotonicity");
    let mut worst_drop = 0.0f64;
    for k in 0..n - 1 {
        let (a, b) = (trace.energies[k], trace.energies[k + 1]);
        let slack = tol * (1.0 + a);
        worst_drop = worst_drop.max(a - b);
        let violation = (a - b - slack).max(0.0);
        rep.observe(violation, || vec![k as f64, trace.radii[k], a, b]);
    }
    rep.push_detail("tol", tol);
    rep.push_detail("largest_decrease", worst_drop);
    rep.conclude(0.0);
    if let (Verdict::Fail, Some(w)) = (rep.verdict, &rep.witness) {
        rep.notes.push(format!("E decreases between index {} and {}", w[0], w[0] + 1.0));
    }
    Ok(rep)
}

/// Cellwise `P(∇u) ≤ G(u) + slack` and `B(H(∇u)) ≤ G(u)/δ + slack`, with `u`
/// averaged over the four cells sharing the gradient stencil.
pub fn check_pointwise_bound(spec: &ProblemSpec, field: &GridField, slack: f64) -> Result<ConditionReport> {
    let c_u = gauge(&spec.potential, field);
    let (nx, ny) = (field.nx, field.ny);
    let mut rows = Vec::with_capacity((nx - 1) * (ny - 1));
    let mut k_max = 0.0f64;
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let g = field.grad(i, j);
            let t = spec.norm.value(&g);
            k_max = k_max.max(t);
            let u = 0.25 * (field.at(i, j) + field.at(i + 1, j) + field.at(i, j + 1) + field.at(i + 1, j + 1));
            let (x, y) = field.center(i, j);
            let pot = c_u - spec.potential.value(u);
            rows.push([x + 0.5 * field.h, y + 0.5 * field.h, spec.b.d1(t) * t - spec.b.value(t), spec.b.value(t), pot]);
        }
    }
    let delta = if k_max > 0.0 { coercivity_margin(&spec.b, k_max)? } else { 1.0 };
    let mut rep = ConditionReport::new("pointwise_bound");
    let (mut sum_p, mut sum_g, mut worst_p, mut worst_b) = (0.0, 0.0, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for [x, y, p, bv, g] in rows {
        sum_p += p;
        sum_g += g;
        let ep = p - g;
        let eb = bv - g / delta;
        worst_p = worst_p.max(ep);
        worst_b = worst_b.max(eb);
        rep.observe((ep.max(eb) - slack).max(0.0), || vec![x, y, p, bv, g]);
    }
    rep.push_detail("delta", delta);
    rep.push_detail("slack", slack);
    rep.push_detail("max_P_minus_G", worst_p);
    rep.push_detail("max_B_minus_G_over_delta", worst_b);
    rep.push_detail("measured_ratio", if sum_g > 0.0 { sum_p / sum_g } else { 0.0 });
    rep.conclude(0.0);
    Ok(rep)
}

/// Fits `mass(R) ≈ cR^s` and flags the growth condition `s < 0.8` as
/// plausibly satisfied. When `field` is given it is treated as a verified
/// solution, and a flagged fit then requires its oscillation to be at most
/// `osc_tol`.
pub fn liouville_mass_test(trace: &EnergyTrace, field: Option<&GridField>, osc_tol: f64) -> Result<ConditionReport> {
    let n = trace.radii.len();
    if n < 4 {
        return Err(Error::Range(format!("mass fit needs at least 4 radii, got {n}")));
    }
    if trace.radii[n - 1] < 4.0 * trace.radii[0] {
        return Err(Error::Range(format!(
            "radii must span a factor of at least 4, got [{}, {}]",
            trace.radii[0],
            trace.radii[n - 1]
        )));
    }
    let mut rep = ConditionReport::new("liouville_mass");
    let scale = trace.radii[n - 1] * trace.radii[n - 1];
    let degenerate = trace.masses.iter().all(|m| m.abs() <= 1e-14 * scale);
    let slope = if degenerate {
        rep.notes.push("all masses vanish: growth condition trivially satisfied".into());
        0.0
    } else {
        let pts: Vec<(f64, f64)> = trace
            .radii
            .iter()
            .zip(&trace.masses)
            .filter(|(_, m)| **m > 0.0)
            .map(|(r, m)| (r.ln(), m.ln()))
            .collect();
        if pts.len() < 2 {
            return Err(Error::Range("fewer than two positive masses to fit".into()));
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    let flagged = degenerate || slope < 0.8;
    rep.push_detail("slope", slope);
    rep.push_detail("flag", if flagged { 1.0 } else { 0.0 });
    rep.samples_checked = n;
    if let Some(f) = field {
        let osc = f.oscillation();
        rep.push_detail("oscillation", osc);
        if flagged && osc > osc_tol {
            rep.observe(osc - osc_tol, || vec![slope, osc]);
            rep.notes.push("mass growth is sublinear but the solution is not constant".into());
        }
    }
    rep.conclude(0.0);
    Ok(rep)
}
