use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::sync::Arc;

use crate::conditions::ConditionReport;
use crate::error::{Error, Result};

type Derivs = Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync>;

/// Regularity class of a first-quadrant profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileClass {
    C2,
    /// `C^{3,α}`: `r'''` is available and the matching conditions apply.
    C3Alpha,
}

/// A first-quadrant radial profile `r : [0, π/2] → (0, ∞)` with derivatives.
/// `r(0) = 1`, `r(π/2) = r*`, `r'(0) = r'(π/2) = 0` are expected.
#[derive(Clone)]
pub struct RadialProfile {
    name: String,
    // (r, r', r'', r''') at θ; r''' is NaN when unavailable
    eval: Derivs,
    r_star: f64,
    class: ProfileClass,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("name", &self.name)
            .field("r_star", &self.r_star)
            .field("class", &self.class)
            .finish()
    }
}

impl RadialProfile {
    /// Builds a profile from a callable returning `(r, r', r'', r''')`.
    /// `r*` is read off as `r(π/2)`.
    pub fn from_derivatives(
        name: impl Into<String>,
        class: ProfileClass,
        eval: impl Fn(f64) -> [f64; 4] + Send + Sync + 'static,
    ) -> Self {
        let r_star = eval(FRAC_PI_2)[0];
        RadialProfile {
            name: name.into(),
            eval: Arc::new(eval),
            r_star,
            class,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    pub fn class(&self) -> ProfileClass {
        self.class
    }

    #[inline]
    pub fn derivs(&self, theta: f64) -> [f64; 4] {
        (self.eval)(theta)
    }

    pub fn r(&self, theta: f64) -> f64 {
        self.derivs(theta)[0]
    }

    pub fn d1(&self, theta: f64) -> f64 {
        self.derivs(theta)[1]
    }

    pub fn d2(&self, theta: f64) -> f64 {
        self.derivs(theta)[2]
    }

    pub fn d3(&self, theta: f64) -> Option<f64> {
        let v = self.derivs(theta)[3];
        (self.class == ProfileClass::C3Alpha && v.is_finite()).then_some(v)
    }

    /// The unit circle, `r ≡ 1`.
    pub fn circle() -> Self {
        Self::from_derivatives("circle", ProfileClass::C3Alpha, |_| [1.0, 0.0, 0.0, 0.0])
    }

    /// First-quadrant profile of the ellipse `x² + y²/r*² = 1`.
    pub fn ellipse(r_star: f64) -> Result<Self> {
        if !(r_star >= 1.0) || !r_star.is_finite() {
            return Err(Error::Range(format!("ellipse profile needs r* ≥ 1, got {r_star}")));
        }
        let a = 1.0 / (r_star * r_star);
        Ok(Self::from_derivatives(
            format!("ellipse r*={r_star}"),
            ProfileClass::C3Alpha,
            move |t| {
                let (s2, c2) = (2.0 * t).sin_cos();
                let g = t.cos().powi(2) + a * t.sin().powi(2);
                let g1 = (a - 1.0) * s2;
                let g2 = 2.0 * (a - 1.0) * c2;
                let g3 = -4.0 * (a - 1.0) * s2;
                let r = g.powf(-0.5);
                let r1 = -0.5 * g.powf(-1.5) * g1;
                let r2 = 0.75 * g.powf(-2.5) * g1 * g1 - 0.5 * g.powf(-1.5) * g2;
                let r3 = -15.0 / 8.0 * g.powf(-3.5) * g1.powi(3) + 2.25 * g.powf(-2.5) * g1 * g2
                    - 0.5 * g.powf(-1.5) * g3;
                [r, r1, r2, r3]
            },
        ))
    }

    /// First-quadrant profile of the unit circle of the `p`-norm, `p ≥ 2`.
    pub fn p_norm(p: f64) -> Result<Self> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::Range(format!("p-norm profile needs p ≥ 2, got {p}")));
        }
        Ok(Self::from_derivatives(format!("{p}-norm"), ProfileClass::C2, move |t| {
            let (s, c) = t.sin_cos();
            let (s, c) = (s.max(0.0), c.max(0.0));
            let sp = c.powf(p) + s.powf(p);
            let s1 = p * (s.powf(p - 1.0) * c - c.powf(p - 1.0) * s);
            let s2 = p * ((p - 1.0) * (c.powf(p - 2.0) * s * s + s.powf(p - 2.0) * c * c) - sp);
            let k = -1.0 / p;
            let r = sp.powf(k);
            let r1 = k * sp.powf(k - 1.0) * s1;
            let r2 = k * (k - 1.0) * sp.powf(k - 2.0) * s1 * s1 + k * sp.powf(k - 1.0) * s2;
            [r, r1, r2, f64::NAN]
        }))
    }

    /// `base·(1 + εψ)`; with `ψ` supported inside `(0, π/2)` the endpoint data
    /// of `base` are preserved.
    pub fn perturbed_by(base: &RadialProfile, psi: Bump, eps: f64) -> Self {
        let b = base.clone();
        let class = base.class;
        Self::from_derivatives(
            format!("{}·(1+{eps}ψ)", base.name),
            class,
            move |t| {
                let [r0, r1, r2, r3] = b.derivs(t);
                let [p0, p1, p2, p3] = psi.derivs(t);
                let m = 1.0 + eps * p0;
                [
                    r0 * m,
                    r1 * m + r0 * eps * p1,
                    r2 * m + 2.0 * r1 * eps * p1 + r0 * eps * p2,
                    r3 * m + 3.0 * r2 * eps * p1 + 3.0 * r1 * eps * p2 + r0 * eps * p3,
                ]
            },
        )
    }

    /// Clamped cubic spline through `(θ_k, r_k)` on `[0, π/2]` with
    /// `r'(0) = r'(π/2) = 0`. Derivatives are those of the spline.
    pub fn from_samples(thetas: &[f64], radii: &[f64]) -> Result<Self> {
        let spline = ClampedSpline::new(thetas, radii)?;
        if (thetas[0]).abs() > 1e-12 || (thetas[thetas.len() - 1] - FRAC_PI_2).abs() > 1e-12 {
            return Err(Error::InvalidProfile("samples must span exactly [0, π/2]".into()));
        }
        Ok(Self::from_derivatives("sampled", ProfileClass::C2, move |t| {
            let [a, b, c] = spline.eval(t);
            [a, b, c, f64::NAN]
        }))
    }
}

/// Rotates and scales samples `(θ, r)` of a convex body (any angular range)
/// into the normalized frame: the maximal radius is moved to `π/2` and the
/// radius at `0` becomes `1`. Returns samples on `[0, π/2]`.
pub fn normalize_samples(thetas: &[f64], radii: &[f64], count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if thetas.len() != radii.len() || thetas.len() < 8 {
        return Err(Error::InvalidProfile("need at least 8 matching (θ, r) samples".into()));
    }
    let mut pts: Vec<(f64, f64)> = thetas.iter().map(|t| t.rem_euclid(TAU)).zip(radii.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (tmax, _) = pts
        .iter()
        .copied()
        .fold((0.0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    let shift = FRAC_PI_2 - tmax;
    // periodic linear interpolation in the rotated frame
    let interp = |theta: f64| -> f64 {
        let t = (theta - shift).rem_euclid(TAU);
        let k = pts.partition_point(|p| p.0 <= t);
        let (a, b) = if k == 0 {
            (pts[pts.len() - 1], (pts[0].0 + TAU, pts[0].1))
        } else if k == pts.len() {
            (pts[k - 1], (pts[0].0 + TAU, pts[0].1))
        } else {
            (pts[k - 1], pts[k])
        };
        let (a0, b0) = if k == 0 { (a.0 - TAU, b.0 - TAU) } else { (a.0, b.0) };
        let w = if b0 > a0 { (t - a0) / (b0 - a0) } else { 0.0 };
        a.1 + w * (b.1 - a.1)
    };
    let r0 = interp(0.0);
    if !(r0 > 0.0) {
        return Err(Error::InvalidProfile("non-positive radius in samples".into()));
    }
    let count = count.max(8);
    let th: Vec<f64> = (0..count).map(|k| FRAC_PI_2 * k as f64 / (count - 1) as f64).collect();
    let rs: Vec<f64> = th.iter().map(|&t| interp(t) / r0).collect();
    Ok((th, rs))
}

struct ClampedSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives at the knots
}

impl ClampedSpline {
    fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 4 || y.len() != n {
            return Err(Error::InvalidProfile("need at least 4 matching samples".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || y.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidProfile("samples must be increasing with positive radii".into()));
        }
        // tridiagonal system for the knot second derivatives, clamped slopes 0
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        b[0] = 2.0 * h[0];
        c[0] = h[0];
        d[0] = 6.0 * ((y[1] - y[0]) / h[0]);
        for i in 1..n - 1 {
            a[i] = h[i - 1];
            b[i] = 2.0 * (h[i - 1] + h[i]);
            c[i] = h[i];
            d[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        a[n - 1] = h[n - 2];
        b[n - 1] = 2.0 * h[n - 2];
        d[n - 1] = -6.0 * ((y[n - 1] - y[n - 2]) / h[n - 2]);
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = d[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
        }
        Ok(ClampedSpline {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    fn eval(&self, t: f64) -> [f64; 3] {
        let n = self.x.len();
        let k = self.x.partition_point(|v| *v <= t).clamp(1, n - 1) - 1;
        let h = self.x[k + 1] - self.x[k];
        let a = (self.x[k + 1] - t) / h;
        let b = (t - self.x[k]) / h;
        let (m0, m1) = (self.m[k], self.m[k + 1]);
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let v = a * y0 + b * y1 + ((a.powi(3) - a) * m0 + (b.powi(3) - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let d2 = a * m0 + b * m1;
        [v, d1, d2]
    }
}

/// `ψ(θ) = (1 - s²)^4`, `s = (θ - centre)/half_width`, zero for `|s| ≥ 1`.
/// It is `C^{3,1}`.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub centre: f64,
    pub half_width: f64,
}

impl Bump {
    pub fn new(centre: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || centre - half_width <= 0.0 || centre + half_width >= FRAC_PI_2 {
            return Err(Error::Range(format!(
                "bump support [{}, {}] must lie inside (0, π/2)",
                centre - half_width,
                centre + half_width
            )));
        }
        Ok(Bump { centre, half_width })
    }

    /// The bump on `[π/8, 3π/8]`.
    pub fn standard() -> Self {
        Bump {
            centre: PI / 4.0,
            half_width: PI / 8.0,
        }
    }

    pub fn derivs(&self, theta: f64) -> [f64; 4] {
        let w = self.half_width;
        let s = (theta - self.centre) / w;
        if s.abs() >= 1.0 {
            return [0.0; 4];
        }
        let q = 1.0 - s * s;
        [
            q.powi(4),
            -8.0 * s * q.powi(3) / w,
            (-8.0 * q.powi(3) + 48.0 * s * s * q * q) / (w * w),
            (144.0 * s * q * q - 192.0 * s.powi(3) * q) / (w * w * w),
        ]
    }

    /// `c_ψ = ‖ψ''‖ + 2‖ψ‖ + ‖ψ‖‖ψ''‖ + 2‖ψ'‖² + ‖ψ‖²` (sup norms), so that
    /// `r r'' - 2r'² - r² ≤ -1 + c_ψ ε` for `r = 1 + εψ`, `ε ≤ 1`.
    pub fn c_psi(&self) -> f64 {
        let mut n = [0.0f64; 3];
        for k in 0..=20_000 {
            let t = FRAC_PI_2 * k as f64 / 20_000.0;
            let d = self.derivs(t);
            for i in 0..3 {
                n[i] = n[i].max(d[i].abs());
            }
        }
        n[2] + 2.0 * n[0] + n[0] * n[2] + 2.0 * n[1] * n[1] + n[0] * n[0]
    }
}

/// Endpoint data, the strict convexity inequality `r r'' < 2r'² + r²` (margin
/// reported as the grid minimum of `2r'² + r² - r r''`) and the bound
/// `-cot η < r'/r < tan η`. Margins below `1e-6` are flagged borderline.
pub fn validate_profile(r: &RadialProfile, grid_size: usize) -> Result<ConditionReport> {
    if grid_size < 16 {
        return Err(Error::Range(format!("grid size {grid_size} < 16")));
    }
    let [r0, d0, ..] = r.derivs(0.0);
    let [rs, ds, ..] = r.derivs(FRAC_PI_2);
    let endpoint = [(r0 - 1.0).abs(), d0.abs(), ds.abs()].into_iter().fold(0.0, f64::max);
    if endpoint > 1e-10 || !(rs >= 1.0 - 1e-10) {
        return Err(Error::ProfileRejected {
            margin: f64::NAN,
            reason: format!(
                "endpoint data violated: r(0)={r0}, r'(0)={d0}, r(π/2)={rs}, r'(π/2)={ds}"
            ),
        });
    }
    let mut rep = ConditionReport::new("profile");
    let mut margin = f64::INFINITY;
    let mut lemma_slack = f64::INFINITY;
    for k in 0..=grid_size {
        let eta = FRAC_PI_2 * k as f64 / grid_size as f64;
        let [v, d1, d2, _] = r.derivs(eta);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::ProfileRejected {
                margin: f64::NAN,
                reason: format!("non-positive radius at θ = {eta}"),
            });
        }
        let m = 2.0 * d1 * d1 + v * v - v * d2;
        margin = margin.min(m);
        // scale-free violation of the strict inequality
        rep.observe((-m / (v * v)).max(0.0), || vec![eta]);
        if k > 0 && k < grid_size {
            let q = d1 / v;
            let slack = (eta.tan() - q).min(q + 1.0 / eta.tan());
            lemma_slack = lemma_slack.min(slack);
            rep.observe((-slack).max(0.0), || vec![eta]);
        }
    }
    rep.push_detail("margin", margin);
    rep.push_detail("lemma_slack", lemma_slack);
    rep.conclude(1e-12);
    if rep.passed() && margin < 1e-6 {
        rep.push_detail("borderline", 1.0);
        rep.notes.push(format!("convexity margin {margin:.3e} below 1e-6: borderline (a.e. condition)"));
    }
    Ok(rep)
}

/// `r_ψ = base·(1 + εψ)` validated on a 2048-point grid; rejected with the
/// measured margin when the convexity inequality fails.
pub fn perturbed_profile(base: &RadialProfile, psi: Bump, eps: f64) -> Result<RadialProfile> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Range(format!("ε must be non-negative, got {eps}")));
    }
    let prof = RadialProfile::perturbed_by(base, psi, eps);
    let rep = validate_profile(&prof, 2048)?;
    if !rep.passed() {
        return Err(Error::ProfileRejected {
            margin: rep.detail("margin").unwrap_or(f64::NAN),
            reason: format!("ε = {eps} too large for this ψ"),
        });
    }
    Ok(prof)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(p: &RadialProfile, upto: usize) {
        for &t in &[0.1, 0.5, 0.8, 1.2, 1.5] {
            let h = 1e-5;
            let a = p.derivs(t + h);
            let b = p.derivs(t - h);
            let d = p.derivs(t);
            for i in 0..upto {
                let fd = (a[i] - b[i]) / (2.0 * h);
                assert!((fd - d[i + 1]).abs() < 1e-6 * d[i + 1].abs().max(1.0), "{} i={i} t={t}", p.name());
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        fd_check(&RadialProfile::ellipse(2.0).unwrap(), 3);
        fd_check(&RadialProfile::p_norm(3.0).unwrap(), 2);
        fd_check(&RadialProfile::perturbed_by(&RadialProfile::ellipse(1.5).unwrap(), Bump::standard(), 0.3), 3);
    }

    #[test]
    fn ellipse_second_derivative_at_zero() {
        let e = RadialProfile::ellipse(2.0).unwrap();
        assert!((e.d2(0.0) - 0.75).abs() < 1e-14);
        assert!((e.r_star() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn circle_margin_is_one() {
        let rep = validate_profile(&RadialProfile::circle(), 64).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.detail("margin"), Some(1.0));
    }

    #[test]
    fn three_norm_profile_is_borderline_pass() {
        let p = RadialProfile::p_norm(3.0).unwrap();
        assert!((p.d2(0.0) - 1.0).abs() < 1e-12);
        let rep = validate_profile(&p, 1000).unwrap();
        assert!(rep.passed(), "{rep}");
        assert_eq!(rep.detail("borderline"), Some(1.0));
        // independent oracle for the margin on the interior
        let oracle = (1..1000)
            .map(|k| {
                let t = FRAC_PI_2 * k as f64 / 1000.0;
                let f = |t: f64| (t.cos().powi(3) + t.sin().powi(3)).powf(-1.0 / 3.0);
                let h = 1e-4;
                let (a, b, c) = (f(t - h), f(t), f(t + h));
                let d1 = (c - a) / (2.0 * h);
                let d2 = (c - 2.0 * b + a) / (h * h);
                2.0 * d1 * d1 + b * b - b * d2
            })
            .fold(f64::INFINITY, f64::min);
        assert!(oracle > 0.0);
    }

    #[test]
    fn perturbation_margin_and_rejection() {
        let psi = Bump::standard();
        let circle = RadialProfile::circle();
        assert!(perturbed_profile(&circle, psi, 0.0).is_ok());
        let p = perturbed_profile(&circle, psi, 1e-2).unwrap();
        let rep = validate_profile(&p, 2048).unwrap();
        assert!(rep.detail("margin").unwrap() >= 1.0 - psi.c_psi() * 1e-2);
        match perturbed_profile(&circle, psi, 10.0) {
            Err(Error::ProfileRejected { margin, .. }) => assert!(margin < 0.0),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn endpoint_violation_rejected() {
        let bad = RadialProfile::from_derivatives("bad", ProfileClass::C2, |t| [1.0 + t, 1.0, 0.0, 0.0]);
        assert!(matches!(validate_profile(&bad, 32), Err(Error::ProfileRejected { .. })));
    }

    #[test]
    fn spline_reproduces_smooth_profile() {
        let e = RadialProfile::ellipse(1.5).unwrap();
        let th: Vec<f64> = (0..=200).map(|k| FRAC_PI_2 * k as f64 / 200.0).collect();
        let rs: Vec<f64> = th.iter().map(|&t| e.r(t)).collect();
        let s = RadialProfile::from_samples(&th, &rs).unwrap();
        for &t in &[0.0, 0.3, 0.77, 1.3, FRAC_PI_2] {
            assert!((s.r(t) - e.r(t)).abs() < 1e-7);
            assert!((s.d2(t) - e.d2(t)).abs() < 2e-2);
        }
        assert!(validate_profile(&s, 512).unwrap().passed());
    }

    #[test]
    fn normalization_moves_maximum_to_quarter_turn() {
        // ellipse with long axis along x, scaled by 3
        let th: Vec<f64> = (0..720).map(|k| TAU * k as f64 / 720.0).collect();
        let rs: Vec<f64> = th
            .iter()
            .map(|&t| 3.0 * (t.cos().powi(2) / 4.0 + t.sin().powi(2)).powf(-0.5))
            .collect();
        let (nt, nr) = normalize_samples(&th, &rs, 91).unwrap();
        assert!((nr[0] - 1.0).abs() < 1e-12);
        assert!((nr[90] - 2.0).abs() < 1e-9);
        assert!((nt[90] - FRAC_PI_2).abs() < 1e-15);
    }
}
