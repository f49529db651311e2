use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::conditions::BFunction;
use crate::duality::shared;
use crate::error::{Error, Result};
use crate::norm::{EllipsoidNorm, Euclidean, PNorm, SharedNorm};
use crate::pde::{Potential, ProblemSpec, DEFAULT_LADDER};
use crate::planar::{extend_profile, glued_pq_norm, perturbed_profile, support_norm, Bump, ExtendedProfile, RadialProfile};

/// An experiment description, read from TOML.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub norm: NormSpec,
    #[serde(default)]
    pub b: Option<BSpec>,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub trace: Option<TraceSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub energy: Option<EnergySpec>,
    #[serde(default)]
    pub checks: ChecksSpec,
    #[serde(default)]
    pub render: RenderSpec,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    Euclidean,
    PNorm { p: f64 },
    Ellipsoid {
        #[serde(default)]
        diag: Option<Vec<f64>>,
        #[serde(default)]
        matrix: Option<Vec<Vec<f64>>>,
    },
    GluedPq { p: f64 },
    Constructor(ProfileSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    /// `circle`, `ellipse`, `p_norm`, `perturbed` or `samples`.
    pub profile: String,
    #[serde(default)]
    pub r_star: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    /// Base profile of a perturbation (`circle`, `ellipse` or `p_norm`).
    #[serde(default)]
    pub base: Option<String>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub bump_centre: Option<f64>,
    #[serde(default)]
    pub bump_half_width: Option<f64>,
    /// Whitespace-separated `θ r` rows, relative to the config file.
    #[serde(default)]
    pub samples_file: Option<PathBuf>,
    #[serde(default)]
    pub mirrored: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BSpec {
    Quadratic,
    Power { p: f64 },
    RegularizedPower { p: f64, kappa: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    /// `F(t) = -(a² - t²)²/4`.
    DoubleWell {
        #[serde(default = "one")]
        a: f64,
    },
    /// `F(t) = Σ c_k t^k`.
    Polynomial { coeffs: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub half_width: f64,
    pub cells: usize,
    #[serde(default)]
    pub center: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceSpec {
    Constant { value: f64 },
    Affine {
        slope: [f64; 2],
        #[serde(default)]
        offset: f64,
    },
    /// `tanh(<d, x>/width)` with `d` defaulting to `e₁`.
    Tanh {
        width: f64,
        #[serde(default)]
        direction: Option<[f64; 2]>,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iters: Option<u64>,
    #[serde(default)]
    pub eps_ladder: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RadiiSpec {
    List(Vec<f64>),
    Range { from: f64, to: f64, count: usize },
    /// Same syntax as `--radii`.
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySpec {
    pub radii: RadiiSpec,
    #[serde(default)]
    pub center: Option<[f64; 2]>,
    /// Monotonicity tolerance; `5h` when absent.
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default = "default_true")]
    pub assert_monotone: bool,
    /// Slack for the pointwise bound, in units of `h`.
    #[serde(default)]
    pub pointwise_slack_h: Option<f64>,
    #[serde(default)]
    pub liouville: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSpec {
    /// Any of `euler`, `polarity`, `exact`, `sign`, `orthogonality`,
    /// `ellipticity`, `b_prime`.
    #[serde(default)]
    pub run: Vec<String>,
    /// Checks whose failure is expected (negative controls).
    #[serde(default)]
    pub expect_fail: Vec<String>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub keep_trace: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderSpec {
    #[serde(default)]
    pub dual: bool,
    #[serde(default)]
    pub angles: Option<usize>,
}

/// A built norm, with the extended profile when it came from the constructor.
pub struct BuiltNorm {
    pub norm: SharedNorm,
    pub extended: Option<ExtendedProfile>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| {
                    let line = text[..s.start.min(text.len())].lines().count().max(1);
                    format!("line {line}")
                })
                .unwrap_or_else(|| "<document>".into());
            Error::config(field, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        if let NormSpec::Constructor(p) = &mut cfg.norm {
            if let (Some(f), Some(dir)) = (&p.samples_file, path.parent()) {
                if f.is_relative() {
                    p.samples_file = Some(dir.join(f));
                }
            }
        }
        Ok(cfg)
    }

    /// Parse-stage range rules.
    fn validate(&self) -> Result<()> {
        match &self.norm {
            NormSpec::GluedPq { p } if !(*p > 2.0) => {
                return Err(Error::config("norm.p", format!("glued norm needs p > 2, got {p}")));
            }
            NormSpec::PNorm { p } if !(*p > 1.0) => {
                return Err(Error::config("norm.p", format!("p-norm needs p > 1, got {p}")));
            }
            NormSpec::Ellipsoid { diag: None, matrix: None } => {
                return Err(Error::config("norm", "ellipsoid needs `diag` or `matrix`"));
            }
            NormSpec::Constructor(p) => {
                let known = ["circle", "ellipse", "p_norm", "perturbed", "samples"];
                if !known.contains(&p.profile.as_str()) {
                    return Err(Error::config("norm.profile", format!("unknown profile `{}`", p.profile)));
                }
            }
            _ => {}
        }
        if let Some(d) = &self.domain {
            if !(d.half_width > 0.0) {
                return Err(Error::config("domain.half_width", "must be positive"));
            }
            if d.cells < 4 {
                return Err(Error::config("domain.cells", "need at least 4 cells"));
            }
        }
        if let Some(e) = &self.energy {
            let r = e.radii.values().map_err(|m| Error::config("energy.radii", m))?;
            if r.is_empty() {
                return Err(Error::config("energy.radii", "empty radius list"));
            }
        }
        for c in self.checks.run.iter().chain(&self.checks.expect_fail) {
            if !CHECKS.contains(&c.as_str()) {
                return Err(Error::config("checks.run", format!("unknown check `{c}`")));
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn build_norm(&self) -> Result<BuiltNorm> {
        build_norm(&self.norm)
    }

    pub fn build_b(&self) -> Result<BFunction> {
        match self.b.as_ref().unwrap_or(&BSpec::Quadratic) {
            BSpec::Quadratic => Ok(BFunction::quadratic()),
            BSpec::Power { p } => BFunction::power(*p),
            BSpec::RegularizedPower { p, kappa } => BFunction::regularized_power(*p, *kappa),
        }
    }

    pub fn build_potential(&self) -> Potential {
        match self.potential.as_ref().unwrap_or(&PotentialSpec::Zero) {
            PotentialSpec::Zero => Potential::zero(),
            PotentialSpec::DoubleWell { a } => {
                let a2 = a * a;
                Potential::new(
                    format!("-({a}^2-t^2)^2/4"),
                    move |t| -0.25 * (a2 - t * t).powi(2),
                    move |t| t * (a2 - t * t),
                )
            }
            PotentialSpec::Polynomial { coeffs } => {
                let c = coeffs.clone();
                let d = coeffs.clone();
                Potential::new(
                    format!("poly{coeffs:?}"),
                    move |t| c.iter().rev().fold(0.0, |acc, k| acc * t + k),
                    move |t| {
                        d.iter()
                            .enumerate()
                            .skip(1)
                            .rev()
                            .fold(0.0, |acc, (k, c)| acc * t + k as f64 * c)
                    },
                )
            }
        }
    }

    /// The Dirichlet problem, or a config error when `[domain]` or
    /// `[trace]` is missing.
    pub fn build_problem(&self, norm: SharedNorm) -> Result<ProblemSpec> {
        let d = self.domain.as_ref().ok_or_else(|| Error::config("domain", "missing [domain] section"))?;
        let t = self.trace.as_ref().ok_or_else(|| Error::config("trace", "missing [trace] section"))?;
        let (name, f): (String, Box<dyn Fn(f64, f64) -> f64 + Send + Sync>) = match t.clone() {
            TraceSpec::Constant { value } => (format!("{value}"), Box::new(move |_, _| value)),
            TraceSpec::Affine { slope, offset } => (
                format!("{}x + {}y + {offset}", slope[0], slope[1]),
                Box::new(move |x, y| slope[0] * x + slope[1] * y + offset),
            ),
            TraceSpec::Tanh { width, direction } => {
                if !(width > 0.0) {
                    return Err(Error::config("trace.width", "must be positive"));
                }
                let dir = direction.unwrap_or([1.0, 0.0]);
                (
                    format!("tanh(({}x + {}y)/{width})", dir[0], dir[1]),
                    Box::new(move |x, y| ((dir[0] * x + dir[1] * y) / width).tanh()),
                )
            }
        };
        let mut spec = ProblemSpec::new(norm, self.build_b()?, self.build_potential(), d.half_width, d.cells, name, f)?;
        spec.center = d.center.unwrap_or([0.0, 0.0]);
        if let Some(tol) = self.solver.tol {
            spec.tol = tol;
        }
        if let Some(m) = self.solver.max_iters {
            spec.max_iters = m;
        }
        spec.eps_ladder = self.solver.eps_ladder.clone().unwrap_or_else(|| DEFAULT_LADDER.to_vec());
        Ok(spec)
    }
}

pub const CHECKS: [&str; 7] = ["euler", "polarity", "exact", "sign", "orthogonality", "ellipticity", "b_prime"];

impl RadiiSpec {
    pub fn values(&self) -> std::result::Result<Vec<f64>, String> {
        match self {
            RadiiSpec::List(v) => Ok(v.clone()),
            RadiiSpec::Range { from, to, count } => linspace(*from, *to, *count),
            RadiiSpec::Text(t) => parse_radii(t).map_err(|e| e.to_string()),
        }
    }
}

fn linspace(from: f64, to: f64, count: usize) -> std::result::Result<Vec<f64>, String> {
    if count < 2 || !(to > from) {
        return Err(format!("need from < to and count ≥ 2, got {from}:{to}:{count}"));
    }
    Ok((0..count).map(|k| from + (to - from) * k as f64 / (count - 1) as f64).collect())
}

/// `--radii` accepts `a,b,c` or `from:to:count`.
pub fn parse_radii(s: &str) -> Result<Vec<f64>> {
    let bad = |m: String| Error::config("--radii", m);
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("expected from:to:count, got `{s}`")));
        }
        let from = parts[0].trim().parse::<f64>().map_err(|e| bad(e.to_string()))?;
        let to = parts[1].trim().parse::<f64>().map_err(|e| bad(e.to_string()))?;
        let count = parts[2].trim().parse::<usize>().map_err(|e| bad(e.to_string()))?;
        return linspace(from, to, count).map_err(bad);
    }
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| bad(format!("`{p}`: {e}"))))
        .collect()
}

fn need(v: Option<f64>, field: &str) -> Result<f64> {
    v.ok_or_else(|| Error::config(format!("norm.{field}"), "missing"))
}

fn base_profile(name: &str, p: &ProfileSpec) -> Result<RadialProfile> {
    match name {
        "circle" => Ok(RadialProfile::circle()),
        "ellipse" => RadialProfile::ellipse(need(p.r_star, "r_star")?),
        "p_norm" => RadialProfile::p_norm(need(p.p, "p")?),
        other => Err(Error::config("norm.base", format!("unknown base profile `{other}`"))),
    }
}

pub fn build_profile(p: &ProfileSpec) -> Result<RadialProfile> {
    match p.profile.as_str() {
        "perturbed" => {
            let base = base_profile(p.base.as_deref().unwrap_or("ellipse"), p)?;
            let bump = match (p.bump_centre, p.bump_half_width) {
                (None, None) => Bump::standard(),
                (c, w) => Bump::new(
                    c.unwrap_or(std::f64::consts::FRAC_PI_4),
                    w.unwrap_or(std::f64::consts::FRAC_PI_8),
                )?,
            };
            perturbed_profile(&base, bump, need(p.eps, "eps")?)
        }
        "samples" => {
            let f = p
                .samples_file
                .as_ref()
                .ok_or_else(|| Error::config("norm.samples_file", "missing"))?;
            let text = std::fs::read_to_string(f)?;
            let (mut th, mut r) = (Vec::new(), Vec::new());
            for (k, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let v: Vec<f64> = line
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::config(format!("{}:{}", f.display(), k + 1), e.to_string()))?;
                if v.len() != 2 {
                    return Err(Error::config(format!("{}:{}", f.display(), k + 1), "expected `θ r`"));
                }
                th.push(v[0]);
                r.push(v[1]);
            }
            RadialProfile::from_samples(&th, &r)
        }
        name => base_profile(name, p),
    }
}

pub fn build_norm(spec: &NormSpec) -> Result<BuiltNorm> {
    let plain = |norm: SharedNorm| BuiltNorm { norm, extended: None };
    match spec {
        NormSpec::Euclidean => Ok(plain(shared(Euclidean::new(2)))),
        NormSpec::PNorm { p } => Ok(plain(shared(PNorm::planar(*p)?))),
        NormSpec::Ellipsoid { diag, matrix } => {
            let m = match (diag, matrix) {
                (Some(d), _) => EllipsoidNorm::diagonal(d)?,
                (None, Some(rows)) => {
                    let n = rows.len();
                    if rows.iter().any(|r| r.len() != n) {
                        return Err(Error::config("norm.matrix", "matrix must be square"));
                    }
                    EllipsoidNorm::new(nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]))?
                }
                (None, None) => return Err(Error::config("norm", "ellipsoid needs `diag` or `matrix`")),
            };
            Ok(plain(shared(m)))
        }
        NormSpec::GluedPq { p } => Ok(plain(shared(glued_pq_norm(*p)?))),
        NormSpec::Constructor(p) => {
            let r = build_profile(p)?;
            let ext = if p.mirrored {
                ExtendedProfile::mirrored(&r)?
            } else {
                extend_profile(&r)?
            };
            Ok(BuiltNorm {
                norm: shared(support_norm(&ext)),
                extended: Some(ext),
            })
        }
    }
}
