use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::conditions::BFunction;
use crate::error::{Error, Result};
use crate::norm::SharedNorm;

use super::field::GridField;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type TraceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// The potential `F` with `F'`.
#[derive(Clone)]
pub struct Potential {
    name: String,
    f: ScalarFn,
    d1: ScalarFn,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Potential({})", self.name)
    }
}

impl Potential {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Potential {
            name: name.into(),
            f: Arc::new(f),
            d1: Arc::new(d1),
        }
    }

    pub fn zero() -> Self {
        Self::new("0", |_| 0.0, |_| 0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| c, |_| 0.0)
    }

    /// `F(t) = -(1 - t²)²/4`, the Allen–Cahn double well.
    pub fn allen_cahn() -> Self {
        Self::new(
            "-(1-t^2)^2/4",
            |t| -0.25 * (1.0 - t * t).powi(2),
            |t| t * (1.0 - t * t),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    #[inline]
    pub fn d1(&self, t: f64) -> f64 {
        (self.d1)(t)
    }
}

/// Starting field for the first solver stage.
#[derive(Debug, Clone)]
pub enum Initial {
    /// Interior set to the mean of the boundary ring.
    BoundaryMean,
    /// Interior set to the trace function itself.
    Trace,
    Field(GridField),
}

/// A Dirichlet problem on the square `[c-a, c+a]²` discretized by `n × n`
/// cells; the outer ring of cells carries the trace.
#[derive(Clone)]
pub struct ProblemSpec {
    pub norm: SharedNorm,
    pub b: BFunction,
    pub potential: Potential,
    pub center: [f64; 2],
    pub half_width: f64,
    pub cells: usize,
    trace: TraceFn,
    pub trace_name: String,
    pub eps_ladder: Vec<f64>,
    /// Target for the discrete L² residual of the final stage.
    pub tol: f64,
    /// Iteration budget per stage.
    pub max_iters: u64,
    pub initial: Initial,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("norm", &self.norm.name())
            .field("b", &self.b.name())
            .field("potential", &self.potential)
            .field("center", &self.center)
            .field("half_width", &self.half_width)
            .field("cells", &self.cells)
            .field("trace", &self.trace_name)
            .field("eps_ladder", &self.eps_ladder)
            .finish()
    }
}

pub const DEFAULT_LADDER: [f64; 4] = [0.125, 0.031_25, 0.007_812_5, 0.001_953_125];

impl ProblemSpec {
    pub fn new(
        norm: SharedNorm,
        b: BFunction,
        potential: Potential,
        half_width: f64,
        cells: usize,
        trace_name: impl Into<String>,
        trace: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if norm.dim() != 2 {
            return Err(Error::Domain(format!("the solver is planar, got a norm in {} dimensions", norm.dim())));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Range(format!("half width must be positive, got {half_width}")));
        }
        if cells < 4 {
            return Err(Error::Range(format!("need at least 4 cells per side, got {cells}")));
        }
        Ok(ProblemSpec {
            norm,
            b,
            potential,
            center: [0.0, 0.0],
            half_width,
            cells,
            trace: Arc::new(trace),
            trace_name: trace_name.into(),
            eps_ladder: DEFAULT_LADDER.to_vec(),
            tol: 1e-6,
            max_iters: 100_000,
            initial: Initial::BoundaryMean,
        })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn trace(&self, x: f64, y: f64) -> f64 {
        (self.trace)(x, y)
    }

    /// A field on this grid with the trace on the boundary ring and the
    /// initial guess inside.
    pub fn initial_field(&self) -> Result<GridField> {
        let (n, h) = (self.cells, self.h());
        let x0 = self.center[0] - self.half_width;
        let y0 = self.center[1] - self.half_width;
        let mut u = match &self.initial {
            Initial::Field(f) => {
                if f.nx != n || f.ny != n || (f.h - h).abs() > 1e-12 * h {
                    return Err(Error::config("initial", "field does not match the problem grid"));
                }
                f.clone()
            }
            Initial::Trace => GridField::from_fn(n, n, h, x0, y0, |x, y| self.trace(x, y))?,
            Initial::BoundaryMean => GridField::new(n, n, h, x0, y0)?,
        };
        u.impose_trace(|x, y| self.trace(x, y));
        if matches!(self.initial, Initial::BoundaryMean) {
            let (mut s, mut c) = (0.0, 0usize);
            for j in 0..n {
                for i in 0..n {
                    if u.is_boundary(i, j) {
                        s += u.at(i, j);
                        c += 1;
                    }
                }
            }
            let mean = s / c as f64;
            for j in 1..n - 1 {
                for i in 1..n - 1 {
                    let k = u.idx(i, j);
                    u.values[k] = mean;
                }
            }
        }
        Ok(u)
    }
}

/// Flux `B'(H(g))∇H(g)`, zero below `|g| < 1e-12`.
#[inline]
pub(crate) fn flux(norm: &SharedNorm, b: &BFunction, g: [f64; 2]) -> Result<[f64; 2]> {
    if g[0].hypot(g[1]) < 1e-12 {
        return Ok([0.0, 0.0]);
    }
    let mut dh = [0.0; 2];
    norm.gradient_into(&g, &mut dh)?;
    let s = b.d1(norm.value(&g));
    Ok([s * dh[0], s * dh[1]])
}

/// Discrete energy `Σ B(H(∇u))h² - Σ_interior F(u)h²`.
pub(crate) fn discrete_energy(u: &GridField, norm: &SharedNorm, b: &BFunction, f: &Potential) -> f64 {
    let (nx, ny, h) = (u.nx, u.ny, u.h);
    let rows: Vec<f64> = (0..ny - 1)
        .into_par_iter()
        .map(|j| {
            let mut s = 0.0;
            for i in 0..nx - 1 {
                s += b.value(norm.value(&u.grad(i, j)));
                if i > 0 && j > 0 {
                    s -= f.value(u.at(i, j));
                }
            }
            s
        })
        .collect();
    rows.iter().sum::<f64>() * h * h
}

/// `∂E/∂u` at interior cells (row-major over the interior), the negative of
/// `h²(div q + F'(u))`.
pub(crate) fn energy_gradient(u: &GridField, norm: &SharedNorm, b: &BFunction, f: &Potential) -> Result<Vec<f64>> {
    let (nx, ny, h) = (u.nx, u.ny, u.h);
    let q: Vec<Vec<[f64; 2]>> = (0..ny - 1)
        .into_par_iter()
        .map(|j| (0..nx - 1).map(|i| flux(norm, b, u.grad(i, j))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = (1..ny - 1)
        .into_par_iter()
        .map(|j| {
            (1..nx - 1)
                .map(|i| {
                    h * (q[j][i - 1][0] - q[j][i][0] + q[j - 1][i][1] - q[j][i][1]) - h * h * f.d1(u.at(i, j))
                })
                .collect()
        })
        .collect();
    Ok(rows.concat())
}

/// Discrete L² norm over interior cells of `div(B'(H(∇u))∇H(∇u)) + F'(u)`.
pub fn residual(spec: &ProblemSpec, field: &GridField) -> Result<f64> {
    residual_with(field, &spec.norm, &spec.b, &spec.potential)
}

pub(crate) fn residual_with(field: &GridField, norm: &SharedNorm, b: &BFunction, f: &Potential) -> Result<f64> {
    let g = energy_gradient(field, norm, b, f)?;
    Ok(g.iter().map(|v| v * v).sum::<f64>().sqrt() / field.h)
}
