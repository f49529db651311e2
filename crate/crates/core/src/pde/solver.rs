use std::sync::{Arc, Mutex};

use argmin::core::observers::{Observe, ObserverMode};
use argmin::core::{CostFunction, Executor, Gradient, IterState, State, TerminationReason, KV};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;

use crate::conditions::{BFunction, Family};
use crate::error::{Error, Result};
use crate::regularization::b_epsilon;

use super::field::GridField;
use super::problem::{discrete_energy, energy_gradient, residual, residual_with, ProblemSpec};

const POLISH_STEPS: u64 = 60;

/// One stage of the continuation in `ε`.
#[derive(Debug, Clone)]
pub struct StageReport {
    /// `None` for the stage with the unregularized `B`.
    pub eps: Option<f64>,
    pub iterations: u64,
    pub energy: f64,
    pub residual: f64,
    /// Discrete energy after every accepted step.
    pub energy_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub field: GridField,
    /// Discrete energy with the unregularized `B`.
    pub energy: f64,
    /// Residual of the equation with the unregularized `B`.
    pub residual: f64,
    pub stages: Vec<StageReport>,
}

struct Discrete<'a> {
    spec: &'a ProblemSpec,
    b: &'a BFunction,
    template: GridField,
}

impl Discrete<'_> {
    fn field(&self, x: &[f64]) -> GridField {
        let mut u = self.template.clone();
        let (nx, ny) = (u.nx, u.ny);
        for j in 1..ny - 1 {
            let row = (j - 1) * (nx - 2);
            let k = u.idx(1, j);
            u.values[k..k + nx - 2].copy_from_slice(&x[row..row + nx - 2]);
        }
        u
    }

    fn unknowns(u: &GridField) -> Vec<f64> {
        let mut x = Vec::with_capacity((u.nx - 2) * (u.ny - 2));
        for j in 1..u.ny - 1 {
            let k = u.idx(1, j);
            x.extend_from_slice(&u.values[k..k + u.nx - 2]);
        }
        x
    }
}

impl CostFunction for Discrete<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(discrete_energy(&self.field(x), &self.spec.norm, self.b, &self.spec.potential))
    }
}

impl Gradient for Discrete<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        energy_gradient(&self.field(x), &self.spec.norm, self.b, &self.spec.potential)
            .map_err(|e| argmin::core::Error::msg(e.to_string()))
    }
}

#[derive(Clone, Default)]
struct History(Arc<Mutex<Vec<f64>>>);

impl<I: State<Float = f64>> Observe<I> for History {
    fn observe_iter(&mut self, state: &I, _kv: &KV) -> std::result::Result<(), argmin::core::Error> {
        self.0.lock().unwrap().push(state.get_cost());
        Ok(())
    }
}

/// Minimizes the discrete energy down the `ε` ladder, warm-starting every
/// stage from the previous one. Intermediate stages stop at `100·tol`; the
/// last one (with `B` itself unless `B` is singular at `0`, in which case the
/// smallest `ε` is kept) must reach `tol`.
pub fn solve_dirichlet(spec: &ProblemSpec) -> Result<Solution> {
    let singular = matches!(spec.b.family(), Family::APrime { p, .. } if p < 2.0);
    let mut stages: Vec<Option<f64>> = spec.eps_ladder.iter().map(|&e| Some(e)).collect();
    if !singular {
        stages.push(None);
    } else if stages.is_empty() {
        return Err(Error::config("eps_ladder", "a singular B needs at least one ε level"));
    }
    let mut u = spec.initial_field()?;
    let mut reports = Vec::new();
    let last = stages.len() - 1;
    for (s, eps) in stages.into_iter().enumerate() {
        let b = match eps {
            Some(e) => b_epsilon(&spec.b, e)?,
            None => spec.b.clone(),
        };
        let tol = if s == last { spec.tol } else { 100.0 * spec.tol };
        let (next, report) = run_stage(spec, &b, u, eps, tol)?;
        u = next;
        reports.push(report);
    }
    let energy = discrete_energy(&u, &spec.norm, &spec.b, &spec.potential);
    let residual = residual(spec, &u)?;
    Ok(Solution {
        field: u,
        energy,
        residual,
        stages: reports,
    })
}

fn run_stage(
    spec: &ProblemSpec,
    b: &BFunction,
    start: GridField,
    eps: Option<f64>,
    tol: f64,
) -> Result<(GridField, StageReport)> {
    let h = start.h;
    let r0 = residual_with(&start, &spec.norm, b, &spec.potential)?;
    let e0 = discrete_energy(&start, &spec.norm, b, &spec.potential);
    if r0 <= tol {
        let report = StageReport {
            eps,
            iterations: 0,
            energy: e0,
            residual: r0,
            energy_history: vec![e0],
        };
        return Ok((start, report));
    }
    let fail = |iterations: u64, residual: f64, reason: String, last: GridField| Error::NonConvergence {
        iterations: iterations as usize,
        residual,
        reason,
        last: Box::new(last),
    };
    let problem = Discrete {
        spec,
        b,
        template: start.clone(),
    };
    let x0 = Discrete::unknowns(&start);
    let history = History::default();
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), 12)
        .with_tolerance_grad(tol * h)
        .and_then(|s| s.with_tolerance_cost(0.0))
        .map_err(|e| Error::Inconsistency(e.to_string()))?;
    let run = Executor::new(problem, solver)
        .configure(|c| c.param(x0).max_iters(spec.max_iters))
        .add_observer(history.clone(), ObserverMode::Always)
        .run();
    let res = match run {
        Ok(res) => res,
        Err(e) => return Err(fail(0, r0, e.to_string(), start)),
    };
    let state: &IterState<Vec<f64>, Vec<f64>, (), (), (), f64> = res.state();
    let mut iterations = state.get_iter();
    let mut x = state.get_param().or(state.get_best_param()).cloned().unwrap_or_default();
    let problem = Discrete {
        spec,
        b,
        template: start,
    };
    let mut energy_history = vec![e0];
    energy_history.extend(history.0.lock().unwrap().iter().copied());
    let mut u = problem.field(&x);
    let mut r = residual_with(&u, &spec.norm, b, &spec.potential)?;
    let budget_left = iterations < spec.max_iters;
    if r > tol && budget_left {
        let (steps, polished) = newton_polish(&problem, &mut x, tol, spec.max_iters - iterations, &mut energy_history)?;
        iterations += steps;
        u = problem.field(&x);
        r = polished;
    }
    for w in energy_history.windows(2) {
        if w[1] > w[0] + 1e-12 * w[0].abs().max(1.0) {
            return Err(Error::Inconsistency(format!(
                "discrete energy increased from {} to {} during descent",
                w[0], w[1]
            )));
        }
    }
    let energy = discrete_energy(&u, &spec.norm, b, &spec.potential);
    if r > tol {
        let reason = match state.get_termination_reason() {
            _ if iterations >= spec.max_iters => "iteration budget exhausted".to_string(),
            Some(TerminationReason::MaxItersReached) => "iteration budget exhausted".to_string(),
            Some(other) => format!("{other}; Newton polish stalled"),
            None => "stopped".to_string(),
        };
        return Err(fail(iterations, r, reason, u));
    }
    Ok((
        u,
        StageReport {
            eps,
            iterations,
            energy,
            residual: r,
            energy_history,
        },
    ))
}

/// Inexact Newton-CG on the discrete Euler-Lagrange system, with Hessian
/// products from central differences of the gradient and backtracking on the
/// gradient norm. Returns the steps taken and the final residual.
fn newton_polish(
    problem: &Discrete<'_>,
    x: &mut Vec<f64>,
    tol: f64,
    budget: u64,
    energy_history: &mut Vec<f64>,
) -> Result<(u64, f64)> {
    let h = problem.template.h;
    let grad = |x: &[f64]| energy_gradient(&problem.field(x), &problem.spec.norm, problem.b, &problem.spec.potential);
    let energy = |x: &[f64]| discrete_energy(&problem.field(x), &problem.spec.norm, problem.b, &problem.spec.potential);
    let nrm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut g = grad(x)?;
    let mut gn = nrm(&g);
    let g0 = gn;
    let mut steps = 0;
    while gn / h > tol && steps < budget.min(POLISH_STEPS) {
        steps += 1;
        let xmax = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let hv = |v: &[f64]| -> Result<Vec<f64>> {
            let vmax = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            let d = f64::EPSILON.cbrt() * xmax / vmax;
            let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + d * b).collect();
            let xm: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - d * b).collect();
            Ok(grad(&xp)?.iter().zip(grad(&xm)?).map(|(p, m)| (p - m) / (2.0 * d)).collect())
        };
        let forcing = (gn / g0).sqrt().min(0.1) * gn;
        let n = x.len();
        let mut s = vec![0.0; n];
        let mut res: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut dir = res.clone();
        let mut rr = gn * gn;
        for _ in 0..n.min(2000) {
            let ad = hv(&dir)?;
            let curv: f64 = dir.iter().zip(&ad).map(|(a, b)| a * b).sum();
            if curv <= 0.0 {
                if s.iter().all(|v| *v == 0.0) {
                    s.clone_from(&res);
                }
                break;
            }
            let alpha = rr / curv;
            for i in 0..n {
                s[i] += alpha * dir[i];
                res[i] -= alpha * ad[i];
            }
            let rr_new: f64 = res.iter().map(|v| v * v).sum();
            if rr_new.sqrt() <= forcing {
                break;
            }
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                dir[i] = res[i] + beta * dir[i];
            }
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + t * b).collect();
            let gt = grad(&trial)?;
            let gtn = nrm(&gt);
            if gtn.is_finite() && gtn <= (1.0 - 1e-4 * t) * gn {
                *x = trial;
                g = gt;
                gn = gtn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        energy_history.push(energy(x));
    }
    Ok((steps, gn / h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::shared;
    use crate::norm::{EllipsoidNorm, Euclidean};
    use crate::pde::{Initial, Potential};

    #[test]
    fn constant_trace_gives_constant() {
        let spec = ProblemSpec::new(shared(Euclidean::new(2)), BFunction::quadratic(), Potential::zero(), 1.0, 12, "2", |_, _| 2.0)
            .unwrap();
        let sol = solve_dirichlet(&spec).unwrap();
        assert!(sol.field.values.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn affine_trace_is_recovered() {
        let norm = shared(EllipsoidNorm::diagonal(&[2.0, 1.0]).unwrap());
        let mut spec = ProblemSpec::new(norm, BFunction::power(3.0).unwrap(), Potential::zero(), 1.0, 24, "affine", |x, y| {
            0.7 * x - 0.3 * y + 0.1
        })
        .unwrap();
        spec.tol = 1e-10;
        let sol = solve_dirichlet(&spec).unwrap();
        let want = GridField::from_fn(24, 24, spec.h(), -1.0, -1.0, |x, y| 0.7 * x - 0.3 * y + 0.1).unwrap();
        let err = sol.field.values.iter().zip(&want.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "err {err}");
        for st in &sol.stages {
            assert!(st.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0)));
        }
    }

    #[test]
    fn singular_b_stops_at_smallest_eps() {
        let mut spec = ProblemSpec::new(
            shared(Euclidean::new(2)),
            BFunction::power(1.5).unwrap(),
            Potential::zero(),
            1.0,
            10,
            "x",
            |x, _| x,
        )
        .unwrap();
        spec.initial = Initial::Trace;
        let sol = solve_dirichlet(&spec).unwrap();
        assert_eq!(sol.stages.len(), 4);
        assert_eq!(sol.stages.last().unwrap().eps, Some(0.001_953_125));
    }

    #[test]
    fn budget_exhaustion_reports_last_iterate() {
        let mut spec = ProblemSpec::new(
            shared(Euclidean::new(2)),
            BFunction::quadratic(),
            Potential::allen_cahn(),
            4.0,
            32,
            "tanh",
            |x, _| (x / 2f64.sqrt()).tanh(),
        )
        .unwrap();
        spec.max_iters = 2;
        spec.eps_ladder.clear();
        match solve_dirichlet(&spec) {
            Err(Error::NonConvergence { iterations, last, residual, .. }) => {
                assert_eq!(iterations, 2);
                assert!(residual > spec.tol);
                assert_eq!(last.nx, 32);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
