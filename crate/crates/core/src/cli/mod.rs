//! Command-line front end. Every subcommand reads an experiment config
//! (TOML) and writes its artifacts to an output directory.

mod config;
mod svg;

pub use config::{
    build_norm, build_profile, parse_radii, BSpec, BuiltNorm, ChecksSpec, DomainSpec, EnergySpec, ExperimentConfig,
    NormSpec, PotentialSpec, ProfileSpec, RadiiSpec, RenderSpec, SolverSpec, TraceSpec, CHECKS, DEFAULT_SEED,
};
pub use svg::Svg;

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::conditions::{
    check_exact_condition, check_orthogonality_condition, check_sign_condition, ellipticity_constant,
    validate_assumption_b_prime, ConditionReport, PairCheckOptions, Verdict,
};
use crate::duality::{check_polarity, DualNorm};
use crate::error::{Error, Result};
use crate::norm::{check_homogeneity_and_euler, SharedNorm};
use crate::pde::{
    check_monotonicity, check_pointwise_bound, check_radii, energy_trace, liouville_mass_test, solve_dirichlet,
    EnergyTrace, GridField, ProblemSpec, Solution,
};
use crate::planar::{check_smooth_matching, ExtendedProfile, ProfileClass};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CHECK: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_MONOTONICITY: i32 = 5;
pub const EXIT_BOUND: i32 = 6;
pub const EXIT_MODULE: i32 = 7;

const EXIT_HELP: &str = "\
Exit codes:
  0  success, every asserted check passed
  2  usage or config error (including Wulff balls that leave the domain)
  3  a condition check or profile validation failed
  4  the solver did not converge (last iterate saved as last_iterate.txt)
  5  the rescaled energy is not monotone within tolerance
  6  the pointwise bound or the Liouville consistency check failed
  7  any other module or I/O error";

#[derive(Debug, Parser)]
#[command(name = "wulff-lab", version, about = "Anisotropic norms, Wulff shapes and energy monotonicity experiments", after_help = EXIT_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full pipeline: construct, check, solve, energy, report.
    Run(Common),
    /// CSV of (θ, H, H*) and an overlay of the unit ball and W_1.
    Dual(Common),
    /// Run the condition checks listed under [checks].
    Check(Common),
    /// Validate and extend a first-quadrant profile.
    Construct(Common),
    /// Solve the Dirichlet problem.
    Solve(Common),
    /// Rescaled energy trace with monotonicity and mass diagnostics.
    Energy(Common),
    /// SVG of the unit ball, optionally with the dual ball.
    Render(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cells per side (overrides domain.cells).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Wulff radii: `a,b,c` or `from:to:count`.
    #[arg(long)]
    pub radii: Option<String>,
    /// Solver tolerance for solve/energy/run, check tolerance for check.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Use a saved field instead of solving (energy).
    #[arg(long)]
    pub field: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (common, stage): (&Common, fn(&mut Ctx) -> Result<i32>) = match &cli.command {
        Command::Run(c) => (c, cmd_run),
        Command::Dual(c) => (c, cmd_dual),
        Command::Check(c) => (c, cmd_check),
        Command::Construct(c) => (c, cmd_construct),
        Command::Solve(c) => (c, cmd_solve),
        Command::Energy(c) => (c, cmd_energy),
        Command::Render(c) => (c, cmd_render),
    };
    let result = Ctx::new(common).and_then(|mut ctx| {
        let code = stage(&mut ctx)?;
        ctx.flush()?;
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => EXIT_CONFIG,
        Error::ProfileRejected { .. } => EXIT_CHECK,
        Error::NonConvergence { .. } => EXIT_SOLVER,
        _ => EXIT_MODULE,
    }
}

struct Ctx {
    cfg: ExperimentConfig,
    common: Common,
    out: PathBuf,
    report: String,
    norm: Option<BuiltNorm>,
    solution: Option<GridField>,
}

impl Ctx {
    fn new(common: &Common) -> Result<Self> {
        let cfg = ExperimentConfig::load(&common.config).map_err(|e| match e {
            Error::Io(io) => Error::config(common.config.display().to_string(), io.to_string()),
            other => other,
        })?;
        let stem = cfg
            .name
            .clone()
            .or_else(|| common.config.file_stem().map(|s| s.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "experiment".into());
        let out = common
            .out
            .clone()
            .or_else(|| cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from("wulff-out").join(&stem));
        std::fs::create_dir_all(&out)?;
        let mut report = String::new();
        let _ = writeln!(report, "# wulff-lab report v1\nexperiment = {stem}\nseed = {}", Self::seed_of(&cfg, common));
        Ok(Ctx {
            cfg,
            common: common.clone(),
            out,
            report,
            norm: None,
            solution: None,
        })
    }

    fn seed_of(cfg: &ExperimentConfig, common: &Common) -> u64 {
        common.seed.unwrap_or(cfg.seed())
    }

    fn seed(&self) -> u64 {
        Self::seed_of(&self.cfg, &self.common)
    }

    fn norm(&mut self) -> Result<SharedNorm> {
        if self.norm.is_none() {
            let built = self.cfg.build_norm()?;
            if built.norm.dim() != 2 {
                return Err(Error::config("norm", "only planar norms are supported here"));
            }
            let _ = writeln!(self.report, "norm = {}", built.norm.name());
            self.norm = Some(built);
        }
        Ok(self.norm.as_ref().unwrap().norm.clone())
    }

    fn extended(&mut self) -> Result<Option<ExtendedProfile>> {
        self.norm()?;
        Ok(self.norm.as_ref().unwrap().extended.clone())
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let p = self.out.join(name);
        std::fs::write(&p, contents)?;
        Ok(p)
    }

    fn say(&mut self, line: impl AsRef<str>) {
        println!("{}", line.as_ref());
        let _ = writeln!(self.report, "{}", line.as_ref());
    }

    fn section(&mut self, rep: &ConditionReport) {
        print!("{rep}");
        let _ = write!(self.report, "{rep}");
    }

    fn flush(&self) -> Result<()> {
        self.write("report.txt", &self.report)?;
        Ok(())
    }

    fn problem(&mut self) -> Result<ProblemSpec> {
        let norm = self.norm()?;
        let mut cfg = self.cfg.clone();
        if let (Some(n), Some(d)) = (self.common.grid, cfg.domain.as_mut()) {
            d.cells = n;
        }
        if let Some(t) = self.common.tol {
            cfg.solver.tol = Some(t);
        }
        cfg.build_problem(norm)
    }

    fn radii(&self) -> Result<Option<Vec<f64>>> {
        if let Some(s) = &self.common.radii {
            return Ok(Some(parse_radii(s)?));
        }
        match &self.cfg.energy {
            Some(e) => Ok(Some(e.radii.values().map_err(|m| Error::config("energy.radii", m))?)),
            None => Ok(None),
        }
    }

    fn energy_center(&self, spec: &ProblemSpec) -> [f64; 2] {
        self.cfg.energy.as_ref().and_then(|e| e.center).unwrap_or(spec.center)
    }
}

fn csv_header(cmd: &str, columns: &str) -> String {
    format!("# wulff-lab {cmd} v1\n{columns}\n")
}

fn unit_ball(norm: &SharedNorm, count: usize) -> Vec<[f64; 2]> {
    (0..count)
        .map(|k| {
            let t = TAU * k as f64 / count as f64;
            let (s, c) = t.sin_cos();
            let h = norm.value(&[c, s]);
            [c / h, s / h]
        })
        .collect()
}

fn wulff_ball(dual: &DualNorm, r: f64, center: [f64; 2], count: usize) -> Result<Vec<[f64; 2]>> {
    (0..count)
        .map(|k| {
            let t = TAU * k as f64 / count as f64;
            let (s, c) = t.sin_cos();
            let d = dual.dual_value(&[c, s])?;
            Ok([center[0] + r * c / d, center[1] + r * s / d])
        })
        .collect()
}

fn extent(pts: &[[f64; 2]]) -> f64 {
    pts.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max)
}

fn cmd_dual(ctx: &mut Ctx) -> Result<i32> {
    let norm = ctx.norm()?;
    let dual = DualNorm::new(norm.clone());
    let n = 720;
    let mut csv = csv_header("dual", "theta,H,H_star");
    for k in 0..n {
        let t = TAU * k as f64 / n as f64;
        let e = [t.cos(), t.sin()];
        let _ = writeln!(csv, "{t},{},{}", norm.value(&e), dual.dual_value(&e)?);
    }
    ctx.write("dual.csv", &csv)?;
    let ball = unit_ball(&norm, 2048);
    let w1 = wulff_ball(&dual, 1.0, [0.0, 0.0], 2048)?;
    let a = 1.1 * extent(&ball).max(extent(&w1));
    let mut svg = Svg::centred(480.0, a);
    svg.line([-a, 0.0], [a, 0.0], "#bbbbbb");
    svg.line([0.0, -a], [0.0, a], "#bbbbbb");
    svg.polyline(&ball, "#1f4e9c", true);
    svg.polyline(&w1, "#c0392b", true);
    svg.text(-0.95 * a, 0.9 * a, "blue: {H < 1}, red: W_1 = {H* < 1}");
    ctx.write("dual.svg", &svg.finish())?;
    ctx.say(format!("wrote {} and dual.svg ({} angles)", ctx.out.join("dual.csv").display(), n));
    Ok(EXIT_OK)
}

fn cmd_render(ctx: &mut Ctx) -> Result<i32> {
    let norm = ctx.norm()?;
    let count = ctx.cfg.render.angles.unwrap_or(2048);
    let ball = unit_ball(&norm, count);
    let mut a = extent(&ball);
    let overlay = if ctx.cfg.render.dual {
        let w = wulff_ball(&DualNorm::new(norm.clone()), 1.0, [0.0, 0.0], count)?;
        a = a.max(extent(&w));
        Some(w)
    } else {
        None
    };
    let a = 1.1 * a;
    let mut svg = Svg::centred(480.0, a);
    svg.line([-a, 0.0], [a, 0.0], "#bbbbbb");
    svg.line([0.0, -a], [0.0, a], "#bbbbbb");
    svg.polyline(&ball, "#1f4e9c", true);
    if let Some(w) = overlay {
        svg.polyline(&w, "#c0392b", true);
    }
    svg.text(-0.95 * a, 0.9 * a, &norm.name());
    let p = ctx.write("render.svg", &svg.finish())?;
    ctx.say(format!("wrote {}", p.display()));
    Ok(EXIT_OK)
}

fn euler_report(norm: &SharedNorm, samples: usize, seed: u64) -> ConditionReport {
    let e = check_homogeneity_and_euler(norm.as_ref(), samples, seed);
    let mut rep = ConditionReport::new("euler");
    rep.samples_checked = e.samples;
    rep.sampled_max_violation = e.gradient_identity.max(e.hessian_identity.unwrap_or(0.0));
    rep.push_detail("homogeneity", e.homogeneity);
    rep.push_detail("gradient_identity", e.gradient_identity);
    if let Some(v) = e.hessian_identity {
        rep.push_detail("hessian_identity", v);
    }
    if let Some(v) = e.third_order_identity {
        rep.push_detail("third_order_identity", v);
    }
    rep.verdict = if e.passed { Verdict::Pass } else { Verdict::Fail };
    if !e.passed {
        rep.witness = Some(Vec::new());
    }
    rep
}

fn run_check(ctx: &mut Ctx, id: &str, opts: &PairCheckOptions) -> Result<ConditionReport> {
    let norm = ctx.norm()?;
    let dual = DualNorm::new(norm.clone());
    match id {
        "euler" => Ok(euler_report(&norm, opts.samples, opts.seed)),
        "polarity" => {
            let p = check_polarity(&dual, opts.samples, 1e-5, 1e-3, opts.seed)?;
            let mut rep = ConditionReport::new("polarity");
            rep.samples_checked = p.samples;
            rep.sampled_max_violation = p.primal_side.max(p.dual_side);
            rep.push_detail("primal_side", p.primal_side);
            rep.push_detail("dual_side", p.dual_side);
            rep.push_detail("tolerance", p.tolerance);
            rep.verdict = if p.passed { Verdict::Pass } else { Verdict::Fail };
            if !p.passed {
                rep.witness = Some(Vec::new());
            }
            Ok(rep)
        }
        "exact" => check_exact_condition(&dual, opts),
        "sign" => check_sign_condition(&dual, opts),
        "orthogonality" => check_orthogonality_condition(norm.as_ref(), opts),
        "ellipticity" => {
            let e = ellipticity_constant(norm.as_ref(), 720)?;
            let mut rep = ConditionReport::new("ellipticity");
            rep.samples_checked = 720;
            rep.push_detail("lambda", e.lambda);
            rep.verdict = if e.lambda > 0.0 { Verdict::Pass } else { Verdict::Fail };
            if e.lambda <= 0.0 {
                rep.witness = Some(Vec::new());
            }
            Ok(rep)
        }
        "b_prime" => Ok(validate_assumption_b_prime(&ctx.cfg.build_b()?)),
        other => Err(Error::config("checks.run", format!("unknown check `{other}`"))),
    }
}

fn checks_stage(ctx: &mut Ctx, default: &[&str]) -> Result<i32> {
    let spec = ctx.cfg.checks.clone();
    let mut ids: Vec<String> = spec.run.clone();
    if ids.is_empty() {
        ids = default.iter().map(|s| s.to_string()).collect();
    }
    for extra in &spec.expect_fail {
        if !ids.contains(extra) {
            ids.push(extra.clone());
        }
    }
    let mut opts = PairCheckOptions {
        samples: spec.samples.unwrap_or(1000),
        seed: ctx.seed(),
        keep_trace: spec.keep_trace,
        ..Default::default()
    };
    if let Some(t) = spec.tol.or(ctx.common.tol) {
        opts.tolerance = t;
    }
    let mut code = EXIT_OK;
    for id in &ids {
        let rep = run_check(ctx, id, &opts)?;
        ctx.section(&rep);
        let expected_fail = spec.expect_fail.contains(id);
        let ok = match rep.verdict {
            Verdict::Pass => !expected_fail,
            Verdict::Fail => expected_fail,
            Verdict::Indeterminate => false,
        };
        ctx.say(format!("check {id}: {}", if ok { "as expected" } else { "UNEXPECTED" }));
        if !ok {
            code = EXIT_CHECK;
        }
        if spec.keep_trace && !rep.trace.is_empty() {
            let mut csv = csv_header("check", "inputs...,violation");
            for row in &rep.trace {
                let r: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(csv, "{}", r.join(","));
            }
            ctx.write(&format!("check_{id}.csv"), &csv)?;
        }
    }
    Ok(code)
}

fn cmd_check(ctx: &mut Ctx) -> Result<i32> {
    checks_stage(ctx, &["euler", "polarity", "sign"])
}

fn cmd_construct(ctx: &mut Ctx) -> Result<i32> {
    let Some(ext) = ctx.extended()? else {
        return Err(Error::config("norm.kind", "construct needs a `constructor` norm"));
    };
    let norm = ctx.norm()?;
    let mut code = EXIT_OK;
    let rep = ext.profile_report().clone();
    ctx.section(&rep);
    let c = ext.checks().clone();
    ctx.say(format!(
        "[extension]\ncontinuity = {:.6e}\nderivative_at_gluing = [{:.3e}, {:.3e}, {:.3e}]\nreflection = {:.6e}",
        c.continuity, c.derivative_at_gluing[0], c.derivative_at_gluing[1], c.derivative_at_gluing[2], c.reflection
    ));
    if ext.source().class() == ProfileClass::C3Alpha {
        let m = check_smooth_matching(ext.source())?;
        ctx.section(&m);
        if !m.passed() {
            code = EXIT_CHECK;
        }
    } else {
        ctx.say("matching: skipped (profile is only C2)");
    }
    let n = 2048;
    let mut csv = csv_header("construct", "theta,r_tilde,curvature");
    let mut pts = Vec::with_capacity(2 * n);
    for k in 0..n {
        let t = PI * k as f64 / n as f64;
        let r = ext.r_tilde(t)?;
        let kappa = ext.curvature(t).unwrap_or(f64::NAN);
        let _ = writeln!(csv, "{t},{r},{kappa}");
        pts.push((t, r));
    }
    ctx.write("construct.csv", &csv)?;
    let a = 1.15 * pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let mut svg = Svg::centred(480.0, a);
    svg.line([-a, 0.0], [a, 0.0], "#bbbbbb");
    svg.line([0.0, -a], [0.0, a], "#bbbbbb");
    for flip in [1.0, -1.0] {
        let first: Vec<[f64; 2]> = pts
            .iter()
            .filter(|p| p.0 <= PI / 2.0)
            .map(|&(t, r)| [flip * r * t.cos(), flip * r * t.sin()])
            .collect();
        let second: Vec<[f64; 2]> = pts
            .iter()
            .filter(|p| p.0 >= PI / 2.0)
            .chain(std::iter::once(&(PI, pts[0].1)))
            .map(|&(t, r)| [flip * r * t.cos(), flip * r * t.sin()])
            .collect();
        svg.polyline(&first, "#1f4e9c", false);
        svg.polyline(&second, "#d35400", false);
    }
    svg.text(-0.95 * a, 0.9 * a, &norm.name());
    ctx.write("construct.svg", &svg.finish())?;
    let opts = PairCheckOptions {
        samples: ctx.cfg.checks.samples.unwrap_or(1000),
        seed: ctx.seed(),
        ..Default::default()
    };
    let sign = check_sign_condition(&DualNorm::new(norm), &opts)?;
    ctx.section(&sign);
    let expect_fail = ext.is_mirrored() || ctx.cfg.checks.expect_fail.iter().any(|c| c == "sign");
    if sign.passed() == expect_fail {
        code = EXIT_CHECK;
    }
    Ok(code)
}

fn solve_stage(ctx: &mut Ctx) -> Result<(ProblemSpec, std::result::Result<Solution, i32>)> {
    let spec = ctx.problem()?;
    ctx.say(format!(
        "solving: {} cells per side, h = {}, B = {}, F = {}, trace = {}",
        spec.cells,
        spec.h(),
        spec.b.name(),
        spec.potential.name(),
        spec.trace_name
    ));
    match solve_dirichlet(&spec) {
        Ok(sol) => {
            let mut csv = csv_header("solve", "stage,eps,iterations,energy,residual");
            for (k, s) in sol.stages.iter().enumerate() {
                let eps = s.eps.map(|e| e.to_string()).unwrap_or_else(|| "none".into());
                let _ = writeln!(csv, "{k},{eps},{},{},{}", s.iterations, s.energy, s.residual);
            }
            ctx.write("solve.csv", &csv)?;
            sol.field.save(ctx.out.join("field.txt"))?;
            ctx.write("field.svg", &heatmap(&sol.field, None, &[], [0.0, 0.0])?)?;
            ctx.say(format!("solved: energy = {}, residual = {:.3e}", sol.energy, sol.residual));
            ctx.solution = Some(sol.field.clone());
            Ok((spec, Ok(sol)))
        }
        Err(Error::NonConvergence {
            iterations,
            residual,
            reason,
            last,
        }) => {
            last.save(ctx.out.join("last_iterate.txt"))?;
            ctx.say(format!(
                "solver did not converge after {iterations} iterations (residual {residual:.3e}): {reason}"
            ));
            Ok((spec, Err(EXIT_SOLVER)))
        }
        Err(e) => Err(e),
    }
}

fn cmd_solve(ctx: &mut Ctx) -> Result<i32> {
    Ok(match solve_stage(ctx)?.1 {
        Ok(_) => EXIT_OK,
        Err(code) => code,
    })
}

fn heatmap(field: &GridField, dual: Option<&DualNorm>, radii: &[f64], center: [f64; 2]) -> Result<String> {
    let (x0, x1, y0, y1) = field.extent();
    let mut svg = Svg::new(520.0, x0, x1, y0, y1);
    let (gx, gy) = (field.nx - 1, field.ny - 1);
    let block = gx.max(gy).div_ceil(128).max(1);
    let grads = field.gradients();
    let mag = |i: usize, j: usize| {
        let g = grads[j * gx + i];
        g[0].hypot(g[1])
    };
    let top = grads.iter().map(|g| g[0].hypot(g[1])).fold(0.0, f64::max);
    for bj in (0..gy).step_by(block) {
        for bi in (0..gx).step_by(block) {
            let (mut s, mut c) = (0.0, 0);
            for j in bj..(bj + block).min(gy) {
                for i in bi..(bi + block).min(gx) {
                    s += mag(i, j);
                    c += 1;
                }
            }
            let v = if top > 0.0 { s / c as f64 / top } else { 0.0 };
            let (cx, cy) = field.center(bi, bj);
            svg.rect(cx, cy, block as f64 * field.h, block as f64 * field.h, &svg::ramp(v));
        }
    }
    if let Some(d) = dual {
        for &r in radii {
            svg.polyline(&wulff_ball(d, r, center, 360)?, "white", true);
        }
    }
    Ok(svg.finish())
}

fn cmd_energy(ctx: &mut Ctx) -> Result<i32> {
    energy_stage(ctx, true)
}

fn energy_stage(ctx: &mut Ctx, may_solve: bool) -> Result<i32> {
    let radii = ctx
        .radii()?
        .ok_or_else(|| Error::config("energy.radii", "no radii given (use [energy] or --radii)"))?;
    let spec = ctx.problem()?;
    let center = ctx.energy_center(&spec);
    check_radii(&spec, &radii, center).map_err(|e| Error::config("energy.radii", e.to_string()))?;
    let field = match (&ctx.common.field, ctx.solution.clone()) {
        (Some(p), _) => GridField::load(p)?,
        (None, Some(f)) => f,
        (None, None) if may_solve => match solve_stage(ctx)?.1 {
            Ok(sol) => sol.field,
            Err(code) => return Ok(code),
        },
        (None, None) => return Err(Error::config("energy", "no field available")),
    };
    let trace = energy_trace(&spec, &field, &radii, center)?;
    let mut csv = csv_header("energy", "R,energy,mass");
    csv.push_str(trace.to_csv().lines().skip(2).map(|l| format!("{l}\n")).collect::<String>().as_str());
    ctx.write("energy.csv", &csv)?;
    let dual = DualNorm::new(spec.norm.clone());
    ctx.write("energy.svg", &heatmap(&field, Some(&dual), &radii, center)?)?;
    energy_reports(ctx, &spec, &field, &trace)
}

fn energy_reports(ctx: &mut Ctx, spec: &ProblemSpec, field: &GridField, trace: &EnergyTrace) -> Result<i32> {
    let es = ctx.cfg.energy.clone();
    let mut code = EXIT_OK;
    for k in 0..trace.radii.len() {
        ctx.say(format!("E({}) = {:.9e}, mass = {:.9e}", trace.radii[k], trace.energies[k], trace.masses[k]));
    }
    if trace.radii.len() >= 3 {
        let rep = check_monotonicity(trace, es.as_ref().and_then(|e| e.tol))?;
        ctx.section(&rep);
        if !rep.passed() && es.as_ref().is_none_or(|e| e.assert_monotone) {
            code = EXIT_MONOTONICITY;
        }
    }
    if let Some(s) = es.as_ref().and_then(|e| e.pointwise_slack_h) {
        let rep = check_pointwise_bound(spec, field, s * field.h)?;
        ctx.section(&rep);
        if !rep.passed() && code == EXIT_OK {
            code = EXIT_BOUND;
        }
    }
    if es.as_ref().is_some_and(|e| e.liouville) {
        let rep = liouville_mass_test(trace, Some(field), 1e-6)?;
        ctx.section(&rep);
        if !rep.passed() && code == EXIT_OK {
            code = EXIT_BOUND;
        }
    }
    Ok(code)
}

fn cmd_run(ctx: &mut Ctx) -> Result<i32> {
    let mut code = EXIT_OK;
    let mut keep = |c: i32| {
        if code == EXIT_OK {
            code = c;
        }
    };
    if matches!(ctx.cfg.norm, NormSpec::Constructor(_)) {
        ctx.say("== construct");
        keep(cmd_construct(ctx)?);
    }
    if !ctx.cfg.checks.run.is_empty() || !ctx.cfg.checks.expect_fail.is_empty() {
        ctx.say("== check");
        keep(checks_stage(ctx, &[])?);
    }
    if ctx.cfg.domain.is_some() && ctx.cfg.trace.is_some() {
        if let Some(radii) = ctx.radii()? {
            let spec = ctx.problem()?;
            let center = ctx.energy_center(&spec);
            check_radii(&spec, &radii, center).map_err(|e| Error::config("energy.radii", e.to_string()))?;
        }
        ctx.say("== solve");
        let solved = solve_stage(ctx)?.1;
        match solved {
            Err(c) => keep(c),
            Ok(_) => {
                if ctx.radii()?.is_some() {
                    ctx.say("== energy");
                    keep(energy_stage(ctx, false)?);
                }
            }
        }
    }
    ctx.say(format!("== exit {code}"));
    Ok(code)
}
