use wulff_lab::conditions::BFunction;
use wulff_lab::duality::shared;
use wulff_lab::norm::{EllipsoidNorm, Euclidean};
use wulff_lab::pde::{residual, solve_dirichlet, GridField, Initial, Potential, ProblemSpec};
use wulff_lab::Error;

fn affine(x: f64, y: f64) -> f64 {
    0.3 * x - 0.7 * y + 0.1
}

#[test]
fn singular_b_converges_through_the_ladder() {
    let b = BFunction::regularized_power(1.5, 0.1).unwrap();
    let mut spec = ProblemSpec::new(shared(Euclidean::new(2)), b, Potential::zero(), 1.0, 24, "affine", affine).unwrap();
    spec.tol = 1e-9;
    let sol = solve_dirichlet(&spec).unwrap();
    let eps: Vec<Option<f64>> = sol.stages.iter().map(|s| s.eps).collect();
    assert_eq!(eps.len(), spec.eps_ladder.len());
    assert!(eps.iter().all(Option::is_some));
    let want = GridField::from_fn(24, 24, spec.h(), -1.0, -1.0, affine).unwrap();
    let err = sol.field.values.iter().zip(&want.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "error {err}");
}

#[test]
fn stage_energies_never_increase() {
    let mut spec = ProblemSpec::new(
        shared(EllipsoidNorm::diagonal(&[2.0, 1.0]).unwrap()),
        BFunction::power(3.0).unwrap(),
        Potential::allen_cahn(),
        3.0,
        32,
        "tanh(x/2)",
        |x, _| (x / 2.0).tanh(),
    )
    .unwrap();
    spec.tol = 1e-8;
    let sol = solve_dirichlet(&spec).unwrap();
    assert_eq!(sol.stages.last().unwrap().eps, None);
    for st in &sol.stages {
        for w in st.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
    }
    assert!(residual(&spec, &sol.field).unwrap() <= 1e-8);
}

#[test]
fn initial_guess_does_not_change_the_minimizer() {
    let make = |initial: Initial| {
        let mut spec = ProblemSpec::new(
            shared(Euclidean::new(2)),
            BFunction::quadratic(),
            Potential::allen_cahn(),
            3.0,
            32,
            "tanh",
            |x, _| (x / 2f64.sqrt()).tanh(),
        )
        .unwrap();
        spec.tol = 1e-9;
        spec.initial = initial;
        solve_dirichlet(&spec).unwrap().field
    };
    let a = make(Initial::BoundaryMean);
    let b = make(Initial::Trace);
    let gap = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-7, "gap {gap}");
}

#[test]
fn non_convergence_reports_the_last_iterate() {
    let mut spec = ProblemSpec::new(shared(Euclidean::new(2)), BFunction::quadratic(), Potential::zero(), 1.0, 32, "affine", affine).unwrap();
    spec.tol = 1e-14;
    spec.max_iters = 5;
    match solve_dirichlet(&spec) {
        Err(Error::NonConvergence { iterations, last, reason, .. }) => {
            assert!(iterations <= 5);
            assert!(reason.contains("budget"));
            assert_eq!(last.nx, 32);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}
