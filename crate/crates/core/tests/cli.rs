use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wulff-lab"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL_ALLEN_CAHN: &str = r#"
name = "small"

[norm]
kind = "euclidean"

[b]
kind = "quadratic"

[potential]
kind = "double_well"

[domain]
half_width = 4.0
cells = 48

[trace]
kind = "tanh"
width = 1.4142135623730951

[solver]
tol = 1e-6

[energy]
radii = "0.5:2.5:6"
"#;

#[test]
fn ellipsoid_pipeline_at_reduced_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled("ellipsoid_monotonicity.toml");
    let out = run(&["run", "--config", cfg.to_str().unwrap(), "--grid", "128", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["energy.csv", "energy.svg", "solve.csv", "field.txt", "field.svg", "report.txt"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#') && !l.starts_with('R')).collect();
    assert_eq!(rows.len(), 10);
    let svg = std::fs::read_to_string(dir.path().join("energy.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn glued_norm_at_p_two_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "name = \"bad\"\n[norm]\nkind = \"glued_pq\"\np = 2.0\n");
    let out = run(&["check", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("norm.p"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "name = \"x\"\ncolour = 3\n[norm]\nkind = \"euclidean\"\n");
    let out = run(&["dual", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn wulff_ball_leaving_the_domain_fails_before_solving() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL_ALLEN_CAHN);
    let out = run(&[
        "energy",
        "--config",
        cfg.to_str().unwrap(),
        "--radii",
        "1,2,9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("solve.csv").exists());
    assert!(!dir.path().join("field.txt").exists());
}

#[test]
fn small_energy_run_succeeds_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL_ALLEN_CAHN);
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("o{k}"));
        let out = run(&["energy", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(std::fs::read_to_string(out_dir.join("energy.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn sampled_checks_are_deterministic_under_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let body = "name = \"seeded\"\n[norm]\nkind = \"glued_pq\"\np = 3.0\n[checks]\nrun = [\"sign\", \"euler\"]\nsamples = 300\nkeep_trace = true\n";
    let cfg = write_config(dir.path(), "c.toml", body);
    let read = |sub: &str, seed: &str| {
        let out_dir = dir.path().join(sub);
        let out = run(&["check", "--config", cfg.to_str().unwrap(), "--seed", seed, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(out_dir.join("check_sign.csv")).unwrap()
    };
    let a = read("a", "11");
    let b = read("b", "11");
    let c = read("c", "12");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn expected_failures_keep_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled("glued_p3_checks.toml");
    let out = run(&["check", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("exact"));
}

#[test]
fn unexpected_check_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let body = "name = \"strict\"\n[norm]\nkind = \"glued_pq\"\np = 3.0\n[checks]\nrun = [\"exact\"]\nsamples = 500\n";
    let cfg = write_config(dir.path(), "c.toml", body);
    let out = run(&["check", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn exhausted_budget_exits_four_with_last_iterate() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL_ALLEN_CAHN.replace("tol = 1e-6", "tol = 1e-12\nmax_iters = 3");
    let cfg = write_config(dir.path(), "c.toml", &body);
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("last_iterate.txt").is_file());
}

#[test]
fn dual_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled("glued_p3_checks.toml");
    let out = run(&["dual", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("dual.csv")).unwrap();
    assert!(csv.starts_with("# wulff-lab dual v1\ntheta,H,H_star\n"));
    assert_eq!(csv.lines().count(), 2 + 720);
    assert!(dir.path().join("dual.svg").is_file());
}

#[test]
fn help_lists_exit_codes() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Exit codes"));
    for c in 0..=7 {
        if c != 1 {
            assert!(text.contains(&format!("  {c}  ")), "exit code {c} not documented");
        }
    }
}
