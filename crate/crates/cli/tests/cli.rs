use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE: &str = "problem.a = 1\nproblem.p = 0.5\nproblem.horizon = 3\ngrid.n = 40\n";

fn scenario(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("scenario.cfg");
    fs::write(&path, body).unwrap();
    path
}

fn wavelab(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wavelab"));
    cmd.args(args).env_remove(wavelab_cli::OUT_DIR_ENV);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn run(sub: &str, dir: &Path, body: &str) -> Output {
    let cfg = scenario(dir, body);
    let out = wavelab(&[sub, "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{sub} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Header plus rows, every field as text.
fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap().split(',').map(str::to_owned).collect();
    (head, lines.map(|l| l.split(',').map(str::to_owned).collect()).collect())
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let (head, rows) = csv(path);
    let i = head.iter().position(|h| h == name).unwrap();
    rows.into_iter().map(|r| r[i].clone()).collect()
}

fn numbers(path: &Path, name: &str) -> Vec<f64> {
    column(path, name).iter().map(|v| v.parse().unwrap()).collect()
}

#[test]
fn zero_data_gives_zero_norms() {
    let dir = TempDir::new().unwrap();
    let out = run("solve", dir.path(), &format!("{BASE}problem.c = 0.3\ndata.w0 = zero\ndata.w1 = zero\n"));
    assert!(!stderr(&out).contains("incompatible"));
    let w = numbers(&dir.path().join("norms.csv"), "W");
    assert_eq!(w.len(), 121);
    assert!(w.iter().all(|v| *v == 0.0));
}

#[test]
fn unperturbed_run_goes_extinct_after_two_crossings() {
    let dir = TempDir::new().unwrap();
    let out = run("solve", dir.path(), &format!("{BASE}problem.c = 0\ndata.w0 = random(3, 2)\ndata.w1 = random(4, 2)\n"));
    assert!(stderr(&out).contains("warning: data incompatible with the boundary conditions"));
    let norms = dir.path().join("norms.csv");
    let (t, w) = (numbers(&norms, "t"), numbers(&norms, "W"));
    let dt = 1.0 / 40.0;
    for (t, w) in t.iter().zip(&w) {
        if *t >= 2.0 + 2.0 * dt {
            assert!(*w <= 1e-12, "W({t}) = {w}");
        }
    }
    assert_eq!(csv(&norms).0, ["t", "W", "U", "sup_w", "sup_u"]);

    run("extinction", dir.path(), &format!("{BASE}problem.c = 0\ndata.w0 = hat(0.5)\ndata.w1 = zero\nrun.tols = 1e-12, 1e-6\n"));
    let ext = dir.path().join("extinction.csv");
    for (ts, two) in numbers(&ext, "t_star").iter().zip(numbers(&ext, "two_over_a")) {
        assert!(*ts <= two + 1e-12);
    }
}

#[test]
fn missing_required_key_is_named() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(dir.path(), "problem.p = 0.5\nproblem.horizon = 1\ngrid.n = 10\ndata.w0 = zero\ndata.w1 = zero\n");
    let out = wavelab(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], &[]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("problem.a"), "{}", stderr(&out));
    assert!(!dir.path().join("norms.csv").exists());
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = TempDir::new().unwrap();
    for (body, needle) in [
        ("problem.a = 1\nproblem.speed = 2\n", "line 2: unknown key `problem.speed`"),
        ("problem.a = 1\nrun.epsilons = 0.1, 0.1\n", "line 2"),
        ("reproduction = true\nproblem.a = 1\nforcing.manufactured = true\n", "line 3"),
    ] {
        let cfg = scenario(dir.path(), body);
        let out = wavelab(&["solve", "--config", cfg.to_str().unwrap()], &[]);
        assert!(!out.status.success());
        assert!(stderr(&out).contains(needle), "{body:?}: {}", stderr(&out));
    }
}

#[test]
fn decay_sweep_marks_extinct_rows() {
    let dir = TempDir::new().unwrap();
    let body = "problem.a = 1\nproblem.p = 0.5\nproblem.horizon = 12\ngrid.n = 40\nproblem.c = trig(1, pi, 1)\n\
                data.w0 = random(1, 2)\ndata.w1 = random(2, 2)\nrun.epsilons = 0, 0.05\nrun.window = 3, 12\n";
    run("decay-sweep", dir.path(), body);
    let decay = dir.path().join("decay.csv");
    assert_eq!(csv(&decay).0, ["epsilon", "gamma", "M", "rms", "window_lo", "window_hi"]);
    let eps = numbers(&decay, "epsilon");
    let gamma = column(&decay, "gamma");
    assert_eq!(eps, [0.05, 0.0]);
    assert!(gamma[0].parse::<f64>().unwrap().is_finite());
    assert_eq!(gamma[1], "extinct");
    assert_eq!(column(&decay, "M")[1], "none");
}

#[test]
fn verify_matches_exactly_without_coupling() {
    let dir = TempDir::new().unwrap();
    run(
        "verify",
        dir.path(),
        "problem.a = 1\nproblem.p = 0.5\nproblem.c = 0\nproblem.horizon = 6\ndata.w0 = random(5, 2)\n\
         data.w1 = zero\nrun.n_list = 16, 32\n",
    );
    let v = dir.path().join("verify.csv");
    assert!(numbers(&v, "sup_discrepancy").iter().all(|d| *d <= 1e-12));
    assert!(column(&v, "converged").iter().all(|c| c == "true"));
}

#[test]
fn strong_coupling_is_reported_not_fatal() {
    let dir = TempDir::new().unwrap();
    let out = run(
        "verify",
        dir.path(),
        "problem.a = 1\nproblem.p = 0.5\nproblem.c = 50\nproblem.horizon = 6\ndata.w0 = zero\n\
         data.w1 = sine(1)\nrun.n_list = 20\nrun.picard_max_iter = 40\n",
    );
    let v = dir.path().join("verify.csv");
    assert_eq!(column(&v, "converged"), ["false"]);
    assert_eq!(column(&v, "iterations"), ["40"]);
    assert!(stderr(&out).contains("did not converge"));
}

#[test]
fn plot_scripts_follow_column_kind() {
    let dir = TempDir::new().unwrap();
    run("solve", dir.path(), &format!("{BASE}problem.c = 0.1\ndata.w0 = hat(0.5)\ndata.w1 = zero\n"));
    let norms = dir.path().join("norms.csv");
    let out = wavelab(&["plot", "--csv", norms.to_str().unwrap(), "--columns", "W"], &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let script = fs::read_to_string(dir.path().join("norms_W.gp")).unwrap();
    assert!(script.lines().any(|l| l == "set logscale y"));
    assert!(script.contains("using 1:2"));

    fs::write(dir.path().join("decay.csv"), "epsilon,gamma\n0.1,2.5\n0,extinct\n").unwrap();
    let decay = dir.path().join("decay.csv");
    assert!(wavelab(&["plot", "--csv", decay.to_str().unwrap(), "--columns", "gamma"], &[]).status.success());
    assert!(!fs::read_to_string(dir.path().join("decay_gamma.gp")).unwrap().lines().any(|l| l == "set logscale y"));

    let missing = dir.path().join("absent.csv");
    let out = wavelab(&["plot", "--csv", missing.to_str().unwrap(), "--columns", "W"], &[]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("absent.csv"));
    let out = wavelab(&["plot", "--csv", norms.to_str().unwrap(), "--columns", "Q"], &[]);
    assert!(!out.status.success());
}

#[test]
fn output_directory_precedence() {
    let dir = TempDir::new().unwrap();
    let (flag, key, env) = (dir.path().join("flag"), dir.path().join("key"), dir.path().join("env"));
    let body = format!("{BASE}problem.c = 0\ndata.w0 = zero\ndata.w1 = zero\n");
    let keyed = scenario(dir.path(), &format!("{body}output.dir = {}\n", key.display()));
    let plain = dir.path().join("plain.cfg");
    fs::write(&plain, &body).unwrap();

    let ok = |o: Output| assert!(o.status.success(), "{}", stderr(&o));
    ok(wavelab(&["solve", "--config", keyed.to_str().unwrap(), "--out", flag.to_str().unwrap()], &[("WAVELAB_OUT_DIR", &env)]));
    assert!(flag.join("norms.csv").exists() && !key.exists() && !env.exists());
    ok(wavelab(&["solve", "--config", keyed.to_str().unwrap()], &[("WAVELAB_OUT_DIR", &env)]));
    assert!(key.join("norms.csv").exists() && !env.exists());
    ok(wavelab(&["solve", "--config", plain.to_str().unwrap()], &[("WAVELAB_OUT_DIR", &env)]));
    assert!(env.join("norms.csv").exists());
}

#[test]
fn snapshots_and_plots_are_written_on_request() {
    let dir = TempDir::new().unwrap();
    run(
        "solve",
        dir.path(),
        &format!("{BASE}problem.c = 0.1\ndata.w0 = hat(0.5)\ndata.w1 = zero\noutput.snapshots = true\noutput.emit_plots = true\ngrid.record_every = 40\n"),
    );
    for name in ["state_0.csv", "state_40.csv", "state_80.csv", "state_120.csv"] {
        let p = dir.path().join(name);
        assert_eq!(csv(&p).0, ["x", "w", "u"], "{name}");
        assert_eq!(csv(&p).1.len(), 41);
    }
    assert!(fs::read_dir(dir.path()).unwrap().any(|e| e.unwrap().path().extension().is_some_and(|x| x == "gp")));
}

#[test]
fn manufactured_forcing_reports_small_error() {
    let dir = TempDir::new().unwrap();
    run("solve", dir.path(), "problem.a = 1\nproblem.p = 0.5\nproblem.c = 0.2\nproblem.horizon = 1\ngrid.n = 80\nforcing.manufactured = true\n");
    let err = numbers(&dir.path().join("mms_error.csv"), "w_error");
    assert!(err.iter().all(|e| *e < 1e-3), "{err:?}");
}

#[test]
fn smoothing_writes_norms_and_ratios() {
    let dir = TempDir::new().unwrap();
    run(
        "smoothing",
        dir.path(),
        "problem.a = 1\nproblem.p = 0.5\nproblem.c = 0.05\nproblem.horizon = 3\ndata.w0 = hat(0.5)\ndata.w1 = zero\n\
         run.n_list = 40, 80\nrun.query_times = 0.5, 2.5\n",
    );
    let (head, rows) = csv(&dir.path().join("smoothing.csv"));
    assert_eq!(head, ["N", "t", "d00", "d10", "d01", "d20", "d11", "d02"]);
    assert_eq!(rows.len(), 4);
    let (head, rows) = csv(&dir.path().join("smoothing_ratios.csv"));
    assert_eq!(head[..3], ["N", "N_next", "t"]);
    assert_eq!(rows.len(), 2);
}

#[test]
fn mollify_study_writes_table_and_growth() {
    let dir = TempDir::new().unwrap();
    run(
        "mollify-study",
        dir.path(),
        "problem.a = 1\nproblem.p = 0.5\nproblem.c = 0.05\nproblem.horizon = 2\ndata.w0 = hat(0.5)\ndata.w1 = step(0.5)\n\
         grid.n = 256\nrun.l_list = 2, 4, 8\n",
    );
    let table = dir.path().join("mollify.csv");
    assert_eq!(column(&table, "l"), ["2", "4"]);
    assert!(column(&table, "within_bound").iter().all(|v| v == "true"));
    let d = numbers(&table, "sup_w_distance");
    assert!(d[1] < d[0]);
    assert_eq!(csv(&dir.path().join("mollify_growth.csv")).0, ["A", "M3", "horizon"]);
}
