//! End-to-end runs of the `oldroyd` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oldroyd::cli_io::checkpoint::read_checkpoint;
use oldroyd::cli_io::series::read_series;
use oldroyd::diagnostics::COLUMNS;
use oldroyd::fields::norm_l2;
use oldroyd::spectral::FieldStack;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_oldroyd"));
    c.env_remove("OLDROYD_OUTPUT_ROOT");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn simulate(dir: &Path, cfg: &str) -> Output {
    let path = write_config(dir, "run.cfg", cfg);
    run_in(dir, &["simulate", "--config", path.to_str().unwrap()])
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const TAYLOR_GREEN: &str = "\
model = corotational
params.nu = 0
grid.n = 32
stepper.dt = 1e-3
stepper.t_end = 0.2
sampling.record_every = 10
init.family = taylor_green
output_dir = out
";

const SMALL_RANDOM: &str = "\
model = general
params.a = 1
params.mu = 1
params.nu = 1
params.alpha = 1
params.b = 1
grid.n = 32
stepper.dt = 1e-3
stepper.t_end = 0.1
sampling.record_every = 5
init.family = random_small
init.seed = 4
init.amplitude = 1e-2
fit.window = 0:0.1
output_dir = out
";

#[test]
fn zero_data_gives_zero_norms() {
    let tmp = TempDir::new().unwrap();
    let o = simulate(
        tmp.path(),
        "grid.n = 16\nstepper.dt = 0.01\nstepper.t_end = 0.1\nsampling.record_every = 1\ninit.family = zero\noutput_dir = out\n",
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_series(&tmp.path().join("out/series.csv")).unwrap();
    assert_eq!(rows.len(), 11);
    for r in &rows {
        assert!(r.values()[1..].iter().all(|&v| v == 0.0));
    }
}

#[test]
fn constant_stress_energy_identity_is_exact() {
    let tmp = TempDir::new().unwrap();
    let o = simulate(
        tmp.path(),
        "model = corotational\nparams.a = 0.7\ngrid.n = 16\nstepper.dt = 0.01\nstepper.t_end = 0.5\ninit.family = constant_stress\ninit.c = 0.3\noutput_dir = out\n",
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&tmp.path().join("out"));
    let res = r["series"]["energy_identity_residual"].as_f64().unwrap();
    assert!(res <= 1e-10, "residual {res}");
}

#[test]
fn taylor_green_conserves_energy() {
    let tmp = TempDir::new().unwrap();
    let o = simulate(tmp.path(), TAYLOR_GREEN);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_series(&tmp.path().join("out/series.csv")).unwrap();
    let e0 = rows[0].l2_u;
    for r in &rows {
        assert!((r.l2_u - e0).abs() <= 1e-8 * e0);
    }
    let r = report(&tmp.path().join("out"));
    assert_eq!(r["status"], "completed");
    assert_eq!(r["steps_completed"], 200);
}

#[test]
fn diagnose_reproduces_report() {
    let tmp = TempDir::new().unwrap();
    let o = simulate(tmp.path(), SMALL_RANDOM);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = tmp.path().join("out");
    let d = run_in(
        tmp.path(),
        &["diagnose", "--series", "out/series.csv", "--config", "run.cfg"],
    );
    assert_eq!(code(&d), 0, "{}", stderr(&d));
    let summary: Value = serde_json::from_slice(&d.stdout).unwrap();
    assert_eq!(summary, report(&out)["series"]);
    assert_eq!(summary["bkm_matches_stored"], true);
}

#[test]
fn diagnose_without_config_notes_missing_params() {
    let tmp = TempDir::new().unwrap();
    simulate(tmp.path(), SMALL_RANDOM);
    let d = run_in(tmp.path(), &["diagnose", "--series", "out/series.csv"]);
    assert_eq!(code(&d), 0);
    let summary: Value = serde_json::from_slice(&d.stdout).unwrap();
    assert!(summary["energy_identity_residual"].is_null());
    assert!(summary["notes"]["energy_identity_residual"].is_string());
}

#[test]
fn truncated_series_lists_missing_rows() {
    let tmp = TempDir::new().unwrap();
    simulate(tmp.path(), SMALL_RANDOM);
    let path = tmp.path().join("out/series.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let kept: Vec<&str> = text.lines().take(6).collect();
    std::fs::write(&path, kept.join("\n") + "\n").unwrap();
    let d = run_in(
        tmp.path(),
        &["diagnose", "--series", "out/series.csv", "--config", "run.cfg"],
    );
    assert_eq!(code(&d), 1);
    let err = stderr(&d);
    assert!(err.contains("expected 21 samples, found 5"), "{err}");
    assert!(err.contains("t = 0.025"), "{err}");

    // a row cut mid-write is reported by number
    let partial = format!("{}\n{}", kept.join("\n"), "0.03,1.0");
    std::fs::write(&path, partial).unwrap();
    let d = run_in(tmp.path(), &["diagnose", "--series", "out/series.csv"]);
    assert_eq!(code(&d), 1);
    assert!(stderr(&d).contains("data row numbers): 6"), "{}", stderr(&d));
}

#[test]
fn missing_columns_are_named() {
    let tmp = TempDir::new().unwrap();
    let header: Vec<&str> = COLUMNS.iter().copied().filter(|c| *c != "h1_u" && *c != "bkm_accum").collect();
    let row = vec!["0"; header.len()].join(",");
    std::fs::write(tmp.path().join("s.csv"), format!("{}\n{row}\n", header.join(","))).unwrap();
    let d = run_in(tmp.path(), &["diagnose", "--series", "s.csv"]);
    assert_eq!(code(&d), 1);
    let err = stderr(&d);
    assert!(err.contains("missing columns: h1_u, bkm_accum"), "{err}");
}

#[test]
fn fit_recovers_planted_exponent() {
    let tmp = TempDir::new().unwrap();
    let mut text = COLUMNS.join(",") + "\n";
    for i in 0..60 {
        let t = 0.5 * i as f64;
        let mut v = [0.0; 14];
        v[0] = t;
        v[2] = 2.0 * (1.0 + t).powf(-0.75);
        text += &v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        text.push('\n');
    }
    std::fs::write(tmp.path().join("s.csv"), text).unwrap();
    let f = run_in(tmp.path(), &["fit", "--series", "s.csv", "--window", "2:25"]);
    assert_eq!(code(&f), 0, "{}", stderr(&f));
    let v: Value = serde_json::from_slice(&f.stdout).unwrap();
    assert!((v["exponent"].as_f64().unwrap() + 0.75).abs() < 1e-12);
    assert_eq!(v["samples"], 47);

    let bad = run_in(tmp.path(), &["fit", "--series", "s.csv", "--window", "5:1"]);
    assert_eq!(code(&bad), 1);
    let empty = run_in(tmp.path(), &["fit", "--series", "s.csv", "--window", "100:200"]);
    assert_eq!(code(&empty), 1);
}

#[test]
fn growing_vorticity_is_flagged_suspect() {
    let tmp = TempDir::new().unwrap();
    let mut text = COLUMNS.join(",") + "\n";
    for i in 0..20 {
        let t = 0.1 * i as f64;
        let mut v = [0.0; 14];
        v[0] = t;
        v[2] = 1.0;
        v[8] = (1.0 - t / 2.5).recip();
        text += &v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        text.push('\n');
    }
    std::fs::write(tmp.path().join("s.csv"), text).unwrap();
    let d = run_in(tmp.path(), &["diagnose", "--series", "s.csv"]);
    assert_eq!(code(&d), 2, "{}", stderr(&d));
    let v: Value = serde_json::from_slice(&d.stdout).unwrap();
    assert_eq!(v["bkm_suspect"], true);
    assert_eq!(v["bkm_matches_stored"], false);
}

#[test]
fn restart_reproduces_uninterrupted_run() {
    let tmp = TempDir::new().unwrap();
    let full = tmp.path().join("full");
    let split = tmp.path().join("split");
    std::fs::create_dir_all(&full).unwrap();
    std::fs::create_dir_all(&split).unwrap();
    let cfg = SMALL_RANDOM.replace("stepper.t_end = 0.1", "stepper.t_end = 0.06");
    assert_eq!(code(&simulate(&full, &cfg)), 0);

    let first = SMALL_RANDOM.replace("stepper.t_end = 0.1", "stepper.t_end = 0.03");
    assert_eq!(code(&simulate(&split, &first)), 0);
    let path = write_config(&split, "run.cfg", &cfg);
    let o = run_in(&split, &["simulate", "--config", path.to_str().unwrap(), "--resume"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let a = read_checkpoint(&full.join("out/checkpoint.bin")).unwrap();
    let b = read_checkpoint(&split.join("out/checkpoint.bin")).unwrap();
    assert_eq!(a.step, 60);
    assert_eq!(b.step, 60);
    let sa = FieldStack::new(&a.state.u).with(&a.state.tau);
    let du = &a.state.u.u1 - &b.state.u.u1;
    let dt = &a.state.tau.t12 - &b.state.tau.t12;
    let diff = (norm_l2(&du).powi(2) + norm_l2(&dt).powi(2)).sqrt();
    assert!(diff <= 1e-12 * norm_l2(&sa), "restart differs by {diff}");
    assert_eq!(
        std::fs::read(full.join("out/series.csv")).unwrap(),
        std::fs::read(split.join("out/series.csv")).unwrap()
    );
}

#[test]
fn outputs_are_byte_stable() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        std::fs::create_dir_all(d).unwrap();
        assert_eq!(code(&simulate(d, SMALL_RANDOM)), 0);
    }
    for f in ["series.csv", "report.json", "checkpoint.bin"] {
        assert_eq!(
            std::fs::read(a.join("out").join(f)).unwrap(),
            std::fs::read(b.join("out").join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn output_root_env_var_relocates_runs() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path().join("elsewhere");
    let path = write_config(tmp.path(), "run.cfg", TAYLOR_GREEN);
    let o = bin()
        .current_dir(tmp.path())
        .env("OLDROYD_OUTPUT_ROOT", &root)
        .args(["simulate", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(root.join("out/series.csv").exists());
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn cfl_failure_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = TAYLOR_GREEN.replace("stepper.dt = 1e-3", "stepper.dt = 0.1");
    let o = simulate(tmp.path(), &cfg);
    assert_eq!(code(&o), 3);
    let r = report(&tmp.path().join("out"));
    assert_eq!(r["status"], "cfl_failure");
    assert_eq!(r["exit_code"], 3);
    assert_eq!(r["cfl_failure"]["step"], 1);
    assert!(r["cfl_failure"]["admissible"].as_f64().unwrap() < 0.1);
}

#[test]
fn invalid_config_names_the_key() {
    let tmp = TempDir::new().unwrap();
    let o = simulate(tmp.path(), &TAYLOR_GREEN.replace("grid.n = 32", "grid.n = 15"));
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("grid.n"), "{}", stderr(&o));
    let o = simulate(tmp.path(), &format!("{TAYLOR_GREEN}params.bogus = 1\n"));
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("params.bogus"), "{}", stderr(&o));
    let o = run_in(tmp.path(), &["simulate"]);
    assert_eq!(code(&o), 1);
}

fn sweep_rows(dir: &Path, cfg: &str, axis: &str, values: &str) -> Vec<Vec<String>> {
    let path = write_config(dir, "base.cfg", cfg);
    let o = run_in(
        dir,
        &["sweep", "--config", path.to_str().unwrap(), "--axis", axis, "--values", values],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout, std::fs::read_to_string(dir.join("out/sweep.csv")).unwrap());
    stdout
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sweep_over_eps_flips_gradient_condition() {
    let tmp = TempDir::new().unwrap();
    let cfg = "\
model = corotational
grid.n = 128
grid.L = 40
stepper.dt = 1e-3
stepper.t_end = 1e-3
init.family = remark12
init.A = 1
init.eps = 0.3
smallness_c = 1
output_dir = out
";
    let rows = sweep_rows(tmp.path(), cfg, "init.eps", "0.3,0.9");
    assert_eq!(rows.len(), 2);
    // ‖∇u₀‖ = ε√π A against c·κ = 1
    assert!(!rows[0][5].contains("thm1_1.grad_u0_l2"), "{:?}", rows[0]);
    assert!(rows[1][5].contains("thm1_1.grad_u0_l2"), "{:?}", rows[1]);
}

#[test]
fn single_value_sweep_matches_simulate() {
    let tmp = TempDir::new().unwrap();
    let rows = sweep_rows(tmp.path(), SMALL_RANDOM, "params.a", "1");
    assert_eq!(rows[0][2], "completed");
    let sim = tmp.path().join("sim");
    std::fs::create_dir_all(&sim).unwrap();
    simulate(&sim, SMALL_RANDOM);
    for f in ["series.csv", "report.json"] {
        assert_eq!(
            std::fs::read(tmp.path().join("out/run_000").join(f)).unwrap(),
            std::fs::read(sim.join("out").join(f)).unwrap()
        );
    }
}

#[test]
fn sweep_over_dt_converges_at_second_order() {
    let tmp = TempDir::new().unwrap();
    let cfg = "\
model = corotational
grid.n = 32
grid.L = 100.53096491487338
stepper.dt = 2e-3
stepper.t_end = 0.5
sampling.record_every = 5
init.family = random_small
init.seed = 2
init.amplitude = 1e-2
output_dir = out
";
    let rows = sweep_rows(tmp.path(), cfg, "stepper.dt", "4e-3,2e-3,1e-3");
    let res: Vec<f64> = rows.iter().map(|r| r[7].parse().unwrap()).collect();
    for w in res.windows(2) {
        assert!(w[0] / w[1] >= 3.5, "residuals {res:?}");
    }
}

#[test]
fn sweep_records_failed_runs_and_rejects_bad_axes() {
    let tmp = TempDir::new().unwrap();
    let rows = sweep_rows(tmp.path(), TAYLOR_GREEN, "grid.n", "32,15");
    assert_eq!(rows[0][2], "completed");
    assert!(rows[1][2].starts_with("\"error:"), "{:?}", rows[1]);
    let path = write_config(tmp.path(), "base.cfg", TAYLOR_GREEN);
    let o = run_in(
        tmp.path(),
        &["sweep", "--config", path.to_str().unwrap(), "--axis", "model", "--values", "1"],
    );
    assert_eq!(code(&o), 1);
}
