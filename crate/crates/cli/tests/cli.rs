use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasispin")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("quasispin-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn zero_modes_is_a_usage_error() {
    let o = run(&["verify", "--m", "0", "--nmax", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("m must be ≥ 1"), "{}", stderr(&o));
}

#[test]
fn verify_is_deterministic() {
    let a = run(&["verify", "--m", "1", "--nmax", "8", "--seed", "5"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = run(&["verify", "--m", "1", "--nmax", "8", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
    let r = stdout_json(&a);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["passed"], true);
    for c in r["checks"].as_array().unwrap() {
        assert!(c["residual"].as_f64().unwrap() <= c["threshold"].as_f64().unwrap(), "{c}");
    }
}

#[test]
fn verify_two_modes_includes_basis_and_expansion_checks() {
    let o = run(&["verify", "--m", "2", "--nmax", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout_json(&o);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"basis states Gram"));
    assert!(names.contains(&"X-biphoton expansion"));
    assert!(names.contains(&"algebra [P,X+] = 0"));
}

#[test]
fn state_examples() {
    let o = run(&["state", "--nmax", "3", "--spec", "max(p=1/2,theta=0)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout_json(&o);
    assert_eq!(r["kind"], "pure");
    let amps = r["amplitudes"].as_array().unwrap();
    // Index 1 is |n+ = 1, n- = 0>.
    for (i, a) in amps.iter().enumerate() {
        let want = if i == 1 { 1.0 } else { 0.0 };
        assert!((a[0].as_f64().unwrap() - want).abs() < 1e-15 && a[1].as_f64().unwrap().abs() < 1e-15);
    }

    let o = run(&["state", "--nmax", "14", "--spec", "glauber(α+=1,α-=0)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout_json(&o);
    let amps = r["amplitudes"].as_array().unwrap();
    let tail = r["leaked_tail"].as_f64().unwrap();
    assert!(tail > 0.0 && tail < 1e-10);
    let mut fact = 1.0f64;
    for n in 0..=14usize {
        if n > 0 {
            fact *= n as f64;
        }
        // |n, 0> opens the block of total n.
        let idx = n * (n + 1) / 2;
        let want = (-0.5f64).exp() / fact.sqrt() / (1.0 - tail).sqrt();
        assert!((amps[idx][0].as_f64().unwrap() - want).abs() < 1e-14, "n = {n}");
    }

    let o = run(&["state", "--m", "2", "--nmax", "4", "--spec", "x(p=0,zeta=0.5)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("truncation tail"), "{}", stderr(&o));
}

#[test]
fn spec_errors_name_the_field() {
    let o = run(&["state", "--spec", "semi(p=1/2,mu=1/2,theta=7)"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("theta"), "{}", stderr(&o));
    let o = run(&["state", "--spec", r#"{"family":"glauber","alpha_plus":[[1,0]],"bogus":1}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
    let o = run(&["state"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn squeeze_thermal_is_thermal_like() {
    let o = run(&["squeeze", "--nmax", "60", "--spec", "thermal(β=ln2)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout_json(&o);
    assert_eq!(r["report"]["unpolarized_class"], "thermal_like");
    assert!((r["report"]["mean_n"].as_f64().unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn squeeze_reads_state_artifacts() {
    let path = scratch("state.json");
    let spec = "max(p=1,theta=0.7,phi=1.9)";
    let o = run(&["state", "--nmax", "4", "--spec", spec, "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let from_file = run(&["squeeze", "--state", path.to_str().unwrap()]);
    let direct = run(&["squeeze", "--nmax", "4", "--spec", spec]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    let (a, b) = (stdout_json(&from_file), stdout_json(&direct));
    assert!((a["report"]["delta_p2"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((a["report"]["delta_p2"].as_f64().unwrap() - b["report"]["delta_p2"].as_f64().unwrap()).abs() < 1e-15);
}

#[test]
fn phase_half_photon_great_circle() {
    let o = run(&["phase", "--loop", "circle:theta=1.5707963", "--spec", "semi(p=1/2,μ=1/2)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout_json(&o);
    assert!((r["gamma_total"].as_f64().unwrap() + PI).abs() < 1e-5, "{r}");
    assert_eq!(r["converged"], true);
    assert!(r["K_final"].as_u64().unwrap() >= 64);
}

#[test]
fn phase_from_csv_loop() {
    let path = scratch("loop.csv");
    let mut csv = String::from("theta,phi\n");
    for k in 0..=32 {
        csv.push_str(&format!("{},{}\n", 1.0, 2.0 * PI * k as f64 / 32.0));
    }
    fs::write(&path, csv).unwrap();
    let o = run(&["phase", "--loop", path.to_str().unwrap(), "--spec", "max(p=1,theta=0)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout_json(&o);
    let want = -2.0 * 2.0 * PI * 0.5f64.sin().powi(2);
    assert!((r["gamma_total"].as_f64().unwrap() - want).abs() < 1e-5, "{r}");
    let o = run(&["phase", "--loop", "square:side=1", "--spec", "max(p=1,theta=0)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn qfunc_thermal_is_flat() {
    let out = scratch("q.csv");
    let o = run(&[
        "qfunc", "--nmax", "50", "--p", "1/2", "--grid", "6x8", "--spec", "thermal(beta=ln2)", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("theta,phi,q"));
    let mut rows = 0;
    for line in lines {
        let q: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((q - 0.125).abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 48);
    let meta: Value = serde_json::from_str(&fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert!(meta["closed_form_max_error"].as_f64().unwrap() < 1e-12);
    assert_eq!(meta["grid"]["theta_nodes"], 6);
}

#[test]
fn qfunc_output_is_reproducible() {
    let args = ["qfunc", "--nmax", "4", "--ref", "max(p=1)", "--grid", "5x7", "--spec", "semi(p=1,mu=0,theta=1,phi=2)"];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, run(&args).stdout);
    let o = run(&["qfunc", "--spec", "semi(p=1,mu=0)"]);
    assert_eq!(o.status.code(), Some(2));
}
