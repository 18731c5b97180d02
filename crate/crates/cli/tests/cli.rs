use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn thermoporo(args: &[&str], threads: Option<&str>) -> Output {
    thermoporo_in(None, args, threads)
}

fn thermoporo_in(cwd: Option<&Path>, args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_thermoporo"));
    if let Some(d) = cwd {
        cmd.current_dir(d);
    }
    cmd.args(args).env_remove("THERMOPORO_THREADS");
    if let Some(t) = threads {
        cmd.env("THERMOPORO_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn flat_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn groups_reference_values() {
    let o = thermoporo(&["groups", "--flat", "--set", "phi_f=0.9"], None);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!((flat_value(&s, "Da") - 0.0583).abs() <= 1e-4);
    assert!((flat_value(&s, "Pe_f") - 0.7596).abs() <= 1e-4);
    assert_eq!(flat_value(&s, "N"), 2.0);
    assert_eq!(flat_value(&s, "kappa"), 1.0);

    let o = thermoporo(&["groups", "--flat", "--set", "phi_f=0.5", "--set", "c_k=4"], None);
    assert!((flat_value(&stdout(&o), "Da") - 0.0002).abs() <= 2e-5);
}

#[test]
fn groups_lists_formulas() {
    let o = thermoporo(&["groups"], None);
    let s = stdout(&o);
    assert!(s.contains("Da") && s.contains("mu_f*K/L^2"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(thermoporo(&[], None).status.code(), Some(1));
    assert_eq!(thermoporo(&["nonsense"], None).status.code(), Some(1));
    assert_eq!(thermoporo(&["groups", "--xi", "3"], None).status.code(), Some(1));
    assert_eq!(thermoporo(&["groups", "--set", "phif=0.9"], None).status.code(), Some(1));
    assert_eq!(thermoporo(&["groups", "--set", "novalue"], None).status.code(), Some(1));
    let o = thermoporo(&["groups", "--config", "/definitely/missing.conf"], None);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(thermoporo(&["sweep", "--key", "kappa_s", "--values", "1"], Some("zero")).status.code(), Some(1));
}

#[test]
fn config_error_reports_line_and_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "[dimensional]\n# porosity\nphif = 0.9\n").unwrap();
    let o = thermoporo(&["groups", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":3:") && err.contains("phi_f"), "{err}");
}

#[test]
fn solver_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = thermoporo(
        &["solve", "--set", "mu_f_k=1e-12", "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_writes_profiles_and_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = thermoporo(&["solve", "--grid", "51", "--xi", "1", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let profile = fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(profile.starts_with("x,v_f,pressure,u_s,theta_f,theta_s\n"));
    assert!(!profile.contains('\r'));
    assert_eq!(profile.lines().count(), 52);
    let second: Vec<&str> = profile.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(second[1].parse::<f64>().unwrap(), 1.0);

    // the resolved configuration reproduces the run byte for byte
    let again = dir.path().join("again");
    let o = thermoporo(
        &["solve", "--config", out.join("resolved.conf").to_str().unwrap(), "--out", again.to_str().unwrap()],
        None,
    );
    assert!(o.status.success());
    assert_eq!(fs::read(out.join("profile.csv")).unwrap(), fs::read(again.join("profile.csv")).unwrap());
}

#[test]
fn spherical_and_thermal_solves() {
    let dir = tempfile::tempdir().unwrap();
    let o = thermoporo(
        &["solve", "--set", "model=spherical", "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert!(o.status.success());
    let profile = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let last: Vec<f64> = profile.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 1.0);
    assert_eq!(last[1], 0.0);

    let o = thermoporo(
        &[
            "solve",
            "--set",
            "model=thermal",
            "--set",
            "velocity_source=zero",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success());
    let s = stdout(&o);
    for line in s.lines().filter(|l| l.starts_with("theta")) {
        let v: f64 = line.split(" = ").nth(1).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() <= 1e-12, "{line}");
    }
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let values = "1,2,3,4,5,6,7,8";
    let mut trees = Vec::new();
    for threads in ["1", "8"] {
        // same relative output path so the echoed configs match too
        let cwd = dir.path().join(threads);
        fs::create_dir(&cwd).unwrap();
        let out = cwd.join("sweep");
        let o = thermoporo_in(
            Some(&cwd),
            &["sweep", "--grid", "51", "--key", "kappa_s", "--values", values, "--out", "sweep"],
            Some(threads),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        trees.push(read_tree(&out));
    }
    assert_eq!(trees[0].len(), 8 * 3 + 2);
    assert_eq!(trees[0], trees[1]);
    let table = fs::read_to_string(dir.path().join("1").join("sweep").join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 9);
    assert!(table.starts_with("kappa_s,"));
}

#[test]
fn converge_reports_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = thermoporo(
        &["converge", "--set", "model=thermal", "--set", "phi_f=0.9", "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert!(o.status.success());
    let s = stdout(&o);
    let order: f64 = s.lines().nth(2).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((1.7..=2.3).contains(&order), "{s}");
}

#[test]
fn transient_writes_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = thermoporo(
        &[
            "transient",
            "--grid",
            "21",
            "--set",
            "solver.dt=720",
            "--set",
            "snapshot_times=0,3600,7200",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..3 {
        let t = fs::read_to_string(dir.path().join(format!("snapshot_{i:03}.csv"))).unwrap();
        assert!(t.starts_with("r,theta_f,theta_s,v_f,u_s\n"));
    }
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("snapshot_002.csv") && manifest.contains("model = transient"));
}
