use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn krotov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krotov-lq")).args(args).output().expect("binary runs")
}

fn report(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("report.txt")).unwrap()
}

fn value(report: &str, key: &str) -> f64 {
    let line = report.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key:?} in report"));
    line[key.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

fn scenario(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn ex1_report_has_selected_root_and_gain() {
    let tmp = tempfile::tempdir().unwrap();
    let out = krotov(&["example", "ex1", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(tmp.path());
    assert_eq!(value(&r, "selected p"), 0.414214);
    assert_eq!(value(&r, "gain"), 0.414214);
    for f in ["solutions.csv", "certificate.csv", "trajectory.csv", "plot.csv"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
}

#[test]
fn ex3_report_flags_printed_formula() {
    let tmp = tempfile::tempdir().unwrap();
    let out = krotov(&["example", "ex3", "--dt", "1e-3", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(tmp.path());
    assert!((value(&r, "p(t0)") - 0.5).abs() < 1e-3);
    assert!(r.contains("reciprocal"));
    let riccati = std::fs::read_to_string(tmp.path().join("riccati.csv")).unwrap();
    assert_eq!(riccati.lines().next(), Some("t,p_11"));
    assert_eq!(riccati.lines().last(), Some("5e0,1e0"));
}

#[test]
fn open_loop_simulation_of_hurwitz_plant_decays() {
    let tmp = tempfile::tempdir().unwrap();
    let file = scenario(
        tmp.path(),
        "stable.txt",
        "kind = regulation\nA = -1,0.5; 0,-2\nB = 1; 1\nQ = 1,0; 0,1\nR = 1\ntf = inf\nx0 = 1, -1\n",
    );
    let out_dir = tmp.path().join("out");
    let out = krotov(&["simulate", "--scenario", &file, "--open-loop", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out_dir);
    assert!(r.contains("decaying                     yes"));
    let traj = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let last: Vec<f64> = traj.lines().rev().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(last[1].abs() < 1e-6 && last[2].abs() < 1e-6);
    // u = 0 throughout
    assert_eq!(last[3], 0.0);
}

#[test]
fn plot_columns_for_tracking_and_regulation() {
    let tmp = tempfile::tempdir().unwrap();
    let ex2 = tmp.path().join("ex2");
    assert!(krotov(&["track", "--scenario", "ex2", "--out", ex2.to_str().unwrap()]).status.success());
    let plot = std::fs::read_to_string(ex2.join("plot.csv")).unwrap();
    assert_eq!(plot.lines().next(), Some("t,y,z"));
    let t_end: f64 = plot.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(t_end, 400.0);
    assert!(plot.lines().count() <= 20_002);

    let ex5 = tmp.path().join("ex5");
    assert!(krotov(&["simulate", "--scenario", "ex5", "--out", ex5.to_str().unwrap()]).status.success());
    let plot = std::fs::read_to_string(ex5.join("plot.csv")).unwrap();
    assert_eq!(plot.lines().next(), Some("t,x_1,x_2,u_1,u_2"));
}

#[test]
fn enumerate_lists_every_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let out = krotov(&["enumerate", "--scenario", "ex5", "--starts", "500", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("solutions.csv")).unwrap();
    assert!(csv.starts_with("p_11,p_12,p_21,p_22,residual_norm,symmetric,spd_symmetric_part,closed_loop_stable\n"));
    assert!(csv.lines().count() >= 5);
    assert_eq!(csv.lines().filter(|l| l.ends_with("true,true")).count(), 1);
}

#[test]
fn iterate_writes_cost_sequence() {
    let tmp = tempfile::tempdir().unwrap();
    let out = krotov(&["iterate", "--scenario", "krotov-demo", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("iterations.csv")).unwrap();
    let costs: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!((costs[0] - 12.5).abs() < 1e-3);
    assert!(costs.windows(2).all(|w| w[1] <= w[0]));
    assert!(!report(tmp.path()).contains("DISCREPANCY"));
}

#[test]
fn exit_codes_by_failure_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out_dir = out_dir.to_str().unwrap();

    let missing = krotov(&["solve", "--scenario", "no/such/file.txt", "--out", out_dir]);
    assert_eq!(missing.status.code(), Some(1));

    let bad_r = scenario(tmp.path(), "bad_r.txt", "kind = regulation\nA = -1\nB = 1\nQ = 1\nR = 0\ntf = inf\nx0 = 1\n");
    let out = krotov(&["solve", "--scenario", &bad_r, "--out", out_dir]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model::validate"));

    let unstabilizable =
        scenario(tmp.path(), "unstab.txt", "kind = regulation\nA = 1\nB = 0\nQ = 1\nR = 1\ntf = inf\nx0 = 1\n");
    let out = krotov(&["solve", "--scenario", &unstabilizable, "--out", out_dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solvers::select_stabilizing"));

    let explosive =
        scenario(tmp.path(), "explode.txt", "kind = regulation\nA = 50\nB = 1\nQ = 1\nR = 1\nt0 = 0\ntf = 10\nx0 = 1\n");
    let out = krotov(&["simulate", "--scenario", &explosive, "--open-loop", "--out", out_dir]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sim::simulate"));

    let out = krotov(&["solve", "--scenario", "ex1", "--dt", "0", "--out", out_dir]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_runs_give_identical_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        assert!(krotov(&["example", "ex6", "--seed", "3", "--out", dir.to_str().unwrap()]).status.success());
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    };
    let a = run("a");
    assert!(a.len() >= 4);
    assert_eq!(a, run("b"));
}

#[test]
fn every_builtin_example_finishes_quickly() {
    let tmp = tempfile::tempdir().unwrap();
    for id in ["ex1", "ex2", "ex3", "ex4", "ex5", "ex6", "krotov-demo"] {
        let start = Instant::now();
        let out = krotov(&["example", id, "--out", tmp.path().join(id).to_str().unwrap()]);
        let secs = start.elapsed().as_secs_f64();
        assert!(out.status.success(), "{id}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(secs < 30.0, "{id} took {secs:.1} s");
    }
}
