use std::fs;
use std::process::{Command, Output};

use tempfile::tempdir;

fn timesym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timesym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn chsh_on_bundled_experiment() {
    let o = timesym(&["chsh", "bundled:chsh"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let value = v["value"].as_f64().unwrap();
    assert!((value - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-12);
    assert_eq!(v["verdict"], "INFEASIBLE");
    assert_eq!(v["spacelike_verdict"], "INFEASIBLE");
    assert_eq!(v["consistent"], true);
}

#[test]
fn price_is_not_a_chsh_violation() {
    let v = json(&timesym(&["chsh", "bundled:price"]));
    assert_eq!(v["value"].as_f64().unwrap(), 0.5);
    assert_eq!(v["verdict"], "FEASIBLE");
}

#[test]
fn verify_reverse_fails_on_asymmetric_experiment() {
    let o = timesym(&["verify-reverse", "bundled:cr-2", "bundled:cr-2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["result"], "FAIL");
    let err: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(err["error"], "check");
}

#[test]
fn reverse_then_verify() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("rev.json");
    let o = timesym(&["reverse", "bundled:cr-3", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&o)["result"], "PASS");
    let o = timesym(&["verify-reverse", "bundled:cr-3", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    // the reversed CR experiment is not its own reverse
    let o = timesym(&["verify-reverse", out.to_str().unwrap(), out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn chsh_self_reversal_gauge() {
    let v = json(&timesym(&["reverse", "bundled:chsh", "--gauge"]));
    let g = &v["verification"]["gauge"];
    assert_eq!(g["reflect"], true);
    assert!((g["angle"].as_f64().unwrap() - std::f64::consts::PI / 8.0).abs() < 1e-9);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        &["predict", "bundled:chsh"][..],
        &["reverse", "bundled:price"],
        &["bipartite", "bundled:cr-2"],
        &["toy-model"],
        &["cr-family", "--n-max", "4"],
    ] {
        let (a, b) = (timesym(args), timesym(args));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn lhv_check_exact_and_float() {
    let dir = tempdir().unwrap();
    let exact = dir.path().join("mix.csv");
    fs::write(&exact, "x,a,y,b,p\n0,0,0,0,1/2\n0,1,0,1,1/2\n").unwrap();
    let o = timesym(&["lhv-check", exact.to_str().unwrap(), "--expect", "feasible"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["arithmetic"], "exact");
    assert_eq!(v["report"]["certificate"]["weights"][0]["weight"], "1/2");
    let o = timesym(&["lhv-check", exact.to_str().unwrap(), "--expect", "infeasible"]);
    assert_eq!(o.status.code(), Some(1));

    let float = dir.path().join("chsh.csv");
    fs::write(&float, stdout(&timesym(&["predict", "bundled:chsh"]))).unwrap();
    let v = json(&timesym(&["lhv-check", float.to_str().unwrap()]));
    assert_eq!(v["arithmetic"], "float");
    assert_eq!(v["verdict"], "INFEASIBLE");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"schema\": \"nope\"}").unwrap();
    for args in [
        vec!["predict", bad.to_str().unwrap()],
        vec!["predict", "bundled:nothing"],
        vec!["ontic-check", bad.to_str().unwrap()],
        vec!["cr-family", "--n-max", "13"],
        vec!["--tol-prob", "0.5", "predict", "bundled:chsh"],
        vec!["frobnicate"],
    ] {
        let o = timesym(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = timesym(&["predict", "bundled:nothing"]);
    let err: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(err["error"], "input");
}

#[test]
fn bad_csv_is_an_input_error() {
    let dir = tempdir().unwrap();
    let f = dir.path().join("t.csv");
    fs::write(&f, "x,a,y,b,p\n0,0,0,0,2/3\n").unwrap();
    assert_eq!(timesym(&["lhv-check", f.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn cr_family_csv() {
    let o = timesym(&["cr-family", "--n-max", "4"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("n,"));
    assert!(lines[1].ends_with("FEASIBLE,FEASIBLE,lp"));
    assert!(lines[2..].iter().all(|l| l.ends_with("INFEASIBLE,INFEASIBLE,lp")));
}

#[test]
fn ontic_verbs() {
    let o = timesym(&["ontic-check", "bundled:toy-model"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["psi"]["class"], "epistemic");

    let o = timesym(&["toy-model"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["story"].as_array().unwrap().iter().all(|s| s["holds"] == true));

    let o = timesym(&["price-demo"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["contradiction"], true);
    assert_eq!(v["disjoint_supports"], true);

    // the toy model is psi-epistemic, so the argument does not apply
    let v = json(&timesym(&["price-demo", "bundled:toy-model"]));
    assert_eq!(v["applicable"], false);
}

#[test]
fn paper_suite_passes() {
    let o = timesym(&["paper-suite"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("criterion") && l.contains(" PASS "))
            .count(),
        8
    );
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("document") && l.ends_with("PASS"))
            .count(),
        10
    );
}
