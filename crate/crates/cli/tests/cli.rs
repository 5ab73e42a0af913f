use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn weakbmo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakbmo")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "exit {:?}\nstderr: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV file, header skipped.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| if c.is_empty() { f64::NAN } else { c.parse().unwrap() }).collect())
        .collect()
}

#[test]
fn gen_dyadic_has_k_plus_one_atoms() {
    let dir = tempfile::tempdir().unwrap();
    ok(&weakbmo(&["gen", "dyadic", "--K", "8", "--out", "d"], dir.path()));
    let space = json(&dir.path().join("d/space.json"));
    assert_eq!(space["atoms"].as_array().unwrap().len(), 9);
    let f = json(&dir.path().join("d/function.json"));
    assert_eq!(f["values"]["3"].as_f64(), Some(-3.0));
}

#[test]
fn gen_log_example_mass() {
    let dir = tempfile::tempdir().unwrap();
    ok(&weakbmo(&["gen", "log-example", "--n", "1", "--m", "1000", "--out", "l"], dir.path()));
    let space = json(&dir.path().join("l/space.json"));
    let total: f64 = space["atoms"].as_array().unwrap().iter().map(|a| a["mass"].as_f64().unwrap()).sum();
    assert!((total - 2.0).abs() < 1e-9, "{total}");
}

#[test]
fn gen_random_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        ok(&weakbmo(&["gen", "random", "--seed", "7", "--n", "32", "--out", out], dir.path()));
    }
    for file in ["space.json", "function.json"] {
        assert_eq!(fs::read(dir.path().join("a").join(file)).unwrap(), fs::read(dir.path().join("b").join(file)).unwrap());
    }
    ok(&weakbmo(&["gen", "random", "--seed", "8", "--n", "32", "--out", "c"], dir.path()));
    assert_ne!(fs::read(dir.path().join("a/space.json")).unwrap(), fs::read(dir.path().join("c/space.json")).unwrap());
    assert_eq!(json(&dir.path().join("a/space.json"))["atoms"].as_array().unwrap().len(), 32);
}

#[test]
fn verify_with_no_instances() {
    let dir = tempfile::tempdir().unwrap();
    let out = weakbmo(&["verify", "--instances", "0", "--out", "r.json"], dir.path());
    ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0 checks"), "{stdout}");
    let report = json(&dir.path().join("r.json"));
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn corrupted_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    ok(&weakbmo(&["gen", "dyadic", "--K", "4", "--out", "d"], dir.path()));
    fs::write(dir.path().join("bad.json"), "{\"atoms\": [").unwrap();
    let out = weakbmo(&["analyze", "--space", "bad.json", "--function", "d/function.json", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = weakbmo(&["analyze", "--space", "missing.json", "--function", "d/function.json", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = weakbmo(&["bmo-report", "--space", "d/space.json", "--function", "bad.json", "--out", "x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_and_plot_dyadic() {
    let dir = tempfile::tempdir().unwrap();
    ok(&weakbmo(&["gen", "dyadic", "--K", "40", "--out", "d"], dir.path()));
    ok(&weakbmo(&["analyze", "--space", "d/space.json", "--function", "d/function.json", "--out", "a"], dir.path()));
    let report = json(&dir.path().join("a/report.json"));
    let header = &report["header"];
    assert!(header["version"].is_string());
    assert_eq!(header["tolerances"]["exact"].as_f64(), Some(1e-12));
    assert!(header["doubling"].as_f64().unwrap() <= 4.0);
    let m_ii = report["analysis"]["constants"]["m_ii"]["value"].as_f64().unwrap();
    assert!(m_ii < 2.0 && m_ii > 2.0 - 1e-9);

    ok(&weakbmo(&["plot-data", "--analysis", "a/report.json", "--out", "p"], dir.path()));
    let d = rows(&dir.path().join("p/distribution.csv"));
    assert_eq!(d.len(), 41);
    assert_eq!(d[0], vec![0.0, 1.0 - 1.0 / 2f64.powi(40)]);
    assert_eq!(d[40], vec![40.0, 0.0]);
    let r = rows(&dir.path().join("p/rearrangement.csv"));
    assert!(r.iter().all(|row| (row[3] - (row[2] - row[1])).abs() < 1e-15 && row[3] >= 0.0));
}

#[test]
fn plot_constant_function() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("s.json"),
        r#"{"atoms":[{"id":1,"mass":0.5,"coords":[0]},{"id":2,"mass":1.5,"coords":[1]}],"metric":"euclidean"}"#,
    )
    .unwrap();
    fs::write(dir.path().join("f.json"), r#"{"values":{"1":3,"2":-3}}"#).unwrap();
    ok(&weakbmo(&["analyze", "--space", "s.json", "--function", "f.json", "--out", "a"], dir.path()));
    ok(&weakbmo(&["plot-data", "--analysis", "a/report.json", "--out", "p"], dir.path()));
    assert_eq!(rows(&dir.path().join("p/distribution.csv")), vec![vec![3.0, 0.0]]);
    assert_eq!(rows(&dir.path().join("p/rearrangement.csv")), vec![vec![2.0, 0.0, 3.0, 3.0]]);
}

#[test]
fn log_example_distribution() {
    let dir = tempfile::tempdir().unwrap();
    ok(&weakbmo(&["gen", "log-example", "--n", "1", "--m", "10000", "--out", "l"], dir.path()));
    ok(&weakbmo(&["analyze", "--space", "l/space.json", "--function", "l/function.json", "--out", "a"], dir.path()));
    ok(&weakbmo(&["plot-data", "--analysis", "a/report.json", "--out", "p"], dir.path()));
    let d = rows(&dir.path().join("p/distribution.csv"));
    for row in d.iter().filter(|r| r[0] <= 5.0).step_by(50) {
        assert!((row[1] - 2.0 * (-row[0]).exp()).abs() < 1e-3, "{row:?}");
    }
}

#[test]
fn bmo_report_and_oscillation_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(&weakbmo(&["gen", "dyadic", "--K", "12", "--out", "d"], dir.path()));
    ok(&weakbmo(
        &["bmo-report", "--space", "d/space.json", "--function", "d/function.json", "--rho", "3", "--out", "b"],
        dir.path(),
    ));
    let report = json(&dir.path().join("b/report.json"));
    let r = &report["report"];
    let bmo = r["bmo_norm"]["value"].as_f64().unwrap();
    assert!(bmo <= r["bmto"]["value"].as_f64().unwrap());
    assert!(r["enlarged"]["value"].as_f64().unwrap() <= r["explicit_bound"].as_f64().unwrap());
    assert_eq!(r["john_nirenberg"]["holds"], Value::Bool(true));
    assert_eq!(r["global_weak"]["holds"], Value::Bool(true));
    let balls = rows(&dir.path().join("b/balls.csv"));
    assert_eq!(balls.len(), r["balls"].as_array().unwrap().len());
    let top = balls.iter().map(|b| b[6]).fold(0.0, f64::max);
    assert_eq!(top, bmo);

    ok(&weakbmo(&["plot-data", "--analysis", "b/report.json", "--out", "p"], dir.path()));
    assert_eq!(fs::read(dir.path().join("p/oscillation.csv")).unwrap(), fs::read(dir.path().join("b/balls.csv")).unwrap());
    let out = weakbmo(&["bmo-report", "--space", "d/space.json", "--function", "d/function.json", "--rho", "0.5", "--out", "c"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn counterexample_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(&weakbmo(&["counterexample", "--K", "40", "--out", "c.csv"], dir.path()));
    let table = rows(&dir.path().join("c.csv"));
    assert_eq!(table.len(), 20);
    for row in &table {
        let expected = (16.0 * row[0] + 4.0) / 9.0;
        assert!((row[1] - expected).abs() < 1e-12 * expected, "{row:?}");
    }
}

#[test]
fn cover_command() {
    let dir = tempfile::tempdir().unwrap();
    let atoms: Vec<String> = (0..20).map(|i| format!(r#"{{"id":{i},"mass":1,"coords":[{i}]}}"#)).collect();
    fs::write(dir.path().join("s.json"), format!(r#"{{"atoms":[{}],"metric":"euclidean"}}"#, atoms.join(","))).unwrap();
    fs::write(dir.path().join("f.json"), "[8, 9, 12]").unwrap();
    ok(&weakbmo(&["cover", "--space", "s.json", "--ball", "10,4.5", "--F", "f.json", "--out", "c.json"], dir.path()));
    let cover = &json(&dir.path().join("c.json"))["cover"];
    for key in ["disjoint", "property_i", "property_ii", "property_iii", "chain"] {
        assert_eq!(cover[key], Value::Bool(true), "{key}");
    }
    assert_eq!(cover["uncovered_mass"].as_f64(), Some(0.0));

    fs::write(dir.path().join("heavy.json"), "[8, 9, 10, 11, 12]").unwrap();
    let out = weakbmo(&["cover", "--space", "s.json", "--ball", "10,4.5", "--F", "heavy.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = weakbmo(&["cover", "--space", "s.json", "--ball", "10", "--F", "f.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    ok(&weakbmo(&["cover", "verify", "--seed", "3", "--instances", "20", "--out", "v.json"], dir.path()));
    let report = json(&dir.path().join("v.json"));
    assert_eq!(report["passed"], Value::Bool(true));
}

#[test]
fn violations_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    // an impossibly tight tolerance turns rounding noise into reported violations
    let out = weakbmo(&["--tol-const=-1", "verify", "--instances", "3"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
}
