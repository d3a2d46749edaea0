use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chebotarev::catalog;
use chebotarev::solver::ProblemSpec;
use chebotarev::ComplexPoly;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chebotarev"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixtures_match_catalog() {
    for n in 5..=8 {
        let spec: ProblemSpec = serde_json::from_str(&fs::read_to_string(fixture(&format!("rect_n{n}.json"))).unwrap()).unwrap();
        assert_eq!(spec, catalog::rectangle(n).unwrap());
    }
    for s in 1..=2 {
        let spec: ProblemSpec =
            serde_json::from_str(&fs::read_to_string(fixture(&format!("rect_n9_system{s}.json"))).unwrap()).unwrap();
        assert_eq!(spec, catalog::rectangle_degree9(s).unwrap());
    }
    let polys = [
        ("star5.json", catalog::star(5)),
        ("cross_half.json", catalog::cross(0.5)),
        ("cross_one.json", catalog::cross(1.0)),
        ("cubic_a1.json", catalog::cubic_family(1.0)),
        ("cubic_a2.json", catalog::cubic_family(2.0)),
        ("cubic_a3.json", catalog::cubic_family(3.0)),
        ("quartic_a2.json", catalog::quartic_family(2.0)),
        ("two_intervals.json", catalog::two_intervals()),
    ];
    for (name, t) in polys {
        let v = json(&fixture(name));
        assert!(v["description"].is_string());
        let p: ComplexPoly = serde_json::from_value(v["coeffs"].clone()).unwrap();
        assert_eq!(p, t, "{name}");
    }
}

#[test]
fn solve_writes_solution_with_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["solve", fixture("rect_n5.json").to_str().unwrap(), "--out", out, "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("+0.430331483i"));
    assert!(stdout.contains("capacity"));
    let doc = json(&dir.path().join("solution.json"));
    assert_eq!(doc["manifest"]["seed"], 7);
    let beta = doc["solution"]["points"]["c"][0][1].as_f64().unwrap();
    assert!((beta - 5f64.sqrt() / (3.0 * 3f64.sqrt())).abs() < 1e-8);
}

#[test]
fn solve_second_degree9_system() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", fixture("rect_n9_system2.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let doc = json(&dir.path().join("solution.json"));
    let z = &doc["solution"]["points"]["z"][0];
    assert!((z[0].as_f64().unwrap() - 0.906406).abs() < 1e-5);
    assert!((z[1].as_f64().unwrap().abs() - 0.49118).abs() < 1e-5);
}

#[test]
fn sweep_output_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let spec = fixture("rect_n7.json");
    let mut docs = Vec::new();
    for d in [&a, &b] {
        let o = run(&["solve", spec.to_str().unwrap(), "--out", d.path().to_str().unwrap(), "--sweep", "6", "--seed", "11"]);
        assert_eq!(code(&o), 0);
        let mut v = json(&d.path().join("solution.json"));
        v["manifest"]["out"] = Value::Null;
        docs.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(docs[0], docs[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&run(&["solve", bad.to_str().unwrap(), "--out", out])), 2);
    assert_eq!(code(&run(&["verify", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["solve"])), 2);

    // An iteration cap of one cannot converge.
    let mut spec: Value = json(&fixture("rect_n7.json"));
    spec["options"]["max_iter"] = 1.into();
    let capped = dir.path().join("capped.json");
    fs::write(&capped, spec.to_string()).unwrap();
    assert_eq!(code(&run(&["solve", capped.to_str().unwrap(), "--out", out])), 3);

    // Exact zero residual, but c[0] = c[2] and c[1] = d[0] = z[0].
    let degenerate = dir.path().join("degenerate.json");
    fs::write(
        &degenerate,
        r#"{"n": 4, "nu": 3, "alpha": [1, 1, -1], "gamma": [-1], "beta": [1], "vars": [
            {"role": "c", "index": 0, "status": "fixed", "value": [2.0, 0.0]},
            {"role": "c", "index": 1, "status": "fixed", "value": [0.5, 0.0]},
            {"role": "c", "index": 2, "status": "fixed", "value": [2.0, 0.0]},
            {"role": "d", "index": 0, "status": "fixed", "value": [0.5, 0.0]},
            {"role": "z", "index": 0, "status": "fixed", "value": [0.5, 0.0]}]}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["solve", degenerate.to_str().unwrap(), "--out", out])), 4);
}

#[test]
fn verify_reports() {
    for (name, pass) in [("star5.json", true), ("quartic_a2.json", true), ("cubic_a2.json", false), ("two_intervals.json", false)] {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&["verify", fixture(name).to_str().unwrap(), "--resolution", "256", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code(&o), if pass { 0 } else { 3 }, "{name}");
        let report: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(report["passed"], pass);
        assert_eq!(report["grid"]["pass"], true, "{name}: grid disagrees");
        assert_eq!(json(&dir.path().join("verify.json")), report);
        if name == "star5.json" {
            let cap = report["capacity"].as_f64().unwrap();
            assert!((cap - 2f64.powf(-0.2)).abs() < 1e-12);
        }
    }
}

#[test]
fn trace_writes_deterministic_csv_and_svg() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = run(&["trace", fixture("star5.json").to_str().unwrap(), "--steps", "128", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        assert!(String::from_utf8(o.stdout).unwrap().starts_with("5 arcs, 10 leaves"));
    }
    for f in ["arcs.csv", "continuum.svg"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
    let csv = fs::read_to_string(a.path().join("arcs.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("arc_id,theta,re,im"));
    assert_eq!(csv.lines().count(), 1 + 5 * 129);
    let svg = fs::read_to_string(a.path().join("continuum.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 5);
    assert_eq!(svg.matches("<circle").count(), 10);
}

#[test]
fn trace_accepts_solution_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&run(&["solve", fixture("rect_n5.json").to_str().unwrap(), "--out", out])), 0);
    let sol = dir.path().join("solution.json");
    let o = run(&["trace", sol.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("5 arcs, 4 leaves, 2 branch vertices, 5 edges, 1 components (tree)"));
    assert_eq!(json(&dir.path().join("graph.json"))["tree"], true);
}

#[test]
fn enumerate_lists_sign_systems() {
    for (n, rows) in [(6, 4), (7, 4)] {
        let o = run(&["enumerate", "3", &n.to_string()]);
        assert_eq!(code(&o), 0);
        assert!(String::from_utf8(o.stdout).unwrap().contains(&format!("{rows} systems")));
    }
    let o = run(&["enumerate", "4", "5"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("α=(+,+,-,-) γ=(+,-) β=()"));
    assert_eq!(code(&run(&["enumerate", "2", "5"])), 2);
}
