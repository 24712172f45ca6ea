use std::process::Command;

use acml_cli::bundled::{bundled, BUNDLED};
use acml_cli::report::to_json;
use acml_cli::{load_scenario, resolve, run_scenario, RunOptions, Task};
use acml_core::sampling::{sample_points, SampleSpec};
use acml_core::Verdict;
use serde_json::Value;

const HEADER3: &str = r#"name = t
dim = 3
[gamma]  a1 = "-x2"   a2 = "0"
"#;

fn with_header(rest: &str) -> String {
    format!("{HEADER3}{rest}")
}

const BODY_B: &str = r#"[g]      r1 = "1","0"   r2 = "0","1"
[phi]    r1 = "0","1"   r2 = "-1","0"
[tasks]  run = validate
"#;

#[test]
fn bundled_fixture_b_loads() {
    let sc = load_scenario(bundled("fixtureB.scn").unwrap()).unwrap();
    assert_eq!(sc.dim, 3);
    assert_eq!(sc.tasks, vec![Task::Classify, Task::Q4, Task::Theorem7]);
    assert_eq!(sc.sample.count, 200);
    assert_eq!(sc.sample.seed, 42);
    assert_eq!(sc.sample.tolerance, 1e-8);
    for (name, text) in BUNDLED {
        assert!(load_scenario(text).is_ok(), "{name}");
    }
}

#[test]
fn defaults_apply() {
    let sc = load_scenario(&with_header(BODY_B)).unwrap();
    assert_eq!(sc.sample.count, 100);
    assert_eq!(sc.sample.seed, 0);
    assert_eq!(sc.sample.bounds, vec![(-1.0, 1.0); 3]);
    assert!(!sc.fd_check);
}

#[test]
fn two_by_three_phi_is_a_dimension_mismatch() {
    let text = with_header(
        r#"[g]      r1 = "1","0"   r2 = "0","1"
[phi]    r1 = "0","1","0"   r2 = "-1","0","0"
[tasks]  run = validate
"#,
    );
    let e = load_scenario(&text).unwrap_err();
    assert_eq!(e.line, 5);
    assert!(e.message.contains("dimension mismatch"), "{e}");
    let text = with_header(
        r#"[g]      r1 = "1","0"   r2 = "0","1"
[phi]    r1 = "0","1"   r2 = "-1","0"   r3 = "0","0"
[tasks]  run = validate
"#,
    );
    assert!(load_scenario(&text).unwrap_err().message.contains("dimension mismatch"));
}

#[test]
fn out_of_range_coordinate_is_forwarded() {
    let text = r#"dim = 5
[gamma] a1 = "0"  a2 = "0"  a3 = "0"  a4 = "0"
[g] g11 = "1" g12 = "x9" g13 = "0" g14 = "0"
    g22 = "1" g23 = "0" g24 = "0" g33 = "1" g34 = "0" g44 = "1"
[phi] r1 = "0","-1","0","0"  r2 = "1","0","0","0"  r3 = "0","0","0","-1"  r4 = "0","0","1","0"
[tasks] run = validate
"#;
    let e = load_scenario(text).unwrap_err();
    assert_eq!(e.line, 3);
    assert!(e.message.contains("g12") && e.message.contains("out of range"), "{e}");
}

#[test]
fn entry_keys_mirror_in_g() {
    let text = r#"dim = 5
[gamma] a1 = "0"  a2 = "0"  a3 = "0"  a4 = "0"
[g] g11 = "1" g12 = "0.1*x1" g13 = "0" g14 = "0"
    g22 = "1" g23 = "0" g24 = "0" g33 = "1" g34 = "0" g44 = "1"
[phi] r1 = "0","-1","0","0"  r2 = "1","0","0","0"  r3 = "0","0","0","-1"  r4 = "0","0","1","0"
[tasks] run = validate
"#;
    let sc = load_scenario(text).unwrap();
    assert_eq!(sc.g[1][0], "0.1*x1");
}

#[test]
fn rejects_bad_input_with_line_numbers() {
    let cases: [(&str, usize, &str); 9] = [
        ("bogus = 1\n", 4, "unknown key"),
        ("[g] r1 = \"1\",\"0\" r1 = \"0\",\"1\"\n", 4, "duplicate key"),
        ("[gg]\n", 4, "unknown section"),
        ("[g] r1 = \"1\",\"x1\"  r2 = \"0\",\"1\"\n[phi] r1 = \"0\",\"1\" r2 = \"-1\",\"0\"\n[tasks] run = validate\n", 4, "not symmetric"),
        ("[g] r1 = \"1\",\"0\"  r2 = \"0\",\"1\"\n[phi] r1 = \"0\",\"1\" r2 = \"-1\",\"0\"\n[tasks] run = validate, nonsense\n", 6, "unknown task"),
        ("[g] r1 = \"1\",\"0\"  r2 = \"0\",\"1\"\n[phi] r1 = \"0\",\"1\" r2 = \"-1\",\"0)\"\n[tasks] run = validate\n", 5, "phi22"),
        ("[g] r1 = \"1\",\"0\"  r2 = \"0\",\"1\"\n[phi] r1 = \"0\",\"1\" r2 = \"-1\",\"0\"\n[tasks] run = transport\n", 6, "[transport]"),
        ("[g] r1 = \"1\",\"0\"  r2 = \"0\",\"1\"\n[phi] r1 = \"0\",\"1\" r2 = \"-1\",\"0\"\n[sample] box = [-1,1] x [-1,1]\n[tasks] run = validate\n", 6, "box has 2 intervals"),
        ("[g] r1 = \"1\",\"0\"  r2 = \"0\",\"1\"\n[phi] r1 = \"0\",\"1\" r2 = \"-1\",\"0\"\n[sample] points = 0\n[tasks] run = validate\n", 6, "at least 1"),
    ];
    for (rest, line, needle) in cases {
        let e = load_scenario(&with_header(rest)).unwrap_err();
        assert_eq!(e.line, line, "{rest}: {e}");
        assert!(e.to_string().contains(needle), "{rest}: {e}");
    }
}

#[test]
fn symmetric_flag_accepts_equivalent_text() {
    let text = with_header(
        r#"[g]      symmetric = true   r1 = "1","0*x1"   r2 = "0","1"
[phi]    r1 = "0","1"   r2 = "-1","0"
[tasks]  run = validate
"#,
    );
    assert!(load_scenario(&text).is_ok());
}

#[test]
fn transport_section_parses() {
    let text = with_header(
        r#"[g]      r1 = "1","0"   r2 = "0","1"
[phi]    r1 = "0","1"   r2 = "-1","0"
[tasks]  run = transport
[transport] curve = polyline   path = (0,0,0) (0.1,0,0) (0.1,0.1,0)   v0 = 1, 0   steps = 50
"#,
    );
    let sc = load_scenario(&text).unwrap();
    let r = run_scenario(&sc, false);
    assert_eq!(r.tasks[0].verdict, Verdict::Info);
    let text = with_header(
        r#"[g]      r1 = "1","0"   r2 = "0","1"
[phi]    r1 = "0","1"   r2 = "-1","0"
[tasks]  run = transport
[transport] curve = parametric  c1 = "0.2*cos(x1)"  c2 = "0.2*sin(x1)"  c3 = "0"  t0 = 0  t1 = 6.283185307179586
            v0 = 1, 0
"#,
    );
    let sc = load_scenario(&text).unwrap();
    let r = run_scenario(&sc, false);
    assert!(r.tasks[0].max_residual < 1e-8, "{:?}", r.tasks[0]);
}

#[test]
fn sample_points_match_golden_file() {
    let spec = SampleSpec::cube(3, -1.0, 1.0, 3, 42).unwrap();
    let pts = sample_points(&spec).unwrap();
    let text = serde_json::to_string_pretty(&pts).unwrap() + "\n";
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/sample_seed42_n3.json");
    if std::env::var_os("ACML_UPDATE_GOLDEN").is_some() {
        std::fs::write(path, &text).unwrap();
    }
    assert_eq!(text, std::fs::read_to_string(path).unwrap());
    assert_eq!(sample_points(&spec).unwrap(), pts);
    assert!(SampleSpec::cube(3, -1.0, 1.0, 0, 42).is_err());
}

#[test]
fn fixture_runs_match_expectations() {
    let run = |name: &str, opts: RunOptions| {
        let sc = resolve(&load_scenario(bundled(name).unwrap()).unwrap(), &opts).unwrap();
        run_scenario(&sc, false)
    };
    let quick = || RunOptions { points: Some(40), ..Default::default() };
    let b = run("fixtureB", quick());
    assert!(b.classification.as_ref().unwrap().sasakian.holds);
    assert_eq!(b.exit_code(), 0);

    let f = run("fixtureF", quick());
    let c = f.classification.as_ref().unwrap();
    assert!(!c.ack_horizontal.holds);
    assert_eq!(f.tasks.iter().find(|t| t.name == "theorem7").unwrap().verdict, Verdict::Pass);
    assert_eq!(f.exit_code(), 0);

    let lifted = run("fixtureB-lift", quick());
    let names: Vec<&str> = lifted.tasks.iter().map(|t| t.name.as_str()).collect();
    assert_eq!(names, ["validate", "classify", "lift", "lift-brackets", "lift-nijenhuis", "lift-theorems", "classify"]);
    assert_eq!(lifted.exit_code(), 0);
    // the second classify sees the five-dimensional lift
    assert!(lifted.tasks.last().unwrap().witness.as_ref().unwrap().len() == 5);
}

#[test]
fn broken_phi_fails_validation() {
    let text = with_header(
        r#"[g]      r1 = "1","0"   r2 = "0","1"
[phi]    r1 = "0","1"   r2 = "-1","0.3*x1"
[sample] points = 20
[tasks]  run = validate, classify
"#,
    );
    let r = run_scenario(&load_scenario(&text).unwrap(), false);
    assert_eq!(r.tasks[0].verdict, Verdict::Fail);
    assert!(r.tasks[0].notes[0].contains("phi^2"));
    assert_eq!(r.exit_code(), 1);
}

#[test]
fn evaluation_errors_downgrade_only_the_task() {
    let text = with_header(
        r#"[g]      r1 = "1","0"   r2 = "0","1"
[phi]    r1 = "0","1"   r2 = "-1","0"
[sample] points = 10
[tasks]  run = validate, transport
[transport] curve = square  corner = 0,0,0  plane = 1,2  side = 0.1  v0 = 1, 0  steps = 1
"#,
    );
    let r = run_scenario(&load_scenario(&text).unwrap(), false);
    assert_eq!(r.tasks[0].verdict, Verdict::Pass);
    assert_eq!(r.tasks[1].verdict, Verdict::Fail);
    assert!(r.tasks[1].notes[0].contains("steps"));
    let json: Value = serde_json::from_str(&to_json(&r)).unwrap();
    assert_eq!(json["tasks"][1]["max_residual"], Value::Null);
}

#[test]
fn report_has_stable_sorted_keys() {
    let sc = resolve(
        &load_scenario(bundled("fixtureB").unwrap()).unwrap(),
        &RunOptions { points: Some(10), ..Default::default() },
    )
    .unwrap();
    let a = to_json(&run_scenario(&sc, false));
    let b = to_json(&run_scenario(&sc, false));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["classification", "elapsed_ms", "fd_check", "scenario", "tasks", "version"]);
    let task: Vec<&String> = v["tasks"][0].as_object().unwrap().keys().collect();
    assert_eq!(task, ["max_residual", "name", "notes", "residuals", "tolerance", "verdict", "witness"]);
    assert_eq!(v["scenario"]["sample"]["points"], 10);
    assert_eq!(v["scenario"]["sample"]["seed"], 42);
    assert_eq!(v["elapsed_ms"], Value::Null);
}

fn acml() -> Command {
    Command::new(env!("CARGO_BIN_EXE_acml"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = acml().args(["run", "fixtureB", "--points", "10", "--quiet"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["classification"]["sasakian"], Value::Bool(true));

    let broken = dir.path().join("broken.scn");
    std::fs::write(
        &broken,
        with_header("[g] r1 = \"1\",\"0\" r2 = \"0\",\"1\"\n[phi] r1 = \"0\",\"1\" r2 = \"-1\",\"x1\"\n[tasks] run = validate\n"),
    )
    .unwrap();
    let out = dir.path().join("out.json");
    let st = acml()
        .args(["run", broken.to_str().unwrap(), "--points", "5", "--json", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(st.stdout.is_empty());
    assert!(String::from_utf8_lossy(&st.stderr).contains("validate"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["tasks"][0]["verdict"], "fail");

    let bad = dir.path().join("bad.scn");
    std::fs::write(&bad, "dim = 4\n").unwrap();
    let st = acml().args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("line 1"));

    let st = acml().args(["parse-expr", "x1*(x2", "--dim", "2"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    let st = acml().args(["parse-expr", "x1 * x2^2", "--dim", "2", "--at", "-1,2"]).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&st.stdout).lines().nth(1), Some("value -4"));

    let st = acml().args(["fixtures", "--write", dir.path().to_str().unwrap()]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&st.stdout).lines().count(), BUNDLED.len());
    assert!(dir.path().join("fixtureB-lift.scn").exists());
}
