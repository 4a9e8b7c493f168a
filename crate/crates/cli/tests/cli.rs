use std::path::Path;
use std::process::{Command, Output};

fn ilc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ilc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_reports_verdicts() {
    let o = ilc(&["analyze", "example1", "--case", "a"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("trackable, realizable"), "{text}");
    assert!(text.contains("0.100000"));

    let o = ilc(&["analyze", "example1", "--case", "c"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("untrackable"));

    let o = ilc(&["analyze", "example2", "--case", "d"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("trackable, not realizable"));
}

#[test]
fn analyze_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = ilc(&["analyze", "example2", "--json", path.to_str().unwrap(), "--parallel"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[0]["convergence"]["side"], "output_side");
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn run_writes_deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = ilc(&["run", "example1", "--case", "b", "--out", out.to_str().unwrap(), "--iters", "12", "--seed", "4"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let fa = read_dir_sorted(&a);
    assert_eq!(fa, read_dir_sorted(&b));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["metrics.csv", "signals_k0.csv", "signals_k1.csv", "signals_k10.csv", "signals_k12.csv", "signals_k6.csv", "summary.json"]);

    let metrics = String::from_utf8(fa[0].1.clone()).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines[0], "k,sup_error,lambda_delta_u,impulse,impulse_flag");
    assert_eq!(lines.len(), 14);
    assert!(!metrics.contains('\r'));
    let signals = String::from_utf8(fa[1].1.clone()).unwrap();
    assert!(signals.starts_with("t,u1,u2,y1,y2,y3,e1,e2,e3,yd1,yd2,yd3\n"));
    assert_eq!(signals.lines().count(), 2002);
    // 12 significant digits
    let field = signals.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    let mantissa = field.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert_eq!(mantissa.len(), 12, "{field}");
}

#[test]
fn zero_iterations_only_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let o = ilc(&["run", "example1", "--case", "a", "--out", dir.path().to_str().unwrap(), "--iters", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 2);
}

#[test]
fn divergence_exit_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = ilc(&["run", "dtype_divergent", "--case", "nominal", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(metrics.lines().count() > 10);
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn verify_passes_on_examples() {
    for (scenario, case) in [("example1", "c"), ("example2", "d")] {
        let o = ilc(&["verify", scenario, "--case", case]);
        let text = stdout(&o);
        assert_eq!(o.status.code(), Some(0), "{text}");
        assert!(text.contains("PASS") && !text.contains("FAIL"), "{text}");
    }
}

#[test]
fn invalid_inputs_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"name\": \"x\",\n  \"plant\": {\"form\": \"rational\", \"g1\": [[{\"num\": [1, \"two\"], \"den\": [1, 1]}]]}\n}\n").unwrap();
    let o = ilc(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let o = ilc(&["analyze", "no-such-scenario"]);
    assert_eq!(o.status.code(), Some(3));
    let o = ilc(&["analyze", "example1", "--case", "z"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn condition_violation_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let o = ilc(&["examples", "export", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("example1.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    // a biproper entry breaks strict properness of G1
    v["plant"]["g1"][0][0] = serde_json::json!({"num": [1.0, 1.0], "den": [2.0, 1.0]});
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = ilc(&["analyze", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("C1"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exported_examples_load_back() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ilc(&["examples", "export", dir.path().to_str().unwrap()]).status.code(), Some(0));
    for name in ["example1", "example2", "dtype", "dtype_divergent"] {
        let path = dir.path().join(format!("{name}.json"));
        let o = ilc(&["analyze", path.to_str().unwrap()]);
        assert!(matches!(o.status.code(), Some(0) | Some(2)), "{name}");
    }
    let list = stdout(&ilc(&["examples", "list"]));
    assert_eq!(list.lines().count(), 4);
}
