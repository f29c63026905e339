use std::path::{Path, PathBuf};
use std::process::Command;

fn problem(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../problems")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut argv = vec!["slcpop"];
    argv.extend_from_slice(args);
    let code = slcpop_cli::run(argv, &mut out).unwrap();
    (code, String::from_utf8(out).unwrap())
}

/// Masks timings, the only nondeterministic output.
fn untimed(s: &str) -> String {
    s.lines()
        .map(|l| {
            if let Some(at) = l.find("\"time_s\"") {
                format!("{}\"time_s\": \"*\"\n", &l[..at])
            } else if l.starts_with("Time ") {
                "Time *\n".to_string()
            } else {
                format!("{l}\n")
            }
        })
        .collect()
}

fn check_golden(name: &str, got: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, got).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(want, got, "{name} differs");
}

#[test]
fn solve_cubic_report() {
    let (code, out) = run(&["solve", &problem("box_cubic.json"), "--gap", "1e-4", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["value"].as_f64().unwrap() + 0.3849).abs() < 1e-3);
    assert_eq!(v["hyp"], 0);
    check_golden("solve_box_cubic.json", &untimed(&out));
}

#[test]
fn solve_table_golden() {
    let (_, out) = run(&["solve", &problem("constrained_cubic.json")]);
    check_golden("solve_constrained_cubic.txt", &untimed(&out));
}

#[test]
fn decompose_goldens() {
    let (_, out) = run(&["decompose", &problem("box_cubic.json")]);
    check_golden("decompose_box_cubic.txt", &out);
    let (_, out) = run(&["decompose", &problem("constrained_cubic.json"), "--format", "json"]);
    check_golden("decompose_constrained_cubic.json", &out);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verification"]["all_dominant"], true);
}

#[test]
fn first_type_decomposition() {
    let (code, out) = run(&["decompose", &problem("constrained_cubic.json"), "--kind", "first-type", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["kind"], "first-type");
    assert!(v["verification"]["max_coefficient_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn relax_reports_root_bound() {
    let (_, out) = run(&["relax", &problem("box_cubic.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let lb = v["lower_bound"].as_f64().unwrap();
    assert!(lb <= -0.3849 && lb >= -0.38491, "{lb}");
    let (_, out) = run(&["relax", &problem("box_cubic.json"), "--variant", "gershgorin", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["lower_bound"].as_f64().unwrap() <= lb + 1e-6);
}

#[test]
fn export_sdpa_golden() {
    let (code, out) = run(&["export", &problem("box_cubic.json"), "--format", "sdpa"]);
    assert_eq!(code, 0);
    check_golden("box_cubic.dat-s", &out);
    let (_, again) = run(&["export", &problem("box_cubic.json"), "--format", "sdpa"]);
    assert_eq!(out, again);
}

#[test]
fn export_backend_flag() {
    let (_, a) = run(&["solve", &problem("box_cubic.json"), "--backend", "export-cbf"]);
    let (_, b) = run(&["export", &problem("box_cubic.json"), "--format", "cbf"]);
    assert_eq!(a, b);
    assert!(a.starts_with("# CBF v3") || a.contains("VER"));
}

#[test]
fn log_sum_exp_routing() {
    let (code, out) = run(&["export", &problem("log_sum_exp.json"), "--format", "cbf"]);
    assert_eq!(code, 0);
    assert!(out.contains("EXP"));
    let mut sink = Vec::new();
    let e = slcpop_cli::run(["slcpop", "export", &problem("log_sum_exp.json"), "--format", "sdpa"], &mut sink)
        .unwrap_err();
    assert!(e.to_string().contains("--format cbf"), "{e}");
    let e = slcpop_cli::run(["slcpop", "solve", &problem("log_sum_exp.json")], &mut sink).unwrap_err();
    assert!(e.to_string().contains("--format cbf"), "{e}");
}

#[test]
fn verify_passes() {
    let (code, out) = run(&["verify", &problem("constrained_cubic.json"), "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_exit_status_tracks_the_tolerance() {
    let text = r#"{"n": 2, "objective": [
        {"exps": [3, 0], "coef": -4.0}, {"exps": [2, 0], "coef": 6.0}, {"exps": [1, 0], "coef": -2.2},
        {"exps": [0, 3], "coef": -4.0}, {"exps": [0, 2], "coef": 6.0}, {"exps": [0, 1], "coef": -2.2}]}"#;
    let dir = std::env::temp_dir().join(format!("slcpop-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("p.json");
    std::fs::write(&path, text).unwrap();
    for extra in [&[][..], &["--max-nodes", "1", "--starts", "0"][..]] {
        let mut args = vec!["verify", path.to_str().unwrap(), "--format", "json"];
        args.extend_from_slice(extra);
        let (code, out) = run(&args);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let rel = v["relative_error"].as_f64().unwrap();
        assert_eq!(v["pass"], rel <= slcpop_cli::VERIFY_TOL);
        assert_eq!(code, if rel <= slcpop_cli::VERIFY_TOL { 0 } else { 1 });
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bench_rows() {
    let (code, out) = run(&["bench", "--n", "3", "--degree", "3", "--seeds", "10", "--seed", "1"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "seed,n,degree,lb,construction_lb,ub,time_s");
    assert_eq!(lines.len(), 11);
    for l in &lines[1..] {
        let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[3] >= f[4] - 1e-6, "{l}");
        assert!(f[3] <= f[5] + 1e-6, "{l}");
    }
}

#[test]
fn reports_are_deterministic() {
    let args = ["solve", &problem("constrained_cubic.json"), "--format", "json"];
    assert_eq!(untimed(&run(&args).1), untimed(&run(&args).1));
}

#[test]
fn flag_validation() {
    let mut sink = Vec::new();
    assert!(slcpop_cli::run(["slcpop", "solve", &problem("box_cubic.json"), "--gap", "2"], &mut sink).is_err());
    assert!(slcpop_cli::run(["slcpop", "solve", &problem("box_cubic.json"), "--max-nodes", "0"], &mut sink).is_err());
    assert!(slcpop_cli::run(["slcpop", "frobnicate"], &mut sink).is_err());
}

#[test]
fn node_budget_exits_zero_with_status() {
    let (code, out) = run(&["solve", &problem("constrained_cubic.json"), "--max-nodes", "1", "--gap", "1e-12", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(["optimal", "node-limit"].contains(&v["status"].as_str().unwrap()));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_slcpop");
    let ok = Command::new(bin).args(["relax", &problem("box_cubic.json")]).output().unwrap();
    assert!(ok.status.success());
    let bad = Command::new(bin).args(["solve", "/nonexistent.json"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));
}
