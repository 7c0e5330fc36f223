use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracharm(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracharm"));
    cmd.args(args).env_remove("FRACHARM_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("FRACHARM_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn empty_estimate_list_passes_with_no_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), r#"{"grid": {"n": 1, "N": 64}, "estimates": []}"#);
    let o = fracharm(&["run", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names, vec!["samples.csv".to_string()]);
    let csv = fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn reports_are_schema_stable_and_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"grid": {"n": 1, "N": 512}, "seeds": [5], "estimates": [{"id": "crw-bmo"}], "profiles": {"s": [1.0]}}"#,
    );
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = fracharm(&["run", &cfg, "--out", out.to_str().unwrap(), "--t-levels", "40"], None);
        assert!(matches!(code(&o), 0 | 1), "{}", stderr(&o));
        outputs.push(out);
    }
    for name in ["crw-bmo-seed5.json", "samples.csv", "profile-decay-s1.txt", "profile-boundary-s1.txt"] {
        let a = fs::read(outputs[0].join(name)).unwrap();
        let b = fs::read(outputs[1].join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(outputs[0].join("crw-bmo-seed5.json")).unwrap()).unwrap();
    for key in ["estimate_id", "grid", "t_truncation", "fitted_constant", "validation_max_ratio", "pass"] {
        assert!(report.get(key).is_some(), "report lacks {key}");
    }
    assert_eq!(report["estimate_id"], "crw-bmo");
    assert_eq!(report["grid"]["N"], 512);
    let csv = fs::read_to_string(outputs[0].join("samples.csv")).unwrap();
    // 20 samples plus 2 constant-φ rows
    assert_eq!(csv.lines().count(), 23);
    let profile = fs::read_to_string(outputs[0].join("profile-decay-s1.txt")).unwrap();
    let data: Vec<&str> = profile.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 40);
    assert!(data.iter().all(|l| l.split_whitespace().all(|v| v.parse::<f64>().is_ok())));
}

#[test]
fn inadmissible_parameter_exits_2_naming_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "{\n  \"grid\": {\"n\": 1, \"N\": 64},\n  \"estimates\": [\n    {\"id\": \"crw-lorentz\", \"params\": {\"p1\": 1}}\n  ]\n}\n",
    );
    let o = fracharm(&["run", &cfg, "--out", dir.path().join("out").to_str().unwrap()], None);
    assert_eq!(code(&o), 2);
    let msg = stderr(&o);
    assert!(msg.contains("config.json:4:"), "{msg}");
    assert!(msg.contains("p1 = 1 must lie in (1, ∞)"), "{msg}");
    assert!(!dir.path().join("out").exists(), "nothing is written before validation succeeds");
}

#[test]
fn unknown_key_and_missing_file_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"grid\": {\"n\": 1, \"N\": 64},\n  \"extra\": true\n}\n");
    let o = fracharm(&["run", &cfg], None);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("config.json:3:"), "{}", stderr(&o));
    let o = fracharm(&["run", dir.path().join("absent.json").to_str().unwrap()], None);
    assert_eq!(code(&o), 2);
}

#[test]
fn failing_validation_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"grid": {"n": 1, "N": 512}, "estimates": [{"id": "crw-bmo"}], "tolerances": {"stability_tol": 1e-6}}"#,
    );
    let o = fracharm(&["run", &cfg, "--out", dir.path().join("out").to_str().unwrap()], None);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("dilation stability"));
}

#[test]
fn ops_check_passes_by_default_and_on_a_tiny_grid() {
    let o = fracharm(&["ops-check"], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = fracharm(&["ops-check", "--grid-N", "8"], None);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(table.contains("n=1 N=8"), "{table}");
    assert!(table.lines().filter(|l| l.starts_with("multiplier")).all(|l| l.contains("5.00e-1")), "{table}");
}

#[test]
fn symbol_cache_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracharm(&["symbol-cache", "1"], Some(dir.path()));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let path = String::from_utf8_lossy(&o.stdout).trim().to_string();
    assert!(Path::new(&path).exists());

    // ops-check reads the cached classical table
    let o = fracharm(&["ops-check"], Some(dir.path()));
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[5] = "0.1 not-a-number 0 0 0";
    fs::write(&path, lines.join("\n")).unwrap();
    let o = fracharm(&["ops-check"], Some(dir.path()));
    assert_eq!(code(&o), 3);
    let name = Path::new(&path).file_name().unwrap().to_str().unwrap();
    assert!(stderr(&o).contains(name), "{}", stderr(&o));

    let o = fracharm(&["symbol-cache", "2.5"], Some(dir.path()));
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let o = fracharm(&["symbol-cache", "1"], None);
    assert_eq!(code(&o), 2);
}
