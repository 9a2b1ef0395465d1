use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const LINE: &str = r#"{"n":1,"terms":[{"exp":[1],"re":1,"im":0},{"exp":[0],"re":-1,"im":0}]}"#;
const HYPERBOLA: &str =
    r#"{"n":2,"terms":[{"exp":[1,1],"re":1,"im":0},{"exp":[0,0],"re":-1,"im":0}]}"#;
const FAMILY: &str = r#"{"f0": {"n":1,"terms":[{"exp":[1],"re":1,"im":0},{"exp":[0],"re":-1,"im":0}]},
 "fj": {"template": {"n":1,"terms":[{"exp":[1],"re":1},{"exp":[0],"re":-1,"inv_j_re":-1}]}},
 "J": [1, 2, 4, 8, 16, 32, 64]}"#;
const ANNULUS: &str =
    r#"{"shape":"annulus","center":[1,0],"r_min":0.5,"r_max":2,"radial":5,"angular":12}"#;

fn grauert(dir: &Path, args: &[&str]) -> Output {
    grauert_env(dir, args, &[])
}

fn grauert_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_grauert"));
    cmd.current_dir(dir)
        .args(args)
        .env_remove("GRAUERT_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn grauert")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn workspace() -> TempDir {
    let dir = TempDir::new().unwrap();
    for (name, body) in [
        ("line.json", LINE),
        ("hyperbola.json", HYPERBOLA),
        ("family.json", FAMILY),
        ("annulus.json", ANNULUS),
    ] {
        fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

fn json(out: &Output) -> Value {
    assert_eq!(
        code(out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|s| s.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn u_table_columns_and_range() {
    let dir = workspace();
    let out = grauert(
        dir.path(),
        &[
            "u-table", "--t-min", "0.01", "--t-max", "100", "--points", "5",
        ],
    );
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(header, ["t", "u", "up", "upp"]);
    assert_eq!(rows.len(), 5);
    assert!((rows[0][0] - 0.01).abs() < 1e-15 && (rows[4][0] - 100.0).abs() < 1e-12);
    let mid = &rows[2];
    assert!((mid[0] - 1.0).abs() < 1e-15);
    assert!(mid[1] > 0.0 && mid[2] < 0.0);
}

#[test]
fn kg_grid_round_trips_exact_doubles() {
    let dir = workspace();
    let path = dir.path().join("kg.csv");
    let out = grauert(
        dir.path(),
        &[
            "--out",
            path.to_str().unwrap(),
            "kg-grid",
            "--rmin",
            "0.001",
            "--rmax",
            "1000",
            "--radii",
            "7",
            "--angles",
            "3",
        ],
    );
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let bytes = fs::read(&path).unwrap();
    assert!(!bytes.contains(&b'\r'));
    let (header, rows) = csv_rows(&bytes);
    assert_eq!(header, ["re", "im", "Kg"]);
    assert_eq!(rows.len(), 21);
    for row in rows {
        let z = grauert_core::holo::Complex64::new(row[0], row[1]);
        assert_eq!(row[2], grauert_core::grauert::kg(z).unwrap());
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = workspace();
    let args = [
        "converge",
        "liminf",
        "--family",
        "family.json",
        "--grid",
        "annulus.json",
        "--seed",
        "7",
    ];
    let a = grauert(dir.path(), &args);
    let b = grauert_env(dir.path(), &args, &[("GRAUERT_THREADS", "1")]);
    assert_eq!(code(&a), code(&b));
    assert_eq!(a.stdout, b.stdout);
    let k1 = grauert(dir.path(), &["kg-grid", "--radii", "9"]);
    let k2 = grauert(dir.path(), &["kg-grid", "--radii", "9"]);
    assert_eq!(k1.stdout, k2.stdout);
}

#[test]
fn metric_eval_reports_hermitian_matrix() {
    let dir = workspace();
    let v = json(&grauert(
        dir.path(),
        &[
            "metric",
            "eval",
            "--f",
            "hyperbola.json",
            "--z",
            "2,1i",
            "--V",
            "1,0",
        ],
    ));
    let g = v["G"].as_array().unwrap();
    assert_eq!(g.len(), 2);
    let entry = |i: usize, j: usize| (g[i][j][0].as_f64().unwrap(), g[i][j][1].as_f64().unwrap());
    assert_eq!(entry(0, 1).0, entry(1, 0).0);
    assert_eq!(entry(0, 1).1, -entry(1, 0).1);
    assert!(v["phi"].as_f64().unwrap() > 0.0);
    assert!(v["detG"].as_f64().unwrap() >= 1.0);
}

#[test]
fn curvature_commands() {
    let dir = workspace();
    let k = json(&grauert(
        dir.path(),
        &[
            "curvature",
            "hsc",
            "--f",
            "hyperbola.json",
            "--p",
            "2,1",
            "--V",
            "2,-1",
        ],
    ));
    assert!(k["K"].as_f64().unwrap() <= 1e-8);
    let kp = json(&grauert(
        dir.path(),
        &[
            "curvature",
            "kplus",
            "--f",
            "hyperbola.json",
            "--p",
            "2,1",
            "--samples",
            "64",
        ],
    ));
    assert_eq!(kp["samples"], 64);
    assert!(kp["K_plus"].as_f64().unwrap() >= k["K"].as_f64().unwrap() - 1e-12);
    assert_eq!(kp["direction"].as_array().unwrap().len(), 2);

    let out = grauert(
        dir.path(),
        &[
            "curvature",
            "grid",
            "--f",
            "line.json",
            "--grid",
            "annulus.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(header, ["re", "im", "K"]);
    assert_eq!(rows.len(), 60);
    assert!(rows.iter().all(|r| r[2] < 0.0 && r[2] > -4.0));
}

#[test]
fn leaf_commands() {
    let dir = workspace();
    let field = format!(
        r#"{{"components":[{x},{y}]}}"#,
        x = r#"{"n":2,"terms":[{"exp":[1,0],"re":1}]}"#,
        y = r#"{"n":2,"terms":[{"exp":[0,1],"re":-1}]}"#
    );
    fs::write(dir.path().join("field.json"), field).unwrap();
    let k = json(&grauert(
        dir.path(),
        &[
            "leaf",
            "curvature",
            "--f",
            "hyperbola.json",
            "--X",
            "field.json",
            "--p",
            "2,1",
        ],
    ));
    assert!(k["K"].as_f64().unwrap() <= 1e-8);

    let out = grauert(
        dir.path(),
        &[
            "leaf",
            "approach",
            "--f",
            "line.json",
            "--base",
            "1",
            "--steps",
            "6",
        ],
    );
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(header, ["m", "re", "im", "K", "gap"]);
    assert_eq!(rows.len(), 6);
    assert!(rows.windows(2).all(|w| w[1][4] <= w[0][4]));
    assert!(rows[5][4] < 1e-3);
}

#[test]
fn convergence_tables() {
    let dir = workspace();
    for kind in ["metric", "curvature"] {
        let out = grauert(
            dir.path(),
            &[
                "converge",
                kind,
                "--family",
                "family.json",
                "--grid",
                "annulus.json",
            ],
        );
        assert_eq!(
            code(&out),
            0,
            "{kind}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let (header, rows) = csv_rows(&out.stdout);
        assert_eq!(header, ["j", "gap"]);
        assert_eq!(rows.len(), 7);
        assert!(rows[6][1] < rows[0][1], "{kind} gaps do not shrink");
    }
}

#[test]
fn liminf_report_and_failure_exit() {
    let dir = workspace();
    let ok = json(&grauert(
        dir.path(),
        &[
            "converge",
            "liminf",
            "--family",
            "family.json",
            "--p",
            "-1",
            "--V",
            "1",
        ],
    ));
    for key in ["K0", "Kj_min", "margin", "seed", "p", "V", "tail", "pass"] {
        assert!(ok.get(key).is_some(), "missing {key}");
    }
    assert_eq!(ok["pass"], true);
    let margin = ok["Kj_min"].as_f64().unwrap() - ok["K0"].as_f64().unwrap();
    assert!((ok["margin"].as_f64().unwrap() - margin).abs() < 1e-15);

    let bad = grauert(
        dir.path(),
        &[
            "converge",
            "liminf",
            "--family",
            "family.json",
            "--p",
            "3",
            "--V",
            "1",
            "--tail",
            "1",
        ],
    );
    assert_eq!(code(&bad), 1);
    let report: Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(report["pass"], false);
    assert!(report["margin"].as_f64().unwrap() < 0.0);
}

#[test]
fn verify_suites_pass() {
    let dir = workspace();
    for suite in ["lemma52", "thm51"] {
        let v = json(&grauert(dir.path(), &["verify", "--suite", suite]));
        assert_eq!(v["suite"], suite);
        assert_eq!(v["pass"], true);
        let checks = v["checks"].as_array().unwrap();
        assert!(!checks.is_empty());
        assert!(
            checks.iter().all(|c| c["pass"] == true),
            "{suite}: {checks:?}"
        );
    }
}

#[test]
fn malformed_input_leaves_no_artifact() {
    let dir = workspace();
    fs::write(dir.path().join("bad.json"), r#"{"n":2,"terms":["#).unwrap();
    let target = dir.path().join("never.json");
    let out = grauert(
        dir.path(),
        &[
            "--out",
            target.to_str().unwrap(),
            "curvature",
            "hsc",
            "--f",
            "bad.json",
            "--p",
            "1,1",
            "--V",
            "1,0",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));
    assert!(!target.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 5);
}

#[test]
fn numeric_domain_errors_exit_two() {
    let dir = workspace();
    let out = grauert(
        dir.path(),
        &[
            "curvature",
            "hsc",
            "--f",
            "hyperbola.json",
            "--p",
            "1,1",
            "--V",
            "1,0",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    let dim = grauert(
        dir.path(),
        &[
            "curvature",
            "hsc",
            "--f",
            "hyperbola.json",
            "--p",
            "1",
            "--V",
            "1",
        ],
    );
    assert_eq!(code(&dim), 2);
}

#[test]
fn usage_errors_exit_two() {
    let dir = workspace();
    assert_eq!(code(&grauert(dir.path(), &["kg-grid", "--nonsense"])), 2);
    assert_eq!(
        code(&grauert(dir.path(), &["verify", "--suite", "nope"])),
        2
    );
    assert_eq!(code(&grauert(dir.path(), &["--help"])), 0);
}

#[test]
fn invalid_thread_count_is_rejected() {
    let dir = workspace();
    for bad in ["0", "-3", "many"] {
        let out = grauert_env(
            dir.path(),
            &["u-table", "--points", "2"],
            &[("GRAUERT_THREADS", bad)],
        );
        assert_eq!(code(&out), 2, "GRAUERT_THREADS={bad}");
    }
    let out = grauert_env(
        dir.path(),
        &["u-table", "--points", "2"],
        &[("GRAUERT_THREADS", "2")],
    );
    assert_eq!(code(&out), 0);
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_config_matches_direct_invocation() {
    let dir = workspace();
    let nested = dir.path().join("runs");
    fs::create_dir(&nested).unwrap();
    let cfg = config(
        &nested,
        "cfg.json",
        r#"{"command":"converge-metric","options":{"family":"../family.json","grid":"../annulus.json","out":"gaps.csv"}}"#,
    );
    let out = grauert(dir.path(), &["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let direct = grauert(
        dir.path(),
        &[
            "converge",
            "metric",
            "--family",
            "family.json",
            "--grid",
            "annulus.json",
        ],
    );
    assert_eq!(fs::read(nested.join("gaps.csv")).unwrap(), direct.stdout);

    let pts = config(
        dir.path(),
        "hsc.json",
        r#"{"command":"curvature-hsc","options":{"f":"hyperbola.json","p":["2","1"],"V":["2","-1"]}}"#,
    );
    let a = grauert(dir.path(), &["run", "--config", pts.to_str().unwrap()]);
    let b = grauert(
        dir.path(),
        &[
            "curvature",
            "hsc",
            "--f",
            "hyperbola.json",
            "--p",
            "2,1",
            "--V",
            "2,-1",
        ],
    );
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn run_config_rejects_unknown_keys() {
    let dir = workspace();
    let top = config(
        dir.path(),
        "top.json",
        r#"{"command":"u-table","options":{},"extra":1}"#,
    );
    assert_eq!(
        code(&grauert(
            dir.path(),
            &["run", "--config", top.to_str().unwrap()]
        )),
        2
    );
    let opt = config(
        dir.path(),
        "opt.json",
        r#"{"command":"u-table","options":{"colour":"red"}}"#,
    );
    assert_eq!(
        code(&grauert(
            dir.path(),
            &["run", "--config", opt.to_str().unwrap()]
        )),
        2
    );
    let cmd = config(
        dir.path(),
        "cmd.json",
        r#"{"command":"launch","options":{}}"#,
    );
    assert_eq!(
        code(&grauert(
            dir.path(),
            &["run", "--config", cmd.to_str().unwrap()]
        )),
        2
    );
}
