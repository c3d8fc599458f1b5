use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cflimits");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        r#"{"kind": "elliptic-cf", "cf": {"alpha": "1", "beta": "2"}, "unknown": 1}"#,
        r#"{"kind": "elliptic-cf", "cf": {"alpha": "sqrt(-2)", "beta": "2"}}"#,
        r#"{"kind": "elliptic-cf", "cf": {"alpha": "2pi*1/3", "beta": "2pi*4/3"}}"#,
        r#"{"kind": "matrix-product", "m": [[1, 0]]}"#,
        "not json",
    ] {
        let out = run(&["limit-set", "--config", &config(dir.path(), text)]);
        assert_eq!(out.status.code(), Some(2), "{text}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(run(&["limit-set"]).status.code(), Some(2));
    assert_eq!(run(&["figure", "fig7"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn budget_exhaustion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        r#"{"kind": "elliptic-cf", "cf": {"alpha": "sqrt(11)", "beta": "sqrt(13)",
            "p": {"geometric": {"ratio": 0.9}}, "q": {"geometric": {"ratio": 0.9}}}, "max_n": 30}"#,
    );
    let out = run(&["limit-set", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn io_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["limit-set", "--config", missing.to_str().unwrap()]).status.code(), Some(4));
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    assert_eq!(run(&["figure", "fig5", "--out", out.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn verification_failure_exits_5_after_printing_the_table() {
    let out = run(&["verify", "rbm", "--max-n", "3"]);
    assert_eq!(out.status.code(), Some(5));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("FAIL"));
    assert!(table.contains("2 checks, 0 passed, 2 failed"));
}

#[test]
fn figure_writes_csv_svg_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figure", "fig6", "--count", "300", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("fig6.csv")).unwrap();
    assert!(csv.starts_with("n,re,im\n1,"));
    assert_eq!(csv.lines().count(), 301);
    let svg = std::fs::read_to_string(dir.path().join("fig6.svg")).unwrap();
    assert!(svg.contains(r#"version="1.1""#) && svg.trim_end().ends_with("</svg>"));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["count"], 300);
    assert_eq!(summary["peak_contains_highest_concentration"], true);
    let on_disk: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig6.json")).unwrap()).unwrap();
    assert_eq!(on_disk, summary);
}

#[test]
fn custom_figure_from_elliptic_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        r#"{"kind": "elliptic-cf", "cf": {"alpha": "2pi*1/5", "beta": "2pi*3/5",
            "p": {"polynomial": {"q": 0.5, "coefficients": [1, "1/2"]}}, "q": "zero"}}"#,
    );
    let out = run(&["figure", "--config", &cfg, "--count", "400", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["figure"], "custom");
    assert_eq!(summary["lambda_order"], 5);
    assert_eq!(summary["clusters"]["nonempty"], 5);
    assert!(summary["clusters"]["max_centroid_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn product_commands_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        r#"{"kind": "matrix-product", "m": [[0, -1], [1, 0]],
            "perturbation": {"matrix": [[0.3, 0.1], [-0.2, 0.4]], "ratio": 0.5}, "side": "right", "order": 4}"#,
    );
    let out = run(&["matrix-product", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["residue_limits"].as_array().unwrap().len(), 4);
    assert!(v["finite_order_consistency"].as_f64().unwrap() < 1e-10);

    let cfg = config(
        dir.path(),
        r#"{"kind": "recurrence", "limits": [1, 0, 0], "initial": [1, 2, 3],
            "perturbation": {"coefficients": [0.5, 0, 0], "ratio": 0.5}, "perron_n": 2000}"#,
    );
    let out = run(&["recurrence", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["roots"].as_array().unwrap().len(), 3);
    assert!(v["fit_residual"].as_f64().unwrap() < 1e-8);

    let cfg = config(
        dir.path(),
        r#"{"kind": "rs-cf", "r": 1, "s": 1, "theta": [[0, 1], [-1, 1]],
            "perturbation": {"matrix": [[0, 0], [0.5, 0.25]], "ratio": 0.5}, "count": 200, "order": 6}"#,
    );
    let out = run(&["rs-cf", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["predictor_error"]["max"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["residue_limits"].as_array().unwrap().len(), 6);

    let wrong = run(&["rs-cf", "--config", &config(dir.path(), r#"{"kind": "q-identity"}"#)]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn shipped_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let kind: serde_json::Value = serde_json::from_str(&text).unwrap();
        let command = match kind["kind"].as_str().unwrap() {
            "elliptic-cf" => "limit-set",
            "q-identity" => "verify",
            "figure" => "figure",
            other => other,
        };
        let dir = tempfile::tempdir().unwrap();
        let out = run(&[command, "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        seen += 1;
    }
    assert!(seen >= 5);
}
