use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cluster-lab")).args(args).current_dir(dir).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn gen(dir: &Path, n: &str) {
    ok(dir, &["gen", "--preset", "gauss5", "--n", n, "--seed", "1", "--out", "d.csv"]);
}

#[test]
fn gen_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["gen", "--preset", "mixed4", "--n", "1000", "--out", "d.csv"]);
    assert!(stdout.contains("1000 rows"));
    let text = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert_eq!(text.lines().count(), 1001);
}

#[test]
fn gen_rejects_fewer_points_than_classes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["gen", "--preset", "gauss5", "--n", "3", "--out", "d.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_from_custom_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"preset": "custom", "n": 30, "seed": 4, "classes": [
        {"coords": [{"dist": "normal", "mean": 0.0, "sd": 1.0}, {"dist": "poisson", "lambda": 3.0}]},
        {"coords": [{"dist": "normal", "mean": 9.0, "sd": 1.0}, {"dist": "poisson", "lambda": 20.0}]}]}"#;
    std::fs::write(dir.path().join("spec.json"), spec).unwrap();
    ok(dir.path(), &["gen", "--spec", "spec.json", "--out", "d.csv"]);
    let text = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert_eq!(text.lines().count(), 31);
}

#[test]
fn cluster_reports_missing_flag() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "50");
    let out = run(dir.path(), &["cluster", "d.csv", "--algo", "dbscan", "--eps", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--min-pts"));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["cluster", "nope.csv", "--algo", "kmeans", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cluster_outputs_one_label_per_point() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "120");
    for args in [
        &["--algo", "kmeans", "--k", "5"][..],
        &["--algo", "dbscan", "--eps", "0.6", "--min-pts", "4"],
        &["--algo", "gmm", "--k", "5"],
        &["--algo", "hierarchical", "--k", "5", "--linkage", "ward"],
    ] {
        let mut full = vec!["cluster", "d.csv"];
        full.extend_from_slice(args);
        let v: serde_json::Value = serde_json::from_str(&ok(dir.path(), &full)).unwrap();
        assert_eq!(v["assignment"].as_array().unwrap().len(), 120);
        assert!(v["accuracy"].as_f64().unwrap() > 0.5);
    }
}

#[test]
fn curves_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "100");
    let wcss = ok(dir.path(), &["curves", "d.csv", "--kind", "wcss", "--k-max", "10", "--restarts", "2"]);
    assert_eq!(wcss.lines().count(), 11);

    let bic = ok(dir.path(), &["curves", "d.csv", "--kind", "bic", "--k-max", "3"]);
    assert_eq!(bic.lines().count(), 1 + 3 * 3);

    let kdist = ok(dir.path(), &["curves", "d.csv", "--kind", "kdist", "--k", "4"]);
    let values: Vec<f64> = kdist.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 100);
    assert!(values.windows(2).all(|w| w[0] >= w[1]));

    let dendro = ok(dir.path(), &["curves", "d.csv", "--kind", "dendrogram"]);
    assert_eq!(dendro.lines().count(), 100);
}

#[test]
fn bench_prints_full_suite() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["bench", "--preset", "3", "--n", "200", "--repeats", "1", "--out", "b.csv"]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2 + 10);
    assert!(stdout.contains("eps=3.0;min_pts=5"));
    let csv = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("algorithm,config,runtime_ms,accuracy"));
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn bench_rejects_unknown_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["bench", "--preset", "4"]);
    assert_eq!(out.status.code(), Some(2));
}
