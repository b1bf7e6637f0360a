use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"{
    "n": 2,
    "series": "alternating_sqrt",
    "targets": {"1 2": 1, "2 1": -1},
    "budget": {"depth": 3, "slab_budget": 2000},
    "tolerance": 0.05,
    "fubini": {"boxes": [1, 2, [2, 2]], "max_quadrature_peaks": 10}
}"#;

fn run(config: &str, dir: &Path, command: &str, extra: &[&str]) -> Output {
    let path = dir.join("run.json");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_multisum"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir)
        .args(["--command", command])
        .args(extra)
        .output()
        .unwrap()
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(CONFIG, dir.path(), "build", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let header = csv::Reader::from_path(dir.path().join("assignment.csv")).unwrap().headers().unwrap().clone();
    assert_eq!(header.iter().collect::<Vec<_>>(), ["j1", "j2", "m", "a_m", "slab_d", "slab_mu"]);
    assert_eq!(rows(&dir.path().join("assignment.csv")).len(), 3 * 2 * 2000);

    let out = run(CONFIG, dir.path(), "verify", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let checks = rows(&dir.path().join("verify.csv"));
    assert_eq!(checks.len(), 2 * 3);
    assert!(checks.iter().all(|r| &r[5] == "true"));
    let sigmas: Vec<&str> = checks.iter().map(|r| r.get(0).unwrap()).collect();
    assert!(sigmas.contains(&"(1)(2)") && sigmas.contains(&"(1 2)"), "{sigmas:?}");
}

#[test]
fn tight_tolerance_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(CONFIG, dir.path(), "verify", &["--tolerance", "1e-12"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(dir.path().join("verify.csv").exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("verification failed"));
}

#[test]
fn missing_permutation_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&CONFIG.replace(r#", "2 1": -1"#, ""), dir.path(), "build", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 1"));
}

#[test]
fn unparseable_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&CONFIG.replace("\"depth\": 3", "\"depth\": \"three\""), dir.path(), "build", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget.depth"));
}

#[test]
fn a_short_series_starves() {
    let dir = tempfile::tempdir().unwrap();
    let config = CONFIG.replace("\"alternating_sqrt\"", r#"{"terms": [1, -0.5, 0.25, -0.125]}"#);
    let out = run(&config, dir.path(), "build", &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn split_covers_the_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(CONFIG, dir.path(), "split", &[]);
    assert_eq!(out.status.code(), Some(0));
    let split = rows(&dir.path().join("split.csv"));
    assert_eq!(split.len(), 10_000);
    for (i, r) in split.iter().enumerate() {
        assert_eq!(r[0].parse::<u64>().unwrap(), i as u64 + 1);
        assert!(r[1].parse::<usize>().unwrap() >= 1);
    }
}

#[test]
fn fubini_reports_both_evaluations() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(CONFIG, dir.path(), "fubini", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&dir.path().join("fubini.csv"));
    assert_eq!(table.len(), 2 * 3);
    for r in &table {
        let coefficients: f64 = r[3].parse().unwrap();
        match &r[2] {
            "" => assert!(r[1].contains("inf")),
            q => assert!((q.parse::<f64>().unwrap() - coefficients).abs() < 1e-3),
        }
    }
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for command in ["build", "verify"] {
        assert_eq!(run(CONFIG, a.path(), command, &[]).status.code(), Some(0));
        assert_eq!(run(CONFIG, b.path(), command, &["--seed", "7"]).status.code(), Some(0));
    }
    for file in ["assignment.csv", "verify.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert!(x == y, "{file} differs between runs");
    }
}
