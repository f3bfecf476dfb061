use std::path::Path;
use std::process::{Command, Output};

fn pme_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pme-lab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn report(dir: &Path, experiment: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(format!("{experiment}-report.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "a.toml", "experiment = \"comparison-test\"\nbogus = 1\n");
    assert_eq!(pme_lab(&["comparison-test", "--config", &unknown]).status.code(), Some(2));

    let ok = write_config(dir.path(), "b.toml", "experiment = \"comparison-test\"\n");
    assert_eq!(pme_lab(&["interior-breaking", "--config", &ok]).status.code(), Some(2));
    assert_eq!(pme_lab(&["comparison-test", "--config", &ok, "--m", "0.5"]).status.code(), Some(2));
    assert_eq!(pme_lab(&["comparison-test", "--config", "/nonexistent/c.toml"]).status.code(), Some(2));
}

#[test]
fn broken_beta_fails_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "b.toml", "experiment = \"validate-barenblatt\"\n[grid]\nnodes = 65\nlevels = 2\n[barenblatt]\nbeta = 0.3\n");
    let o = pme_lab(&["validate-barenblatt", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("criterion 1 [beta identity]: FAIL"), "{stdout}");
    assert_eq!(report(&out, "validate-barenblatt")["verdicts"][0]["status"], "FAIL");
}

#[test]
fn passing_run_writes_report_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "c.toml", "experiment = \"comparison-test\"\nseed = 3\n[comparison]\npairs = 5\n");
    let o = pme_lab(&["comparison-test", "--config", &cfg, "--out", out.to_str().unwrap(), "--m", "1.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out, "comparison-test");
    assert_eq!(r["config"]["params"]["m"], 1.5);
    assert_eq!(r["verdicts"][0]["criterion"], 9);
    let csv = std::fs::read_to_string(out.join("comparison_pairs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn identical_configs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "d.toml", "experiment = \"comparison-test\"\nseed = 9\n[comparison]\npairs = 4\n");
    let runs: Vec<serde_json::Value> = (0..2)
        .map(|_| {
            assert_eq!(pme_lab(&["comparison-test", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
            let mut r = report(&out, "comparison-test");
            r.as_object_mut().unwrap().remove("timings");
            r
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}
