use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nodal_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal-lab")).args(args).output().expect("binary runs")
}

fn run_with(dir: &Path, command: &str, toml: &str, out: &Path) -> Output {
    let cfg = dir.join(format!("{command}-{}.toml", out.file_name().unwrap().to_string_lossy()));
    fs::write(&cfg, toml).unwrap();
    nodal_lab(&[command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn record(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("record.json")).unwrap()).unwrap()
}

fn column(csv_text: &str, name: &str) -> Vec<f64> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let idx = reader.headers().unwrap().iter().position(|h| h == name).expect("column present");
    reader.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn density_product_is_half_pi() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("density");
    let o = run_with(tmp.path(), "density", "[params]\nm = 1\nn = [1, 2, 4, 8]\n", &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let products = column(&fs::read_to_string(out.join("density.csv")).unwrap(), "product_radius_sqrtlambda");
    assert_eq!(products.len(), 4);
    for p in products {
        assert!((p - PI / 2.0).abs() <= 0.05 * PI / 2.0, "{p}");
    }
    assert!(fs::read_to_string(out.join("density.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn doubling_records_ratio_sixteen() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("doubling");
    let o = run_with(tmp.path(), "doubling", "[params]\nd = 2\nu = \"x1^2\"\n", &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let ratio = column(&fs::read_to_string(out.join("doubling.csv")).unwrap(), "ratio")[0];
    assert!((ratio - 16.0).abs() <= 1e-8 * 16.0);
    let rec = record(&out);
    assert_eq!(rec["pass"], true);
    assert_eq!(rec["command"], "doubling");
    assert!(rec["checks"][0]["detail"].as_str().unwrap().contains("16"));
    assert_eq!(rec["artifacts"], serde_json::json!(["doubling.csv"]));
}

#[test]
fn invalid_config_exits_two_and_names_every_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    let o = run_with(tmp.path(), "weight", "[params]\nm = 0\nr0 = -1.0\n", &out);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("m ≥ 1"), "{err}");
    assert!(err.contains("r0 > 0"), "{err}");
    assert!(!out.join("record.json").exists());

    let o = run_with(tmp.path(), "weight", "[params]\nbogus = 1\n", &out);
    assert_eq!(o.status.code(), Some(2));
    let o = run_with(tmp.path(), "weight", "command = \"gap\"\n", &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identical_configs_give_identical_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let toml = "seed = 11\n[params]\nn = [2, 3]\nrandom_cases = 5\n";
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run_with(tmp.path(), "gap", toml, &a).status.code(), Some(0));
    assert_eq!(run_with(tmp.path(), "gap", toml, &b).status.code(), Some(0));
    for f in ["sweep.csv", "ko.csv", "certificate_N3.json", "sweep.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(record(&a)["config_hash"], record(&b)["config_hash"]);

    // same directory, same config: allowed
    assert_eq!(run_with(tmp.path(), "gap", toml, &a).status.code(), Some(0));
    // same directory, another config: refused
    let o = run_with(tmp.path(), "gap", "seed = 12\n[params]\nn = [2]\nrandom_cases = 1\n", &a);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_changes_the_random_cases() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (seed, out) in [("1", &a), ("2", &b)] {
        let o = nodal_lab(&["gap", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_ne!(fs::read(a.join("ko.csv")).unwrap(), fs::read(b.join("ko.csv")).unwrap());
    assert_eq!(fs::read(a.join("sweep.csv")).unwrap(), fs::read(b.join("sweep.csv")).unwrap());
}

#[test]
fn config_wins_over_flags_with_a_warning() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    let from_file = tmp.path().join("from-file");
    let from_flag = tmp.path().join("from-flag");
    fs::write(&cfg, format!("out = {:?}\nseed = 4\nthreads = 2\n", from_file.to_str().unwrap())).unwrap();
    let o = nodal_lab(&[
        "doubling",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        from_flag.to_str().unwrap(),
        "--seed",
        "9",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("warning") && err.contains("--seed") && err.contains("--out"), "{err}");
    assert!(from_file.join("record.json").exists());
    assert!(!from_flag.exists());
    assert_eq!(record(&from_file)["config"]["seed"], 4);
}

#[test]
fn report_over_passing_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    for (cmd, toml) in [
        ("doubling", ""),
        ("theorem3", "[params]\nlambdas = [1e3, 1e4]\n"),
        ("schrodinger", "[params]\nks = [1, 2, 3]\n"),
    ] {
        let o = run_with(tmp.path(), cmd, toml, &runs.join(cmd));
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
    }
    let o = nodal_lab(&["report", runs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&fs::read_to_string(runs.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"], 3);
    let rows = summary["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["pass"] == true && r["anchor"].as_str().is_some_and(|a| !a.is_empty())));
    let mut commands: Vec<&str> = rows.iter().map(|r| r["command"].as_str().unwrap()).collect();
    commands.dedup();
    assert_eq!(commands, ["doubling", "schrodinger", "theorem3"]);
    let md = fs::read_to_string(runs.join("summary.md")).unwrap();
    assert!(md.contains("| PASS |") && !md.contains("FAIL"));
}

#[test]
fn report_on_empty_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nodal_lab(&["report", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
    let summary: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"], 0);
    assert_eq!(summary["rows"], serde_json::json!([]));
}

#[test]
fn failing_weight_run_is_reported_with_property_and_radius() {
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    let out = runs.join("weight");
    // α too small for the strongly negative shift: the annulus bound cannot be normalized
    let o = run_with(tmp.path(), "weight", "[params]\nd = 2\nm = 1\ngammas = [-100.0]\nalpha = 1.0\n", &out);
    assert_eq!(o.status.code(), Some(1));
    let rec = record(&out);
    assert_eq!(rec["pass"], false);
    let lemma: Value = serde_json::from_str(&fs::read_to_string(out.join("lemma.json")).unwrap()).unwrap();
    let v = &lemma["violations"][0];
    assert_eq!(v["property"], "ii");
    let radius = v["radius"].as_f64().unwrap();

    let o = nodal_lab(&["report", runs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let md = fs::read_to_string(runs.join("summary.md")).unwrap();
    let row = md.lines().find(|l| l.contains("| FAIL |") && l.contains("(ii)")).expect("failing row for (ii)");
    assert!(row.contains(&format!("radius {radius}")), "{row}");
}

#[test]
fn corrupt_and_missing_records_are_listed() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = tempfile::tempdir().unwrap();
    let good = tmp.path().join("good");
    assert_eq!(run_with(configs.path(), "doubling", "", &good).status.code(), Some(0));
    fs::create_dir(tmp.path().join("torn")).unwrap();
    fs::write(tmp.path().join("torn/record.json"), "{\"format\": 1").unwrap();
    fs::create_dir(tmp.path().join("orphan")).unwrap();
    fs::write(tmp.path().join("orphan/density.csv"), "N\n1\n").unwrap();
    let o = nodal_lab(&["report", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("torn/record.json") && err.contains("corrupt"), "{err}");
    assert!(err.contains("orphan") && err.contains("no record.json"), "{err}");
}

#[test]
fn runtime_errors_are_recorded_as_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("d");
    // Δ²|x|⁴ is a positive constant, so |x|⁴ is no subsolution
    let o = run_with(tmp.path(), "doubling", "[params]\nd = 3\nm = 2\nu = \"|x|^4\"\n", &out);
    assert_eq!(o.status.code(), Some(1));
    let rec = record(&out);
    assert_eq!(rec["pass"], false);
    assert!(rec["error"].as_str().unwrap().contains("positive constant"));
    assert_eq!(rec["artifacts"], serde_json::json!([]));
    assert!(!out.join("doubling.csv").exists());
}
