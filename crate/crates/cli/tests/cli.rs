use std::path::Path;
use std::process::{Command, Output};

fn klab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klab"))
        .args(args)
        .env_remove("KLAB_CACHE_DIR")
        .output()
        .expect("run klab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn exit_codes() {
    assert_eq!(klab(&["voronoi-check"]).status.code(), Some(0));
    assert_eq!(
        klab(&["voronoi-check", "--bogus", "1"]).status.code(),
        Some(1)
    );
    assert_eq!(klab(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        klab(&["voronoi-check", "--q", "100"]).status.code(),
        Some(1)
    );
    assert_eq!(
        klab(&["voronoi-check", "--q", "abc"]).status.code(),
        Some(1)
    );
    assert_eq!(
        klab(&["bilinear-scan", "--mode", "diagonal"]).status.code(),
        Some(1)
    );
    // an unattainable tolerance is a threshold violation
    let o = klab(&["voronoi-check", "--tolerance", "1e-30"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual"));
}

#[test]
fn unknown_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "q = 101\nbogus = 3\n").unwrap();
    let o = klab(&["voronoi-check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# moduli\nq-max = 30\nq-min = 7\nweil-q-max = 0\n").unwrap();
    let path = cfg.to_str().unwrap();
    let from_file = stdout(&klab(&["verify-lemma", "--config", path]));
    assert!(from_file.contains("# config q-max=30\n"));
    assert!(from_file.contains("# config q-min=7\n"));
    let rows: Vec<&str> = from_file
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert!(rows
        .iter()
        .all(|r| r.split(',').next().unwrap().parse::<u64>().unwrap() <= 30));
    let flagged = stdout(&klab(&["verify-lemma", "--config", path, "--q-max", "11"]));
    assert!(flagged.contains("# config q-max=11\n"));
    assert!(flagged.contains("# config q-min=7\n"));
    assert!(!flagged.contains("config=") && !flagged.contains("out="));
}

#[test]
fn csv_layout() {
    let out = stdout(&klab(&["voronoi-check", "--threads", "1"]));
    assert!(!out.contains('\r'));
    assert!(out.starts_with("# klab "));
    let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(header[0], "q");
    for row in &lines[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), header.len());
        for c in cells.iter().filter(|c| c.contains('e')) {
            let mantissa = c.trim_start_matches('-').split('e').next().unwrap();
            let digits = mantissa.chars().filter(char::is_ascii_digit).count();
            assert_eq!(digits, 17, "{c}");
            let v: f64 = c.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), *c);
        }
    }
}

#[test]
fn json_layout() {
    assert_eq!(
        klab(&["moment-scan", "--q-range", "53:60", "--fit"])
            .status
            .code(),
        Some(1)
    );
    let out = stdout(&klab(&[
        "moment-scan",
        "--q-range",
        "50:2000",
        "--fit",
        "--format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let obj = v.as_object().unwrap();
    let keys: Vec<&String> = obj.keys().collect();
    assert_eq!(keys, ["config", "results", "summary"]);
    assert_eq!(v["config"]["command"], "moment-scan");
    assert_eq!(v["config"]["q-range"], "50:2000");
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 288);
    assert!(results.iter().all(|r| r["moment"].as_f64().unwrap() > 0.0));
    assert!(v["summary"]["c4"].as_f64().unwrap() > 0.0);
}

#[test]
fn output_file_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let plot = dir.path().join("plot.csv");
    let o = klab(&[
        "primes-scan",
        "--q",
        "1009",
        "--out",
        out.to_str().unwrap(),
        "--emit-plot-data",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.contains("# config q=1009"));
    let plot = std::fs::read_to_string(&plot).unwrap();
    let mut lines = plot.lines();
    assert_eq!(lines.next(), Some("x,y,series"));
    assert!(lines.count() > 0);
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let p = dir.join(name);
    let mut all = args.to_vec();
    all.extend(["--threads", "1", "--out", p.to_str().unwrap()]);
    assert!(klab(&all).status.code().unwrap() != 1);
    std::fs::read(p).unwrap()
}

#[test]
fn seeded_runs_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_to(dir.path(), "a", &["typeii-scan", "--seed", "7"]);
    let b = run_to(dir.path(), "b", &["typeii-scan", "--seed", "7"]);
    let c = run_to(dir.path(), "c", &["typeii-scan", "--seed", "8"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}
