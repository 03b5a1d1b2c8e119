use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn crossover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossover"))
        .args(args)
        .env_remove("CROSSOVER_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = crossover(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_csv(path: &Path) -> Vec<HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            headers
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

/// Writes a scenario file and simulates it into `dir/data`.
fn simulated(dir: &TempDir, scenario: &str) -> String {
    let sc = p(dir, "scenario.toml");
    fs::write(&sc, scenario).unwrap();
    let data = p(dir, "data");
    ok(&["simulate", "--scenario", &sc, "--out-dir", &data]);
    data
}

fn analyze(data: &str, out: &str, extra: &[&str]) {
    let mut args = vec![
        "analyze".to_string(),
        "--design".into(),
        format!("{data}/design.json"),
        "--scores".into(),
        format!("{data}/scores.csv"),
        "--exams".into(),
        format!("{data}/exams.csv"),
        "--out-dir".into(),
        out.into(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
}

#[test]
fn end_to_end_recovers_effect() {
    let dir = TempDir::new().unwrap();
    let data = simulated(&dir, "n_students = 300\ntau = 0.11\nseed = 2024\n");
    let out = p(&dir, "analysis");
    analyze(
        &data,
        &out,
        &[
            "--permutations",
            "500",
            "--roster",
            &format!("{data}/roster.csv"),
        ],
    );
    let rows = read_csv(&Path::new(&out).join("effect.csv"));
    let row = rows
        .iter()
        .find(|r| r["outcome"] == "short_term" && r["column"] == "overall")
        .unwrap();
    assert_eq!(row["n_used"], "300");
    let pp: f64 = row["p_permutation"].parse().unwrap();
    let pa: f64 = row["p_asymptotic"].parse().unwrap();
    assert!((pp - pa).abs() < 0.05);

    let perm = read_csv(&Path::new(&out).join("permutation_distribution.csv"));
    assert_eq!(perm.len(), 500);
    let table = read_csv(&Path::new(&out).join("effect_table.csv"));
    assert!(table.iter().any(|r| r["label"] == "gender_gap"));
    let dist = read_csv(&Path::new(&out).join("score_distribution.csv"));
    assert_eq!(dist.len(), 300 * 4);
}

#[test]
fn confidence_interval_covers_true_effect() {
    // A 95% interval covers in at least 17 of 20 runs with probability .98.
    let covered = (1..=20)
        .filter(|seed| {
            let dir = TempDir::new().unwrap();
            let data = simulated(
                &dir,
                &format!("n_students = 300\ntau = 0.11\nseed = {seed}\n"),
            );
            let out = p(&dir, "analysis");
            analyze(&data, &out, &["--permutations", "0"]);
            let rows = read_csv(&Path::new(&out).join("effect.csv"));
            let lo: f64 = rows[0]["ci_low"].parse().unwrap();
            let hi: f64 = rows[0]["ci_high"].parse().unwrap();
            lo <= 0.11 && 0.11 <= hi
        })
        .count();
    assert!(covered >= 17, "{covered}/20");
}

#[test]
fn zero_permutations_leave_p_permutation_absent() {
    let dir = TempDir::new().unwrap();
    let data = simulated(&dir, "n_students = 60\ntau = 0.2\nseed = 5\n");
    let out = p(&dir, "analysis");
    analyze(&data, &out, &["--permutations", "0"]);
    let rows = read_csv(&Path::new(&out).join("effect.csv"));
    assert!(rows.iter().all(|r| r["p_permutation"].is_empty()));
    assert!(rows.iter().all(|r| r["n_permutations"] == "0"));
    assert!(!Path::new(&out)
        .join("permutation_distribution.csv")
        .exists());
}

#[test]
fn design_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let data = simulated(&dir, "n_students = 148\nseed = 9\n");
    let roster = format!("{data}/roster.csv");
    let (a, b) = (p(&dir, "a"), p(&dir, "b"));
    ok(&[
        "design",
        "--roster",
        &roster,
        "--out-dir",
        &a,
        "--seed",
        "17",
    ]);
    ok(&[
        "design",
        "--roster",
        &roster,
        "--out-dir",
        &b,
        "--seed",
        "17",
    ]);
    for f in [
        "design.json",
        "assignment.csv",
        "balance.csv",
        "pairing_points.csv",
        "pairing_edges.csv",
    ] {
        let x = fs::read(Path::new(&a).join(f)).unwrap();
        let y = fs::read(Path::new(&b).join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let c = p(&dir, "c");
    ok(&[
        "design",
        "--roster",
        &roster,
        "--out-dir",
        &c,
        "--seed",
        "18",
    ]);
    assert_ne!(
        fs::read(Path::new(&a).join("design.json")).unwrap(),
        fs::read(Path::new(&c).join("design.json")).unwrap()
    );
}

#[test]
fn seed_comes_from_environment() {
    let dir = TempDir::new().unwrap();
    let data = simulated(&dir, "n_students = 40\nseed = 1\n");
    let roster = format!("{data}/roster.csv");
    let (a, b) = (p(&dir, "a"), p(&dir, "b"));
    ok(&[
        "design",
        "--roster",
        &roster,
        "--out-dir",
        &a,
        "--seed",
        "99",
    ]);
    let out = Command::new(env!("CARGO_BIN_EXE_crossover"))
        .args(["design", "--roster", &roster, "--out-dir", &b])
        .env("CROSSOVER_SEED", "99")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        fs::read(Path::new(&a).join("design.json")).unwrap(),
        fs::read(Path::new(&b).join("design.json")).unwrap()
    );
}

#[test]
fn manifest_digests_match_outputs() {
    let dir = TempDir::new().unwrap();
    let data = simulated(&dir, "n_students = 40\nseed = 3\n");
    let text = fs::read_to_string(Path::new(&data).join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed"], 3);
    let outputs = m["outputs"].as_object().unwrap();
    assert!(outputs.contains_key("scores.csv"));
    for (name, digest) in outputs {
        let got = crossover_cli::sha256_file(&Path::new(&data).join(name)).unwrap();
        assert_eq!(digest.as_str().unwrap(), got);
    }
}

#[test]
fn diagnose_writes_every_report() {
    let dir = TempDir::new().unwrap();
    let data = simulated(
        &dir,
        "n_students = 300\nterms = 2\ntau = 0.1\nnoncompliance_rate = 0.17\nfinal_sections = true\nexam_mu = [70, 70, 70, 70, 65, 65, 65, 65]\nexam_sigma = [15, 18, 22, 25, 20, 20, 20, 20]\nseed = 11\n",
    );
    let out = p(&dir, "diag");
    ok(&[
        "diagnose",
        "--design",
        &format!("{data}/design.json"),
        "--scores",
        &format!("{data}/scores.csv"),
        "--exams",
        &format!("{data}/exams.csv"),
        "--roster",
        &format!("{data}/roster.csv"),
        "--compliance",
        &format!("{data}/compliance.csv"),
        "--out-dir",
        &out,
    ]);
    let o = Path::new(&out);
    assert_eq!(read_csv(&o.join("quarter.csv")).len(), 2);
    let carry = read_csv(&o.join("carryover.csv"));
    assert_eq!(carry.len(), 2);
    assert_eq!(carry[0]["df1"], "3");
    assert_eq!(carry[1]["df1"], "1");
    assert_eq!(read_csv(&o.join("carryover_points.csv")).len(), 300);
    let het = read_csv(&o.join("heterogeneity.csv"));
    assert!(het.iter().any(|r| r["test"] == "full_model"));
    assert_eq!(read_csv(&o.join("heterogeneity_loess.csv")).len(), 300);
    let comp = read_csv(&o.join("compliance_sensitivity.csv"));
    assert_eq!(comp.len(), 5);
    assert!(comp.iter().all(|r| !r["long_term_d"].is_empty()));
}

#[test]
fn power_table_has_one_row_per_grid_point() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "power");
    ok(&[
        "power",
        "--tau",
        "0,0.3",
        "--n",
        "40,80",
        "--reps",
        "100",
        "--designs",
        "crossover,parallel",
        "--out-dir",
        &out,
        "--seed",
        "4",
    ]);
    let rows = read_csv(&Path::new(&out).join("power.csv"));
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| {
        let p: f64 = r["power"].parse().unwrap();
        (0.0..=1.0).contains(&p)
    }));
}

#[test]
fn failures_exit_nonzero_with_one_line() {
    let dir = TempDir::new().unwrap();
    let out = crossover(&[
        "design",
        "--roster",
        &p(&dir, "missing.csv"),
        "--out-dir",
        &p(&dir, "x"),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");

    let sc = p(&dir, "bad.toml");
    fs::write(&sc, "n_students = 10\nbogus = 1\n").unwrap();
    let out = crossover(&["simulate", "--scenario", &sc, "--out-dir", &p(&dir, "y")]);
    assert!(!out.status.success());
}
