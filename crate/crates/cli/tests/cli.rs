//! Integration tests of the command-line interface contracts: exit status,
//! artifact layout, reproducibility, and config validation messages.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schrograph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn lat1_cfg(dir: &Path, out: &Path, extra: &str) -> PathBuf {
    write_cfg(
        dir,
        "cfg.json",
        &format!(
            "{{\"family\":{{\"kind\":\"lattice\",\"dim\":1}},\"metric\":{{\"kind\":\"scaled\"}},\
             \"potential\":{{\"kind\":\"constant\",\"c0\":1.0}},\"p\":2.0,\
             \"radii\":[4.0,6.0,8.0,10.0,12.0],\"out_dir\":\"{}\",\"seed\":7{extra}}}",
            out.display()
        ),
    )
}

#[test]
fn default_suite_passes_on_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = lat1_cfg(dir.path(), &out, "");
    let o = run_cli(&["verify", "-c", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("check lemma51: PASS"));
    assert!(stdout.contains("check prop44: PASS"));
    // a JSON + CSV pair per check
    for name in [
        "region",
        "potential",
        "identity",
        "convexity",
        "compat46",
        "lemma51",
        "lemma52",
        "lemma61",
        "prop43",
        "prop44",
    ] {
        assert!(
            out.join(format!("{name}.json")).exists(),
            "{name}.json missing"
        );
        assert!(
            out.join(format!("{name}.csv")).exists(),
            "{name}.csv missing"
        );
    }
}

#[test]
fn check_subset_emits_exactly_one_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = lat1_cfg(dir.path(), &out, ",\"checks\":[\"lemma61\"]");
    let o = run_cli(&["verify", "-c", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".json"))
        .collect();
    assert_eq!(reports.len(), 1, "{reports:?}");
    assert!(out.join("lemma61.json").exists());
}

#[test]
fn identical_config_and_seed_give_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    let cfg = lat1_cfg(
        dir.path(),
        &out1,
        ",\"checks\":[\"identity\",\"convexity\",\"lemma51\"]",
    );
    assert!(run_cli(&["verify", "-c", cfg.to_str().unwrap(), "-q"])
        .status
        .success());
    assert!(run_cli(&[
        "verify",
        "-c",
        cfg.to_str().unwrap(),
        "-q",
        "-o",
        out2.to_str().unwrap()
    ])
    .status
    .success());
    for name in ["identity.csv", "convexity.csv", "lemma51.csv"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn constraint_violations_name_the_inequality() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // beta at the threshold: beta^2 exp(2 s beta) < 2 c0 p fails
    let cfg = lat1_cfg(dir.path(), &out, ",\"beta\":2.5");
    let o = run_cli(&["verify", "-c", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta^2 exp(2 s beta) < 2 c0 p"));

    // alpha above its admissible range
    let cfg = lat1_cfg(dir.path(), &out, ",\"alpha\":3.0");
    let o = run_cli(&["verify", "-c", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha^2 exp(2 s alpha) < 2 c0 p"));

    // cutoff radius below the floor of the ramp constraint
    let cfg = write_cfg(
        dir.path(),
        "smallr.json",
        &format!(
            "{{\"family\":{{\"kind\":\"lattice\",\"dim\":1}},\"metric\":{{\"kind\":\"scaled\"}},\
             \"potential\":{{\"kind\":\"constant\",\"c0\":1.0}},\"radii\":[0.9],\
             \"out_dir\":\"{}\",\"seed\":7}}",
            out.display()
        ),
    );
    let o = run_cli(&["verify", "-c", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("R > max(2s/(1-2 delta), 1)"));
}

#[test]
fn linear_route_alpha_is_validated_for_small_p() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let base = |alpha: f64| {
        format!(
            "{{\"family\":{{\"kind\":\"lattice\",\"dim\":1}},\"metric\":{{\"kind\":\"scaled\"}},\
             \"potential\":{{\"kind\":\"constant\",\"c0\":1.0}},\"p\":1.5,\"alpha\":{alpha},\
             \"checks\":[\"lemma61\",\"prop44\"],\"radii\":[10.0],\"out_dir\":\"{}\",\"seed\":2}}",
            out.display()
        )
    };
    // rate above the admissible threshold: rejected with the inequality named
    let cfg = write_cfg(dir.path(), "lin_bad.json", &base(2.0));
    let o = run_cli(&["verify", "-c", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("C0 alpha exp(s alpha) < c0 p"));

    // admissible rate: both linear-route checks run and pass
    let cfg = write_cfg(dir.path(), "lin_ok.json", &base(0.2));
    let o = run_cli(&["verify", "-c", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("check lemma61: PASS"));
    assert!(stdout.contains("check prop44: PASS"));
}

#[test]
fn decay_matches_closed_form_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_cfg(
        dir.path(),
        "decay.json",
        &format!(
            "{{\"family\":{{\"kind\":\"lattice\",\"dim\":1}},\"metric\":{{\"kind\":\"combinatorial\"}},\
             \"potential\":{{\"kind\":\"constant\",\"c0\":1.0}},\"radii\":[3,4,5,6,7,8,9,10,11,12],\
             \"out_dir\":\"{}\",\"seed\":0}}",
            out.display()
        ),
    );
    let o = run_cli(&["decay", "-c", cfg.to_str().unwrap(), "-q"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("decay.csv")).unwrap();
    let row5: Vec<&str> = csv
        .lines()
        .find(|l| l.starts_with("5,"))
        .expect("R = 5 row")
        .split(',')
        .collect();
    let u0: f64 = row5[1].parse().unwrap();
    assert!(
        (u0 - 2.0 / 123.0).abs() <= 1e-10 * (2.0 / 123.0 + 1.0),
        "{u0}"
    );
    let product: f64 = row5[2].parse().unwrap();
    assert!((product - 1.0).abs() <= 1e-8);
}

#[test]
fn sharpness_p1_uses_linear_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_cfg(
        dir.path(),
        "sharp1.json",
        &format!(
            "{{\"family\":{{\"kind\":\"lattice\",\"dim\":1}},\"metric\":{{\"kind\":\"scaled\"}},\
             \"potential\":{{\"kind\":\"constant\",\"c0\":1.0}},\"p\":1.0,\"radii\":[],\
             \"out_dir\":\"{}\",\"seed\":0}}",
            out.display()
        ),
    );
    let o = run_cli(&["sharpness", "-c", cfg.to_str().unwrap(), "-q"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sharpness.json")).unwrap())
            .unwrap();
    assert_eq!(doc["threshold_kind"], serde_json::json!("alpha_star"));
    assert_eq!(doc["consistent"], serde_json::json!(true));
}

#[test]
fn sharpness_small_c0_stays_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_cfg(
        dir.path(),
        "sharp01.json",
        &format!(
            "{{\"family\":{{\"kind\":\"lattice\",\"dim\":1}},\"metric\":{{\"kind\":\"scaled\"}},\
             \"potential\":{{\"kind\":\"constant\",\"c0\":0.1}},\"p\":2.0,\"radii\":[],\
             \"out_dir\":\"{}\",\"seed\":0}}",
            out.display()
        ),
    );
    let o = run_cli(&["sharpness", "-c", cfg.to_str().unwrap(), "-q"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sharpness.json")).unwrap())
            .unwrap();
    // 2 sqrt(2) ln lambda(0.1) with lambda = (2.1 + sqrt(0.41))/2
    let lambda = (2.1 + 0.41f64.sqrt()) / 2.0;
    let oracle = 2.0 * 2f64.sqrt() * lambda.ln();
    let beta_hat = doc["beta_hat"].as_f64().unwrap();
    assert!(
        (beta_hat - oracle).abs() <= 0.02 * oracle,
        "{beta_hat} vs {oracle}"
    );
    assert_eq!(doc["consistent"], serde_json::json!(true));
}

#[test]
fn solve_with_boundary_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let boundary = write_cfg(dir.path(), "bdata.txt", "-4 2.0\n4 0.5\n");
    let cfg = write_cfg(
        dir.path(),
        "solvefile.json",
        &format!(
            "{{\"family\":{{\"kind\":\"lattice\",\"dim\":1}},\"metric\":{{\"kind\":\"combinatorial\"}},\
             \"potential\":{{\"kind\":\"constant\",\"c0\":1.0}},\"radii\":[4.5],\
             \"boundary\":{{\"kind\":\"file\",\"file\":\"{}\"}},\
             \"out_dir\":\"{}\",\"seed\":0}}",
            boundary.display(),
            out.display()
        ),
    );
    let o = run_cli(&["solve", "-c", cfg.to_str().unwrap(), "-q"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = schrograph::Graph::lattice(1).unwrap();
    let u = schrograph::GraphFunction::from_file(&out.join("solution.txt"), &g).unwrap();
    assert_eq!(u.eval(&schrograph::VertexId::from(-4)).unwrap(), 2.0);
    assert_eq!(u.eval(&schrograph::VertexId::from(4)).unwrap(), 0.5);
    // interior values sit strictly between the boundary extremes
    for n in -3i64..=3 {
        let v = u.eval(&schrograph::VertexId::from(n)).unwrap();
        assert!(v > 0.0 && v < 2.0, "{n}: {v}");
    }
}

#[test]
fn solve_writes_readable_solution_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = lat1_cfg(dir.path(), &out, ",\"radius\":8.0");
    let o = run_cli(&["solve", "-c", cfg.to_str().unwrap(), "-q"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = schrograph::Graph::lattice(1).unwrap();
    let u = schrograph::GraphFunction::from_file(&out.join("solution.txt"), &g).unwrap();
    // boundary rows carry the constant 1 and the center decays below it
    let u0 = u.eval(&schrograph::VertexId::from(0)).unwrap();
    assert!(u0 > 0.0 && u0 < 1.0);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("solve_report.json")).unwrap())
            .unwrap();
    assert_eq!(doc["verdict"], serde_json::json!("pass"));
}

#[test]
fn certify_emits_thresholds_for_intrinsic_metric() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = lat1_cfg(dir.path(), &out, "");
    let o = run_cli(&["certify", "-c", cfg.to_str().unwrap(), "-q"]);
    assert!(o.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("certify.json")).unwrap()).unwrap();
    assert_eq!(doc["certified"], serde_json::json!(true));
    let beta_star = doc["beta_star"].as_f64().unwrap();
    assert!((beta_star - 0.99).abs() <= 0.01, "{beta_star}");
    let alpha_star = doc["alpha_star"].as_f64().unwrap();
    assert!(alpha_star > 0.0 && alpha_star < beta_star);
    let s = doc["jump_size"].as_f64().unwrap();
    assert!((s - 1.0 / 2f64.sqrt()).abs() <= 1e-14);
}

#[test]
fn file_graph_runs_structural_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let edges = write_cfg(
        dir.path(),
        "g.txt",
        "# small weighted path with a branch\na b 1.0\nb c 2.0\nc d 0.5\nb e 0.25\n",
    );
    let measures = write_cfg(dir.path(), "m.txt", "a 0.5\nc 2.0\n");
    let cfg = write_cfg(
        dir.path(),
        "file.json",
        &format!(
            "{{\"family\":{{\"kind\":\"edge_list\",\"edges\":\"{}\",\"measures\":\"{}\"}},\
             \"metric\":{{\"kind\":\"edge_length\"}},\
             \"potential\":{{\"kind\":\"constant\",\"c0\":0.5}},\
             \"checks\":[\"region\",\"potential\",\"identity\",\"convexity\"],\
             \"radii\":[3.0],\"out_dir\":\"{}\",\"seed\":3}}",
            edges.display(),
            measures.display(),
            out.display()
        ),
    );
    let o = run_cli(&["verify", "-c", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("check region: PASS"));
    assert!(stdout.contains("check identity: PASS"));
}

#[test]
fn unknown_check_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = lat1_cfg(dir.path(), &out, ",\"checks\":[\"lemma99\"]");
    let o = run_cli(&["verify", "-c", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown check"));
}
