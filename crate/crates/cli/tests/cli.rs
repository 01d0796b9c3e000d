use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use uavcov::simulator::{replication_seeds, run_campaign};
use uavcov::{Campaign, FadingConfig};
use uavcov_cli::analyze::ANALYZE_COLUMNS;
use uavcov_cli::simulate::{summarize, SIMULATION_ONLY};
use uavcov_cli::Scenario;

fn uavcov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavcov"))
        .args(args)
        .env("UAVCOV_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_scenario(dir: &Path, name: &str, s: &Scenario) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, s.to_json()).unwrap();
    path
}

fn small_sim(mut s: Scenario) -> Scenario {
    s.sim.n_snapshots = 8_000;
    s.sim.warmup_steps = 500;
    s.psi_grid_db = vec![-10.0, 0.0, 10.0];
    s
}

#[test]
fn analyze_writes_seven_column_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cov.csv");
    let o = uavcov(&["analyze", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# uavcov-analyze/1 "), "{comment}");
    assert_eq!(lines.next().unwrap(), ANALYZE_COLUMNS.join(","));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), Scenario::default().psi_grid_db.len());
    let mut previous = f64::INFINITY;
    for row in &rows {
        assert_eq!(row.len(), 7);
        assert_eq!(row[6], "ok");
        let p: f64 = row[2].parse().unwrap();
        assert!(p < previous && (0.0..=1.0).contains(&p));
        previous = p;
    }
    assert!(!text.contains('\r'));
}

#[test]
fn analyze_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cov.json");
    let o = uavcov(&[
        "analyze",
        "--psi-db",
        "-10,0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["format"], "uavcov-analyze/1");
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["rows"][1]["psi_linear"], 1.0);
}

#[test]
fn no_interferers_gives_full_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario::default();
    s.network.interferers = 0;
    s.fading = FadingConfig::new(3, 2);
    let path = write_scenario(dir.path(), "m0.json", &s);
    let o = uavcov(&["analyze", "--scenario", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let column: Vec<&str> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(column.len(), s.psi_grid_db.len());
    assert!(column.iter().all(|c| *c == "1"), "{column:?}");
}

#[test]
fn tall_cylinder_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario::default();
    s.network.height = 45.0;
    let path = write_scenario(dir.path(), "tall.json", &s);
    let o = uavcov(&["analyze", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("height < radius"), "{}", stderr(&o));
}

#[test]
fn malformed_scenarios_exit_2_with_field_names() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"network": {}}"#, "radius_m"),
        (
            &Scenario::default()
                .to_json()
                .replace("\"m0\": 1", "\"m0\": 0"),
            "fading.m0",
        ),
        (
            &Scenario::default().to_json().replace("\"mi\"", "\"m_i\""),
            "m_i",
        ),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&path, text).unwrap();
        let o = uavcov(&["analyze", "--scenario", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {i}");
        assert!(stderr(&o).contains(needle), "case {i}: {}", stderr(&o));
    }
    let o = uavcov(&[
        "analyze",
        "--scenario",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = uavcov(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_grid_is_rejected_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario::default();
    s.psi_grid_db.clear();
    // a huge campaign would take minutes if validation came after simulation
    s.sim.n_snapshots = u64::MAX / 2;
    let path = write_scenario(dir.path(), "empty.json", &s);
    for cmd in ["validate", "simulate", "analyze"] {
        let o = uavcov(&[
            cmd,
            "--scenario",
            path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(stderr(&o).contains("psi_grid_db"), "{cmd}: {}", stderr(&o));
    }
}

#[test]
fn validate_default_scenario_passes() {
    let o = uavcov(&["validate"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}{}", stderr(&o));
    assert!(stdout.lines().count() >= 8);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");
}

#[test]
fn injected_fault_fails_closed_form_check() {
    let o = uavcov(&["validate", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let failed: Vec<&str> = stdout.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failed.len(), 1, "{stdout}");
    assert!(failed[0].starts_with("FAIL closed_form_vs_quadrature"));
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "s.json", &small_sim(Scenario::default()));
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = uavcov(&[
            "simulate",
            "--scenario",
            path.to_str().unwrap(),
            "--seed",
            "77",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let files: Vec<Vec<u8>> = [
            "summary.json",
            "coverage.csv",
            "distance_histogram.csv",
            "altitude_histogram.csv",
        ]
        .iter()
        .map(|f| std::fs::read(out.join(f)).unwrap())
        .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let summary: serde_json::Value = serde_json::from_slice(&outputs[0][0]).unwrap();
    assert_eq!(summary["seed"], 77);
    assert_eq!(summary["counts"]["snapshots"], 8_000);
    let rows = summary["coverage"].as_array().unwrap();
    for row in rows {
        let sim = row["p_cov_sim"].as_f64().unwrap();
        let exact = row["p_cov_analytical"].as_f64().unwrap();
        assert!((sim - exact).abs() < 0.05, "{row}");
    }
    let csv = String::from_utf8(outputs[0][2].clone()).unwrap();
    assert_eq!(csv.lines().nth(1), Some("lower_m,upper_m,static,moving"));
}

#[test]
fn replicated_simulation_equals_sequential_merge() {
    let dir = tempfile::tempdir().unwrap();
    let s = small_sim(Scenario::default());
    let path = write_scenario(dir.path(), "s.json", &s);
    let out = dir.path().join("rep");
    let o = uavcov(&[
        "simulate",
        "--scenario",
        path.to_str().unwrap(),
        "--replications",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let mut s8 = s.clone();
    s8.sim.replications = 8;
    let seeds = replication_seeds(s8.sim.seed, 8);
    let psi = s8.psi_linear();
    let c = Campaign {
        network: &s8.network,
        fading: &s8.fading,
        mobility: &s8.mobility,
        psi: &psi,
        sim: s8.sim,
    };
    let mut merged = run_campaign(&c, seeds[0], 1_000).unwrap();
    for &seed in &seeds[1..] {
        merged
            .merge(&run_campaign(&c, seed, 1_000).unwrap())
            .unwrap();
    }
    let mut expected =
        serde_json::to_string_pretty(&summarize(&s8, &seeds, &merged).unwrap()).unwrap();
    expected.push('\n');
    assert_eq!(
        std::fs::read_to_string(out.join("summary.json")).unwrap(),
        expected
    );
}

#[test]
fn altitude_dependent_fading_is_simulation_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small_sim(Scenario::default());
    s.fading = FadingConfig::altitude_thirds(1, s.network.height);
    let path = write_scenario(dir.path(), "alt.json", &s);
    let out = dir.path().join("alt");
    let o = uavcov(&[
        "simulate",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    for row in summary["coverage"].as_array().unwrap() {
        assert_eq!(row["p_cov_analytical"], SIMULATION_ONLY);
    }
    let csv = std::fs::read_to_string(out.join("coverage.csv")).unwrap();
    assert!(
        csv.lines().skip(2).all(|l| l.ends_with(SIMULATION_ONLY)),
        "{csv}"
    );

    let o = uavcov(&["analyze", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("simulation-only"));
}

#[test]
fn sweep_over_interferers() {
    let o = uavcov(&[
        "sweep", "--param", "M", "--values", "1,2,5", "--psi-db", "-10,0,10",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# uavcov-sweep/1 "));
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    let at = |m: &str, psi: &str| -> f64 {
        rows.iter().find(|r| r[1] == m && r[2] == psi).unwrap()[4]
            .parse()
            .unwrap()
    };
    assert!(at("1", "0") > at("2", "0") && at("2", "0") > at("5", "0"));

    let o = uavcov(&["sweep", "--param", "m0", "--values", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = uavcov(&["sweep", "--param", "p_s", "--values", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scenario_round_trip_is_identity() {
    let mut alt = Scenario {
        fading: FadingConfig::altitude_thirds(2, 30.0),
        psi_grid_db: vec![-20.0, 0.1, 3.3333333333333335],
        ..Scenario::default()
    };
    alt.mobility.p_s_override = Some(0.1);
    for s in [Scenario::default(), alt] {
        let once = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(once, s);
        assert_eq!(once.to_json(), s.to_json());
    }
    for file in ["default.json", "altitude_dependent.json"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../scenarios")
            .join(file);
        let parsed = Scenario::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
        parsed.validate().unwrap();
        assert_eq!(Scenario::from_json(&parsed.to_json()).unwrap(), parsed);
    }
}

#[test]
fn zero_workers_is_an_input_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_uavcov"))
        .args(["analyze"])
        .env("UAVCOV_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
