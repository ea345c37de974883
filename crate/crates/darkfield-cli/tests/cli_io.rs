//! File-level contracts of the CLI: golden CSV schema, byte determinism,
//! manifest presence, config handling, and process exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

use darkfield_cli::config::{OutputFormat, Scenario, ScenarioConfig};
use darkfield_cli::{parse_sweep_manifest, run_scenario, run_sweep};

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("darkfield-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn fig2_quick(out: &Path) -> ScenarioConfig {
    let mut config = ScenarioConfig::new(Scenario::Fig2);
    config.overrides.set("t_end", "2").unwrap();
    config.output_path = Some(out.to_path_buf());
    config
}

#[test]
fn trajectory_csv_schema_is_stable() {
    let dir = temp_dir("schema");
    let out = dir.join("fig3.csv");
    let mut config = ScenarioConfig::new(Scenario::Fig3);
    config.overrides.set("t_end", "2").unwrap();
    config.output_path = Some(out.clone());
    run_scenario(&config).unwrap();
    let text = String::from_utf8(read(&out)).unwrap();
    let header = text.lines().next().unwrap();
    // The column set and order are part of the external contract.
    assert_eq!(
        header,
        "gamma_t,nbar_norm,pe_norm,nbar_total,pe,g1_intensity,n_mode_0,n_mode_1,ncoll_0,ncoll_1"
    );
    assert!(!text.contains('\r'), "line endings must be bare newlines");
    assert!(!text.lines().any(|l| l.ends_with(',')), "no trailing delimiter");

    // The manifest sits next to the data file.
    let manifest = dir.join("fig3.csv.manifest.json");
    let manifest_value: serde_json::Value =
        serde_json::from_slice(&read(&manifest)).unwrap();
    assert_eq!(manifest_value["status"], "ok");
    assert_eq!(manifest_value["scenario"], "fig3");
    assert!(manifest_value["invariants"]["max_trace_deviation"].as_f64().unwrap() <= 1e-7);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn figs1_table_lists_exact_rationals() {
    let dir = temp_dir("figs1");
    let out = dir.join("ratios.csv");
    let mut config = ScenarioConfig::new(Scenario::FigS1);
    config.output_path = Some(out.clone());
    run_scenario(&config).unwrap();
    let text = String::from_utf8(read(&out)).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,m,initial_excitations,final_excitations,survival_ratio,brute_force_ratio,closed_equals_brute"
    );
    let mut rows = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let m: usize = cells[1].parse().unwrap();
        assert_eq!(cells[4], format!("{}/{}", m - 1, m));
        assert_eq!(cells[4], cells[5]);
        assert_eq!(cells[6], "1");
        rows += 1;
    }
    assert_eq!(rows, 7 * 10); // m in 2..=8, n in 1..=10
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = temp_dir("repeat");
    let first = dir.join("a.csv");
    let second = dir.join("b.csv");
    run_scenario(&fig2_quick(&first)).unwrap();
    run_scenario(&fig2_quick(&second)).unwrap();
    assert_eq!(read(&first), read(&second));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sweep_output_is_independent_of_worker_count_and_matches_single_runs() {
    let dir = temp_dir("sweep");
    let manifest_text = |prefix: &str| {
        format!(
            "fig2 modes=1 t_end=2 out={dir}/{prefix}_m1.csv\n\
             fig2 modes=2 t_end=2 out={dir}/{prefix}_m2.csv\n\
             figs1 out={dir}/{prefix}_ratios.csv\n\
             planck temperature=5770 out={dir}/{prefix}_planck.json format=json\n",
            dir = dir.display()
        )
    };
    let serial = parse_sweep_manifest(&manifest_text("serial")).unwrap();
    let parallel = parse_sweep_manifest(&manifest_text("parallel")).unwrap();
    assert_eq!(run_sweep(&serial, 1).unwrap().exit_code(), 0);
    assert_eq!(run_sweep(&parallel, 4).unwrap().exit_code(), 0);

    for name in ["m1.csv", "m2.csv", "ratios.csv", "planck.json"] {
        let a = read(&dir.join(format!("serial_{name}")));
        let b = read(&dir.join(format!("parallel_{name}")));
        assert_eq!(a, b, "worker count changed the bytes of {name}");
    }

    // And each file equals what an individual run would produce.
    let lone = dir.join("lone_m2.csv");
    let mut config = fig2_quick(&lone);
    config.overrides.set("modes", "2").unwrap();
    run_scenario(&config).unwrap();
    assert_eq!(read(&lone), read(&dir.join("serial_m2.csv")));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn json_trajectory_has_sorted_keys_and_same_data() {
    let dir = temp_dir("json");
    let out = dir.join("fig2.json");
    let mut config = fig2_quick(&out);
    config.format = Some(OutputFormat::Json);
    run_scenario(&config).unwrap();
    let value: serde_json::Value = serde_json::from_slice(&read(&out)).unwrap();
    assert_eq!(value["scenario"], "fig2");
    let columns: Vec<&str> =
        value["columns"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(columns[0], "gamma_t");
    let rows = value["rows"].as_array().unwrap();
    assert_eq!(rows[0].as_array().unwrap().len(), columns.len());
    // Single top-level object, keys in lexicographic order.
    let text = String::from_utf8(read(&out)).unwrap();
    let first = text.find("\"columns\"").unwrap();
    let second = text.find("\"rows\"").unwrap();
    let third = text.find("\"scenario\"").unwrap();
    assert!(first < second && second < third);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn config_file_feeds_a_run() {
    let dir = temp_dir("cfg");
    let config_path = dir.join("run.conf");
    std::fs::write(&config_path, "modes = 1\nt_end = 2\n").unwrap();
    let out = dir.join("from_file.csv");

    let status = Command::new(env!("CARGO_BIN_EXE_darkfield"))
        .args([
            "run",
            "fig2",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let text = String::from_utf8(read(&out)).unwrap();
    // One mode: exactly one n_mode column.
    assert!(text.lines().next().unwrap().contains("n_mode_0"));
    assert!(!text.lines().next().unwrap().contains("n_mode_1"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn exit_codes_follow_the_contract() {
    let bin = env!("CARGO_BIN_EXE_darkfield");
    // Unknown scenario: configuration error.
    let status = Command::new(bin).args(["run", "fig9"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    // Missing required parameter.
    let status = Command::new(bin).args(["run", "planck"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    // Unknown override key.
    let status = Command::new(bin)
        .args(["run", "fig2", "--frequency", "3"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    // Success path prints data to stdout without --out.
    let output = Command::new(bin).args(["count", "--n", "3", "--m", "4"]).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(value["all_checks_pass"], true);
    // Sweep with a failing entry exits 3 after finishing the others.
    let dir = temp_dir("codes");
    let manifest = dir.join("sweep.txt");
    std::fs::write(
        &manifest,
        format!(
            "planck temperature=5770 out={dir}/ok.json\nplanck temperature=-4 out={dir}/bad.json\n",
            dir = dir.display()
        ),
    )
    .unwrap();
    let status = Command::new(bin)
        .args(["sweep", "--manifest", manifest.to_str().unwrap(), "--workers", "2"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
    assert!(dir.join("ok.json").exists(), "healthy runs still complete");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn stdout_run_writes_no_files() {
    let output = Command::new(env!("CARGO_BIN_EXE_darkfield"))
        .args(["run", "planck", "--temperature", "3500"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let ratio = value["rows"][0][3].as_f64().unwrap();
    assert!((ratio - 3117.0).abs() <= 1.0);
}
