use std::fs;
use std::path::{Path, PathBuf};

use dressed_qubit::cli::{self, main_with_args, Command, RunConfig, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};

const MONO: &str = r#"{
  "seed": 7,
  "drive": {"preset": "monochromatic", "omega_q": 1.0, "omega_l": 0.8, "lambda": 0.1},
  "bath": {"model": "phenomenological", "gamma0": 0.1},
  "beta": 1.0,
  "t_final": 10.0,
  "checkpoints": 5,
  "n_trajectories": 20,
  "initial": "+"
}"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn invoke(command: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        "dressed-qubit".to_string(),
        command.to_string(),
        "--config".to_string(),
        config.display().to_string(),
        "--out".to_string(),
        out.display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    main_with_args(args)
}

/// Data rows of a versioned CSV, header excluded.
fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# format_version: 1"));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn decompose_constant_drive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"seed": 1, "drive": {"preset": "constant", "omega_q": 0.3, "period": 6.283185307179586},
            "bath": {"model": "phenomenological", "gamma0": 0.1}, "beta": 1.0, "t_final": 5.0}"#,
    );
    assert_eq!(invoke("decompose", &cfg, dir.path(), &[]), EXIT_OK);
    let (header, rows) = csv_rows(&dir.path().join("quasi_energies.csv"));
    assert_eq!(header, ["branch", "epsilon", "omega_l"]);
    let eps: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!((eps[0] - 0.15).abs() < 1e-12 && (eps[1] + 0.15).abs() < 1e-12);
}

#[test]
fn sampled_drive_file_is_resolved_next_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut samples = String::from("h11_re,h11_im,h12_re,h12_im,h21_re,h21_im,h22_re,h22_im\n");
    for _ in 0..64 {
        samples.push_str("0,0,0.05,0,0.05,0,0,0\n");
    }
    fs::write(dir.path().join("h.csv"), samples).unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"seed": 1, "drive": {"preset": "sampled", "omega_q": 0.3, "period": 6.283185307179586, "file": "h.csv"},
            "bath": {"model": "phenomenological", "gamma0": 0.1}, "beta": 1.0, "t_final": 5.0, "grid": 256, "n_max": 8}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(invoke("decompose", &cfg, &out, &[]), EXIT_OK);
    let (_, rows) = csv_rows(&out.join("quasi_energies.csv"));
    let eps: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    // static transverse field: eigenvalues of 0.15 sigma_z + 0.05 sigma_x
    let e = 0.025f64.sqrt();
    assert!((eps[0] - e).abs() < 1e-9 && (eps[1] + e).abs() < 1e-9, "{eps:?}");
}

#[test]
fn channels_of_the_monochromatic_drive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.json", MONO);
    assert_eq!(invoke("channels", &cfg, dir.path(), &[]), EXIT_OK);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("channels.json")).unwrap()).unwrap();
    let omegas: Vec<f64> = v["channels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["omega"].as_f64().unwrap())
        .collect();
    assert_eq!(omegas.len(), 6);
    assert!(omegas.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn simulate_and_lindblad_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.json", MONO);
    assert_eq!(invoke("simulate", &cfg, dir.path(), &["--workers", "3"]), EXIT_OK);
    let (header, rows) = csv_rows(&dir.path().join("checkpoints.csv"));
    assert_eq!(
        header,
        ["index", "t", "mu", "norm", "rho_pp", "rho_mm", "rho_pm_re", "rho_pm_im"]
    );
    assert_eq!(rows.len(), 20 * 5);
    let jsonl = fs::read_to_string(dir.path().join("trajectories.jsonl")).unwrap();
    let head: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(head["format_version"], 1);
    assert_eq!(jsonl.lines().count(), 21);

    assert_eq!(invoke("lindblad", &cfg, dir.path(), &[]), EXIT_OK);
    let (_, rows) = csv_rows(&dir.path().join("lindblad.csv"));
    assert_eq!(rows.len(), 5);
}

#[test]
fn thermo_and_fluctuation_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_json(MONO, dir.path(), None).unwrap();
    let files = cli::run(Command::ThermoReport, &cfg, dir.path()).unwrap();
    assert_eq!(files.len(), 3);
    let (header, rows) = csv_rows(&dir.path().join("thermo_windows.csv"));
    assert_eq!(rows.len(), 4);
    let col = header.iter().position(|h| h == "first_law_dressed_mean").unwrap();
    assert!(rows.iter().all(|r| r[col].parse::<f64>().unwrap().abs() < 1e-9));

    cli::run(Command::FluctuationTest, &cfg, dir.path()).unwrap();
    let (header, rows) = csv_rows(&dir.path().join("fluctuation.csv"));
    let col = header.iter().position(|h| h == "residual").unwrap();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[col].parse::<f64>().unwrap() < 1e-9));
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(
        dir.path(),
        "u.json",
        &MONO.replace("\"beta\"", "\"betta\": 1.0, \"beta\""),
    );
    assert_eq!(invoke("validate", &unknown, dir.path(), &[]), EXIT_CONFIG);
    let no_seed = write_config(dir.path(), "n.json", &MONO.replace("\"seed\": 7,", ""));
    assert_eq!(invoke("validate", &no_seed, dir.path(), &[]), EXIT_CONFIG);
    assert_eq!(invoke("validate", &no_seed, dir.path(), &["--seed", "3"]), EXIT_OK);
    let cfg = write_config(dir.path(), "m.json", MONO);
    assert_eq!(invoke("simulate", &cfg, dir.path(), &["--workers", "0"]), EXIT_CONFIG);
    assert_eq!(
        invoke("simulate", &dir.path().join("absent.json"), dir.path(), &[]),
        EXIT_CONFIG
    );
    assert_eq!(main_with_args(["dressed-qubit", "no-such-command"]), EXIT_CONFIG);
}

#[test]
fn colliding_channels_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    // nu = sqrt(0.6^2 + 0.8^2) = omega_L
    let text = MONO.replace(
        r#""omega_q": 1.0, "omega_l": 0.8, "lambda": 0.1"#,
        r#""omega_q": 1.6, "omega_l": 1.0, "lambda": 0.4"#,
    );
    let cfg = write_config(dir.path(), "v.json", &text);
    assert_eq!(invoke("validate", &cfg, dir.path(), &[]), EXIT_NUMERICAL);
    assert_eq!(invoke("channels", &cfg, dir.path(), &[]), EXIT_NUMERICAL);
}

#[test]
fn coarse_grid_is_only_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_json(&MONO.replace("\"beta\"", "\"grid\": 128, \"beta\""), dir.path(), None).unwrap();
    let report = cli::validate(&cfg);
    assert!(report.ok());
    assert!(report.warnings.iter().any(|(k, _)| k == "GridTooCoarse"));
}
