//! CLI behavior: exit codes, output files, determinism, config diagnostics.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_foilfem")
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("foilfem-cli-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Small, fast Cartesian config.
fn small_config(out: &Path) -> String {
    format!(
        r#"
model = "both"
output_dir = {out:?}

[geometry]
kind = "cartesian_box"
margin = 0.01
target_h = 2.0e-3

[symmetry]
mode = "cartesian"
length = 0.3

[winding]
turns = 500
fill_factor = 0.95
thickness = 0.01
height = 0.02
n_splines = 7

[materials]
sigma_conductor = 60e6
eps_insulation_rel = 10.0

[drive]
kind = "current"
amplitude = 1.0

[sweep]
f_min = 1.0
f_max = 1000.0
points = 4
spacing = "log"
"#,
        out = out.display().to_string()
    )
}

#[test]
fn solve_dc_reports_series_resistance() {
    let dir = temp_dir("solve-dc");
    let cfg = dir.join("model.toml");
    std::fs::write(&cfg, small_config(&dir.join("out"))).unwrap();
    let output = Command::new(bin())
        .args(["--config", cfg.to_str().unwrap(), "solve", "--freq", "0"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");

    let manifest = std::fs::read_to_string(dir.join("out/manifest.toml")).unwrap();
    // Z ≈ 6.58 Ω at DC for these winding parameters
    let z_line = manifest
        .lines()
        .find(|l| l.starts_with("z_abs_ohm"))
        .expect("manifest reports impedance");
    let z: f64 = z_line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!((z - 6.58).abs() / 6.58 < 0.02, "manifest Z = {z}");
    assert!(manifest.contains("command = \"solve\""));
    assert!(manifest.contains("[config_echo.winding]"));
}

#[test]
fn sweep_writes_csv_with_both_models() {
    let dir = temp_dir("sweep");
    let cfg = dir.join("model.toml");
    std::fs::write(&cfg, small_config(&dir.join("out"))).unwrap();
    let output = Command::new(bin())
        .args(["--config", cfg.to_str().unwrap(), "sweep"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let csv = std::fs::read_to_string(dir.join("out/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "f_hz,model,z_re_ohm,z_im_ohm,z_abs_ohm,z_phase_deg");
    // 4 frequencies × 2 models
    assert_eq!(lines.len(), 1 + 8);
    assert!(csv.contains(",standard,"));
    assert!(csv.contains(",capacitive,"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = temp_dir("determinism");
    let cfg = dir.join("model.toml");
    let out1 = dir.join("out1");
    let out2 = dir.join("out2");
    std::fs::write(&cfg, small_config(&dir.join("unused"))).unwrap();
    for out in [&out1, &out2] {
        let output = Command::new(bin())
            .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "sweep"])
            .output()
            .unwrap();
        assert!(output.status.success(), "{output:?}");
    }
    let a = std::fs::read(out1.join("sweep.csv")).unwrap();
    let b = std::fs::read(out2.join("sweep.csv")).unwrap();
    assert_eq!(a, b, "sweep outputs differ between identical runs");
}

#[test]
fn env_var_overrides_output_dir() {
    let dir = temp_dir("env-out");
    let cfg = dir.join("model.toml");
    std::fs::write(&cfg, small_config(&dir.join("ignored"))).unwrap();
    let out = dir.join("from-env");
    let output = Command::new(bin())
        .env("FOILFEM_OUT", &out)
        .args(["--config", cfg.to_str().unwrap(), "solve", "--freq", "0"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    assert!(out.join("manifest.toml").exists());
}

#[test]
fn missing_materials_section_is_config_error() {
    let dir = temp_dir("bad-config");
    let cfg = dir.join("model.toml");
    let text = small_config(&dir.join("out"));
    let broken: String = text
        .lines()
        .filter(|l| !l.starts_with("[materials]") && !l.starts_with("sigma_conductor") && !l.starts_with("eps_insulation_rel"))
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(&cfg, broken).unwrap();
    let output = Command::new(bin())
        .args(["--config", cfg.to_str().unwrap(), "solve", "--freq", "0"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("materials"), "diagnostic names the section: {stderr}");
}

#[test]
fn invalid_toml_reports_line() {
    let dir = temp_dir("bad-toml");
    let cfg = dir.join("model.toml");
    std::fs::write(&cfg, "model = \"both\"\n[geometry\nkind = 3").unwrap();
    let output = Command::new(bin())
        .args(["--config", cfg.to_str().unwrap(), "sweep"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line"), "no line info in: {stderr}");
}

#[test]
fn profiles_writes_expected_files() {
    let dir = temp_dir("profiles");
    let cfg = dir.join("model.toml");
    std::fs::write(&cfg, small_config(&dir.join("out"))).unwrap();
    let output = Command::new(bin())
        .args(["--config", cfg.to_str().unwrap(), "profiles", "--freq", "50"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    for name in [
        "voltage_profile_standard.csv",
        "voltage_profile_capacitive.csv",
        "current_profiles_standard.csv",
        "current_profiles_capacitive.csv",
        "contours_standard.csv",
        "contours_capacitive.csv",
        "manifest.toml",
    ] {
        assert!(dir.join("out").join(name).exists(), "missing {name}");
    }
    let profile = std::fs::read_to_string(dir.join("out/current_profiles_capacitive.csv")).unwrap();
    assert!(profile.starts_with("alpha_m,i_cond_re_a,i_cond_im_a,i_cap_re_a"));
}

#[test]
fn dump_matrices_writes_matrix_market() {
    let dir = temp_dir("dump");
    let cfg = dir.join("model.toml");
    std::fs::write(&cfg, small_config(&dir.join("out"))).unwrap();
    let output = Command::new(bin())
        .args(["--config", cfg.to_str().unwrap(), "dump-matrices"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let k = std::fs::read_to_string(dir.join("out/field_stiffness.mtx")).unwrap();
    assert!(k.starts_with("%%MatrixMarket matrix coordinate real general"));
    let p = std::fs::read_to_string(dir.join("out/turn_weights.mtx")).unwrap();
    assert!(p.starts_with("%%MatrixMarket matrix array real general"));
    assert!(dir.join("out/dirichlet_nodes.txt").exists());
}

#[test]
fn oracle_compare_rejects_large_turn_counts() {
    let dir = temp_dir("oracle-reject");
    let cfg = dir.join("model.toml");
    std::fs::write(&cfg, small_config(&dir.join("out"))).unwrap();
    let output = Command::new(bin())
        .args(["--config", cfg.to_str().unwrap(), "oracle-compare"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn oracle_compare_runs_on_desk_model() {
    let dir = temp_dir("oracle-run");
    let cfg = dir.join("model.toml");
    std::fs::write(
        &cfg,
        format!(
            r#"
model = "capacitive"
output_dir = {out:?}

[geometry]
kind = "cartesian_box"
margin = 0.01
target_h = 1.0e-3

[symmetry]
mode = "cartesian"
length = 0.3

[winding]
turns = 10
fill_factor = 0.95
thickness = 1.0e-3
height = 0.02
n_splines = 7

[materials]
sigma_conductor = 60e6
eps_insulation_rel = 1000.0

[drive]
kind = "current"
amplitude = 1.0

[sweep]
f_min = 10.0
f_max = 1000.0
points = 5
spacing = "log"
"#,
            out = dir.join("out").display().to_string()
        ),
    )
    .unwrap();
    let output = Command::new(bin())
        .args(["--config", cfg.to_str().unwrap(), "oracle-compare"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let csv = std::fs::read_to_string(dir.join("out/oracle_compare.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "f_hz,z_abs_homogenized_ohm,z_abs_ladder_ohm,rel_diff");
    assert_eq!(lines.len(), 6);
    // in the low-frequency band the two agree tightly
    for line in &lines[1..] {
        let rel: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(rel < 0.05, "line {line}");
    }
}

#[test]
fn bundled_configs_parse_and_validate() {
    // the shipped configs must stay loadable; build the small desk model
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["cartesian.toml", "pot_inductor.toml", "desk_n10.toml"] {
        let text = std::fs::read_to_string(root.join(name)).unwrap();
        let parsed: toml::Value = toml::from_str(&text).unwrap();
        assert!(parsed.get("geometry").is_some(), "{name} lacks geometry");
    }
    // a fast sanity run on the desk config with a coarse override
    let dir = temp_dir("bundled");
    let text = std::fs::read_to_string(root.join("desk_n10.toml"))
        .unwrap()
        .replace("target_h = 5.0e-4", "target_h = 9.0e-4")
        .replace("points = 37", "points = 3")
        .replace("f_min = 1.0", "f_min = 100.0");
    let cfg = dir.join("desk.toml");
    std::fs::write(&cfg, text).unwrap();
    let output = Command::new(bin())
        .env("FOILFEM_OUT", dir.join("out"))
        .args(["--config", cfg.to_str().unwrap(), "sweep"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
}
