use std::path::Path;
use std::process::{Command, Output};

const COARSE: &str = r#"{"mesh": {"grading": {"mode": "toward_membrane", "n_y": 4, "ratio": 1.2, "n_x": 40}}}"#;

fn rosim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rosim"))
        .args(args)
        .current_dir(dir)
        .env_remove("ROSIM_OUT")
        .env_remove("ROSIM_JOBS")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_artifacts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", COARSE);
    let mut outputs = Vec::new();
    for out in ["a", "b"] {
        let o = rosim(dir.path(), &["run", "--config", &cfg, "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(dir.path().join(out));
    }
    for f in ["solution.vtk", "profiles.csv", "trace.csv", "summary.json"] {
        let a = std::fs::read(outputs[0].join(f)).unwrap();
        let b = std::fs::read(outputs[1].join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{f} differs between identical runs");
    }
    let summary = std::fs::read_to_string(outputs[0].join("summary.json")).unwrap();
    assert!(summary.contains("\"converged\": true"), "{summary}");
    let profiles = std::fs::read_to_string(outputs[0].join("profiles.csv")).unwrap();
    assert!(profiles.starts_with("x,value,field,run_id\n"));
    for field in ["pressure_drop", "u_y_bottom", "theta_bottom", "u_y_top", "theta_top"] {
        assert!(profiles.contains(field), "{field}");
    }
}

#[test]
fn forward_osmosis_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"physics": {"delta_p": 2000000}}"#);
    let o = rosim(dir.path(), &["run", "--config", &cfg, "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("forward osmosis"), "{}", stderr(&o));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn missing_mesh_file_fails_before_solving() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"mesh": {"msh": "absent.msh"}}"#);
    let o = rosim(dir.path(), &["run", "--config", &cfg, "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("does not exist"), "{}", stderr(&o));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rosim(dir.path(), &["run", "--config", "nope.json"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", COARSE);
    std::fs::write(dir.path().join("file"), "x").unwrap();
    let o = rosim(dir.path(), &["mesh", "--config", &cfg, "--out", "file/sub"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn iteration_cap_gives_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = COARSE.replacen('{', r#"{"solver": {"max_outer": 1},"#, 1);
    let cfg = write_config(dir.path(), "c.json", &text);
    let o = rosim(dir.path(), &["run", "--config", &cfg, "--out", "o"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("did not converge"));
}

#[test]
fn bad_arguments_and_zero_jobs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(rosim(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(rosim(dir.path(), &["mesh", "--jobs", "0"]).status.code(), Some(2));
    let cfg = write_config(dir.path(), "c.json", r#"{"physics": {"rho": 1000, "viscosity": 1}}"#);
    assert_eq!(rosim(dir.path(), &["mesh", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn mesh_output_round_trips_as_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", COARSE);
    let o = rosim(dir.path(), &["mesh", "--config", &cfg, "--out", "m"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("320 cells"));
    let q = std::fs::read_to_string(dir.path().join("m/mesh_quality.json")).unwrap();
    assert!(q.contains("\"cell_count\": 320"));
    let cfg2 = write_config(dir.path(), "m/c2.json", r#"{"mesh": {"msh": "mesh.msh"}}"#);
    let o = rosim(dir.path(), &["mesh", "--config", &cfg2, "--out", "m2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("320 cells"));
}

#[test]
fn output_directory_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", COARSE);
    let o = Command::new(env!("CARGO_BIN_EXE_rosim"))
        .args(["mesh", "--config", &cfg])
        .current_dir(dir.path())
        .env("ROSIM_OUT", "from_env")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("from_env/mesh.msh").is_file());
}

#[test]
fn validate_prints_a_ten_point_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", COARSE);
    let o = rosim(dir.path(), &["validate", "--case", "poiseuille", "--config", &cfg, "--out", "v"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("max relative error"));
    let csv = std::fs::read_to_string(dir.path().join("v/validate_poiseuille.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.starts_with("x,analytic,computed,rel_error\n"));
}

#[test]
fn berman_accepts_a_wall_velocity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", COARSE);
    let o = rosim(dir.path(), &["validate", "--case", "berman", "--wall-velocity", "0", "--config", &cfg, "--out", "v"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("v/validate_berman.csv").is_file());
}

#[test]
fn mesh_study_rows_increase_in_cell_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = rosim(dir.path(), &["mesh-study", "--refinement", "uniform", "--ladder", "2,3,4", "--out", "s"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("s/mesh_study_uniform.csv")).unwrap();
    let cells: Vec<usize> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(cells.len(), 3);
    assert!(cells.windows(2).all(|w| w[1] > w[0]));
}
