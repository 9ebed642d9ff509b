//! End-to-end tests of the `nematic` binary: exit codes, artifact layout,
//! determinism, and the subcommand contracts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nematic_cli::config::parse_config;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nematic"));
    c.env_remove("NEMATIC_OUT_DIR");
    c
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process terminated by signal")
}

const KINETIC_CFG: &str = "\
tier = kinetic
params.gamma = 6.0
params.epsilon = 0.1
grid.nx = 17
grid.ny = 17
grid.lx = 1.0
grid.ly = 1.0
boundary.kind = uniform_angle
boundary.angle = 0.4
initial.kind = equilibrium
time.dt = 1e-4
time.t_end = 5e-3
kinetic.k_max = 6
output.every = 25
";

#[test]
fn configuration_problems_are_reported_exhaustively() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "bad.cfg",
        "\
tier = kinetic
params.gamma = -3
grid.nx = 17
grid.ny = seventeen
grid.lx = 1.0
grid.ly = 1.0
boundary.kind = winding
boundary.degree = 2
initial.kind = multivortex
initial.vortices = 0.1,0.1,1
time.dt = 1e-4
mystery.knob = 7
",
    );
    let out = bin().arg("simulate").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(exit_code(&out), 2);
    let err = stderr_of(&out);
    // every independent problem shows up in the single report
    for needle in [
        "params.gamma",
        "grid.ny",
        "mystery.knob",
        "time.t_end",
        "params.epsilon",
        "total degree 1 but the boundary phase winds 2",
    ] {
        assert!(err.contains(needle), "missing `{needle}` in:\n{err}");
    }
}

#[test]
fn simulate_is_byte_deterministic_and_lists_real_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "kin.cfg", KINETIC_CFG);

    let mut dirs = Vec::new();
    for run in 0..2 {
        let root = tmp.path().join(format!("out{run}"));
        let out = bin()
            .arg("simulate")
            .arg("--config")
            .arg(&cfg)
            .env("NEMATIC_OUT_DIR", &root)
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
        dirs.push(root.join("kin"));
    }

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dirs[0].join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "success");
    assert!(manifest["halt"].is_null());

    // every listed artifact exists and is non-empty
    let listed: Vec<String> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert!(listed.contains(&"diagnostics.csv".to_string()));
    assert!(listed.iter().any(|a| a.starts_with("snapshot_")));
    for name in &listed {
        let meta = fs::metadata(dirs[0].join(name)).unwrap();
        assert!(meta.len() > 0, "{name} is empty");
    }

    // the config echo resolves back to the same experiment
    let echoed: BTreeMap<String, String> =
        serde_json::from_value(manifest["config"].clone()).unwrap();
    let text: String = echoed.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    let reparsed = parse_config(&text).unwrap();
    let original = parse_config(KINETIC_CFG).unwrap();
    assert_eq!(reparsed, original);

    // reruns are byte-identical artifact by artifact
    for name in listed.iter().chain([&"run.json".to_string()]) {
        let a = fs::read(dirs[0].join(name)).unwrap();
        let b = fs::read(dirs[1].join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between identical runs");
    }
}

#[test]
fn default_output_root_is_runs_in_the_working_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "kin.cfg", KINETIC_CFG);
    let out = bin()
        .arg("simulate")
        .arg("--config")
        .arg(&cfg)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(tmp.path().join("runs/kin/run.json").is_file());
}

#[test]
fn snapshot_resume_continues_a_kinetic_run() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("out");
    let cfg = write_cfg(tmp.path(), "kin.cfg", KINETIC_CFG);
    let out = bin()
        .arg("simulate")
        .arg("--config")
        .arg(&cfg)
        .env("NEMATIC_OUT_DIR", &root)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let last = root.join("kin/snapshot_0002.nemf");
    assert!(last.is_file());
    let resume_text = KINETIC_CFG
        .replace(
            "initial.kind = equilibrium",
            &format!("initial.kind = snapshot\ninitial.file = {}", last.display()),
        )
        .replace("time.t_end = 5e-3", "time.t_end = 1e-3");
    let resume_cfg = write_cfg(tmp.path(), "resume.cfg", &resume_text);
    let out = bin()
        .arg("simulate")
        .arg("--config")
        .arg(&resume_cfg)
        .env("NEMATIC_OUT_DIR", &root)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(root.join("resume/diagnostics.csv").is_file());
}

#[test]
fn close_approach_halt_is_soft_by_default_and_strict_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("out");
    let cfg = write_cfg(
        tmp.path(),
        "pair.cfg",
        "\
tier = vortex
params.gamma = 6.0
params.epsilon = 0.02
grid.nx = 33
grid.ny = 33
grid.lx = 1.0
grid.ly = 1.0
boundary.kind = winding
boundary.degree = 0
initial.kind = multivortex
initial.vortices = -0.22,0.0,1; 0.22,0.0,-1
time.dt = 1e-4
time.t_end = 0.05
vortex.m_b = 256
",
    );
    let out = bin()
        .arg("simulate")
        .arg("--config")
        .arg(&cfg)
        .env("NEMATIC_OUT_DIR", &root)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("halted early"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("pair/run.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "halted");
    assert!(manifest["halt"].as_str().unwrap().contains("pair approach"));

    let trajectory = fs::read_to_string(root.join("pair/vortex-trajectory.csv")).unwrap();
    assert!(trajectory.lines().count() > 2);

    let out = bin()
        .arg("simulate")
        .arg("--config")
        .arg(&cfg)
        .arg("--strict-halt")
        .env("NEMATIC_OUT_DIR", &root)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 4, "stderr: {}", stderr_of(&out));
}

#[test]
fn specfun_table_has_its_minimum_at_the_equilibrium_row() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("table.csv");
    let out = bin()
        .arg("specfun-table")
        .arg("--gamma")
        .arg("6")
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));

    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "r,lambda,w_gamma,w_gamma_prime");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 100);
    let (min_row, min_w) = rows
        .iter()
        .map(|row| row[2])
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, w)| if w < acc.1 { (i, w) } else { acc });
    // the potential is normalized to vanish at its minimum, and the sweep
    // contains the minimizer itself as an extra row
    assert!(min_w.abs() < 1e-12, "min w_gamma = {min_w:e}");
    assert!(rows[min_row][3].abs() < 1e-10, "w' at minimum = {:e}", rows[min_row][3]);
    assert!((rows[min_row][0] - 0.9021527790649594).abs() < 1e-9);
}

#[test]
fn maxslope_demo_tracking_error_shrinks_with_epsilon() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("demo.csv");
    let out = bin().arg("maxslope-demo").arg("--out").arg(&path).output().unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_of(&out));
    let text = fs::read_to_string(&path).unwrap();
    assert!(stdout_of(&out).contains("epsilon,sup_distance,t_end"));

    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for pair in rows.windows(2) {
        assert!(pair[0][0] > pair[1][0], "epsilon column must decrease");
        assert!(pair[0][1] > pair[1][1], "tracking error must shrink with epsilon");
    }
    for row in &rows {
        assert!(row[1] <= 2.0 * row[0], "tracking error {} not O(eps {})", row[1], row[0]);
    }
}

#[test]
fn runtime_blowup_exits_with_the_numerical_code() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("out");
    // fast-clock hierarchy with a step far beyond the explicit coupling limit
    let cfg = write_cfg(
        tmp.path(),
        "blow.cfg",
        "\
tier = kinetic
params.gamma = 6.0
params.epsilon = 0.5
grid.nx = 33
grid.ny = 33
grid.lx = 1.0
grid.ly = 1.0
boundary.kind = winding
boundary.degree = 1
initial.kind = multivortex
initial.vortices = 0.05,0.03,1
time.dt = 0.5
time.t_end = 50
time.rescaled = false
kinetic.k_max = 6
",
    );
    let out = bin()
        .arg("simulate")
        .arg("--config")
        .arg(&cfg)
        .env("NEMATIC_OUT_DIR", &root)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 3, "stdout: {}\nstderr: {}", stdout_of(&out), stderr_of(&out));
}

#[test]
fn validate_subcommand_requires_the_validate_tier() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "kin.cfg", KINETIC_CFG);
    let out = bin().arg("validate").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("tier"));
}

#[test]
fn validation_suite_passes_at_the_reference_scale() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("out");
    let cfg = write_cfg(
        tmp.path(),
        "reference.cfg",
        "\
# cross-tier reference scale: deep nematic regime, pair window below collision
tier = validate
params.gamma = 10.0
params.epsilon = 0.06
grid.nx = 33
grid.ny = 33
grid.lx = 1.0
grid.ly = 1.0
time.dt = 1e-5
time.t_end = 0.008
kinetic.k_max = 10
",
    );
    let out = bin()
        .arg("validate")
        .arg("--config")
        .arg(&cfg)
        .env("NEMATIC_OUT_DIR", &root)
        .output()
        .unwrap();
    let table = stdout_of(&out);
    assert_eq!(exit_code(&out), 0, "table:\n{table}\nstderr: {}", stderr_of(&out));
    assert!(table.contains("9/9 checks passed"), "table:\n{table}");
    for check in [
        "special-functions",
        "uniform-stationarity",
        "two-vortex-laws",
        "gradient-oracle",
        "closure-consistency",
        "frozen-vortex",
        "phase-relaxation-rate",
        "maxent-vs-ldg",
        "maxslope-spot-checks",
    ] {
        assert!(table.contains(&format!("PASS {check}")), "missing PASS {check}:\n{table}");
    }
    let report = fs::read_to_string(root.join("reference/validation-report.txt")).unwrap();
    assert_eq!(report, table_without_trailer(&table));
}

fn table_without_trailer(stdout: &str) -> String {
    // the binary prints the table then a "report in ..." line
    let mut s = String::new();
    for line in stdout.lines() {
        if line.starts_with("report in ") {
            break;
        }
        s.push_str(line);
        s.push('\n');
    }
    s
}
