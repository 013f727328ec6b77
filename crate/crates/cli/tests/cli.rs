use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const EXE: &str = env!("CARGO_BIN_EXE_tslmi");

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/examples/two_subsystem.sys")
}

fn tslmi(args: &[&str]) -> Output {
    Command::new(EXE).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const SMALL: &str = r#"
[system]
name = "small"
[[subsystem]]
state_dim = 2
output_dim = 1
input_dim = 1
disturbance_dim = 1
initial_state = [1.0, -1.0]
[subsystem.switching]
kind = "schedule"
entries = [{ time = 0.0, mode = 0 }]
[[subsystem.mode]]
[[subsystem.mode.rule]]
membership = "1"
lambda = 0.0
A = [[-0.1, 1.0], [0.0, -1.0]]
B = [[-1.0], [0.5]]
Bw = [[0.0], [0.0]]
C = [[1.0, 0.2]]
"#;

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = tslmi(&["validate", bundled().to_str().unwrap()]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));

    let bad = dir.path().join("bad.sys");
    fs::write(&bad, "[system\nname = ").unwrap();
    assert_eq!(code(&tslmi(&["validate", bad.to_str().unwrap()])), 2);

    let missing = dir.path().join("nope.sys");
    assert_eq!(code(&tslmi(&["validate", missing.to_str().unwrap()])), 2);

    let wrong = dir.path().join("wrong.sys");
    fs::write(&wrong, SMALL.replace("C = [[1.0, 0.2]]", "C = [[1.0, 0.2, 0.0]]")).unwrap();
    let out = tslmi(&["validate", "--system", wrong.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn synth_writes_controller_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("small.sys");
    fs::write(&sys, SMALL).unwrap();
    let out = tslmi(&["synth", "--system", sys.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--layout", "coherent"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    for f in ["controller.json", "controller-coherent.json", "synthesis.log", "config.toml"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let ctrl = tslmi::ControllerSet::from_json(&fs::read_to_string(dir.path().join("controller.json")).unwrap()).unwrap();
    assert_eq!(ctrl.layout(), tslmi::Layout::Coherent);

    // reuse the file for simulate and verify
    let c = dir.path().join("controller.json");
    let args = ["--system", sys.to_str().unwrap(), "--controller", c.to_str().unwrap(), "--out", dir.path().to_str().unwrap()];
    let sim = tslmi(&[&["simulate", "--tend", "5", "--stride", "10"], &args[..]].concat());
    assert_eq!(code(&sim), 0);
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 502);
    let ver = tslmi(&[&["verify", "--tend", "30", "--runs", "2"], &args[..]].concat());
    assert_eq!(code(&ver), 0, "{}", String::from_utf8_lossy(&ver.stdout));
    assert!(fs::read_to_string(dir.path().join("verification.txt")).unwrap().contains("overall: PASS"));
}

#[test]
fn tiny_attenuation_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let out = tslmi(&["synth", "--zeta", "1e-6,1e-6", "--lambda", "-6", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!dir.path().join("controller.json").exists());
    assert!(fs::read_to_string(dir.path().join("synthesis.log")).unwrap().contains("no layout certified"));
}

#[test]
fn bad_options_and_rectangular_literal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&tslmi(&["synth", "--epsilon=-1", "--out", out])), 1);
    assert_eq!(code(&tslmi(&["synth", "--system", "/no/such/file.sys", "--out", out])), 2);

    let sys = dir.path().join("rect.sys");
    fs::write(&sys, SMALL.replace("output_dim = 1", "output_dim = 2").replace("C = [[1.0, 0.2]]", "C = [[1.0, 0.2], [0.0, 1.0]]"))
        .unwrap();
    let r = tslmi(&["synth", "--system", sys.to_str().unwrap(), "--layout", "paper-literal", "--out", out]);
    assert_eq!(code(&r), 3, "{}", String::from_utf8_lossy(&r.stdout));
}

#[test]
fn config_file_is_echoed_and_reloadable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let sys = dir.path().join("small.sys");
    fs::write(&sys, SMALL).unwrap();
    assert_eq!(code(&tslmi(&["synth", "--system", sys.to_str().unwrap(), "--out", out, "--mu", "1.5"])), 0);
    let echoed = fs::read_to_string(dir.path().join("config.toml")).unwrap();
    let cfg = tslmi_cli::config::RunConfig::from_toml(&echoed).unwrap();
    assert_eq!(cfg.synthesis.mu, 1.5);
    let again = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("config.toml");
    let r = tslmi(&["synth", "--config", cfg_path.to_str().unwrap(), "--out", again.path().to_str().unwrap()]);
    assert_eq!(code(&r), 0);
    assert_eq!(
        fs::read_to_string(dir.path().join("controller.json")).unwrap(),
        fs::read_to_string(again.path().join("controller.json")).unwrap()
    );
}
