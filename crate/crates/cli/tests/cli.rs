use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use subdiff_cli::config::read_vector;
use subdiff_cli::{parse_config, parse_str, run, CliError, Mode};

const MINIMAL_FORWARD: &str = r#"
rho = 1.0
T = 1.0
K = 4

[operator]
kind = "dirichlet_1d"
length = 3.141592653589793

[g]
kind = "const"
value = 1.0

[phi]
coeffs = [1.0, 0.0, 0.0, 0.0]

[f]
coeffs = [0.0, 0.0, 0.0, 0.0]
"#;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subdiff"))
}

fn config_error(text: &str, mode: Mode) -> String {
    match parse_str(text, mode) {
        Err(CliError::Config(msg)) => msg,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn minimal_forward_config_is_valid() {
    let config = parse_str(MINIMAL_FORWARD, Mode::Forward).unwrap();
    assert_eq!(config.modes, 4);
    assert_eq!(config.operator().unwrap().eigenvalues()[1], 4.0);
    let dir = tempfile::tempdir().unwrap();
    run(&config, Mode::Forward, dir.path()).unwrap();
    let psi = read_vector(&dir.path().join("psi.csv"), None).unwrap();
    // ∫₀¹ e^{-t} dt
    assert!((psi.get(1) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    assert_eq!(psi.get(2), 0.0);
}

#[test]
fn constraint_violations_name_the_field() {
    let msg = config_error(&MINIMAL_FORWARD.replace("rho = 1.0", "rho = 1.5"), Mode::Forward);
    assert!(msg.contains("rho out of (0,1]"), "{msg}");

    let inverse = MINIMAL_FORWARD.replace("[f]", "[psi]");
    parse_str(&inverse, Mode::Inverse).unwrap();
    let msg = config_error(MINIMAL_FORWARD, Mode::Inverse);
    assert!(msg.contains("`psi`"), "{msg}");
    let msg = config_error(&inverse.replace("[psi]\ncoeffs = [0.0, 0.0, 0.0, 0.0]", ""), Mode::Inverse);
    assert!(msg.contains("`psi`"), "{msg}");

    let msg = config_error(&MINIMAL_FORWARD.replace("[phi]", "[phi]\nbogus = 1"), Mode::Forward);
    assert!(msg.contains("bogus") && msg.contains("line"), "{msg}");

    let msg = config_error(&MINIMAL_FORWARD.replace("value = 1.0", "value = 1.0\nomega = 2.0"), Mode::Forward);
    assert!(msg.contains("g.omega"), "{msg}");

    let msg = config_error(&MINIMAL_FORWARD.replace("[1.0, 0.0, 0.0, 0.0]", "[1.0, 0.0]"), Mode::Forward);
    assert!(msg.contains("phi.coeffs"), "{msg}");

    let msg = config_error(&MINIMAL_FORWARD.replace("coeffs = [0.0, 0.0, 0.0, 0.0]", "random = true"), Mode::Forward);
    assert!(msg.contains("seed"), "{msg}");

    let msg = config_error(&format!("mode = \"inverse\"\n{MINIMAL_FORWARD}"), Mode::Forward);
    assert!(msg.contains("mode"), "{msg}");
}

#[test]
fn runs_are_deterministic() {
    let config = parse_config(&configs().join("roundtrip.toml"), Mode::Roundtrip).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let out_a = run(&config, Mode::Roundtrip, a.path()).unwrap();
    run(&config, Mode::Roundtrip, b.path()).unwrap();
    assert!(out_a.files.len() >= 4);
    for file in &out_a.files {
        let name = file.file_name().unwrap();
        assert_eq!(fs::read(file).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn written_source_reads_back_exactly() {
    let config = parse_config(&configs().join("inverse.toml"), Mode::Inverse).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run(&config, Mode::Inverse, dir.path()).unwrap();
    let f = read_vector(&dir.path().join("f.csv"), None).unwrap();
    assert_eq!(f.get(3), 0.5);

    // Feed the recovered source back as a forward config coefficient file.
    let text = fs::read_to_string(configs().join("inverse.toml"))
        .unwrap()
        .replace("mode = \"inverse\"", "")
        .replace("[psi]", "[f]")
        .replace("[inverse]\nfree_values = { \"3\" = 0.5 }", "");
    let text = text.replace(
        &text.lines().find(|l| l.starts_with("coeffs")).unwrap().to_string(),
        &format!("file = {:?}", dir.path().join("f.csv")),
    );
    let forward = parse_str(&text.replace("trajectory = true", ""), Mode::Forward).unwrap();
    let again = forward.vector("f", &forward.operator().unwrap()).unwrap().unwrap();
    assert_eq!(again, f);
    let out = tempfile::tempdir().unwrap();
    run(&forward, Mode::Forward, out.path()).unwrap();
    let psi = read_vector(&out.path().join("psi.csv"), None).unwrap();
    let given = parse_config(&configs().join("inverse.toml"), Mode::Inverse).unwrap();
    let given = given.vector("psi", &forward.operator().unwrap()).unwrap().unwrap();
    assert!(psi.sub(&given).unwrap().norm() <= 1e-10 * given.norm());
}

#[test]
fn binary_exit_statuses() {
    let out = tempfile::tempdir().unwrap();
    let status = |args: &[&str]| binary().args(args).env("SUBDIFF_OUTPUT_DIR", out.path()).output().unwrap();

    let unsolvable = configs().join("inverse_unsolvable.toml");
    let o = status(&["inverse", unsolvable.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let diag = fs::read_to_string(out.path().join("diagnostics.txt")).unwrap();
    assert!(diag.contains("solvability k=3 residual=0.001"), "{diag}");
    assert!(diag.contains("status = unsolvable"));

    let missing = out.path().join("nope.toml");
    assert_eq!(status(&["forward", missing.to_str().unwrap()]).status.code(), Some(1));

    let o = status(&["ml-eval", "--rho", "0.5", "--mu", "1", "--z", "-1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 0.427_583_576_155_807).abs() < 1e-12);
    assert_eq!(status(&["ml-eval", "--rho", "0.1", "--mu", "1", "--z", "2"]).status.code(), Some(2));
    assert_eq!(status(&["ml-eval", "--rho", "1.5", "--mu", "1", "--z", "2"]).status.code(), Some(1));

    let o = status(&["selftest", "--quick"]);
    assert_eq!(o.status.code(), Some(0));
    let summary = fs::read_to_string(out.path().join("selftest.txt")).unwrap();
    assert!(summary.lines().count() >= 5 && summary.lines().all(|l| l.starts_with("PASS")), "{summary}");
}

#[test]
fn forward_config_writes_field_and_residual() {
    let config = parse_config(&configs().join("forward.toml"), Mode::Forward).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = run(&config, Mode::Forward, dir.path()).unwrap();
    let field = fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert_eq!(field.lines().count(), 1 + 33 * 41);
    let residual: f64 = outcome.summary.iter().find(|(k, _)| k == "residual_max").unwrap().1.parse().unwrap();
    assert!(residual < 1e-3);
    let diag = fs::read_to_string(dir.path().join("diagnostics.txt")).unwrap();
    assert!(diag.contains("status = ok"));
}

#[test]
fn engineered_null_mode_from_config() {
    let config = parse_config(&configs().join("inverse.toml"), Mode::Inverse).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let outcome = run(&config, Mode::Inverse, dir.path()).unwrap();
    assert!(outcome.summary.contains(&("b_zero".to_string(), "[3]".to_string())));
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 17 * 8);
}
