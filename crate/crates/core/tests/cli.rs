use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const COMMANDS: [&str; 7] = [
    "validate",
    "develop",
    "monodromy",
    "reconstruct",
    "roundtrip",
    "frenet",
    "symmetry",
];

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartankit"))
        .args(args)
        .env("CARTANKIT_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn exit(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    o.status.code().expect("exit code")
}

#[test]
fn exit_codes_per_config_and_command() {
    let table: [(&str, [i32; 7]); 9] = [
        ("spiral.json", [0, 0, 0, 0, 0, 1, 1]),
        ("sphere_patch.json", [0, 0, 0, 0, 0, 1, 1]),
        ("circle_rotation.json", [0, 0, 0, 0, 1, 1, 1]),
        ("circle_translation.json", [0, 0, 0, 3, 1, 1, 1]),
        ("torus_translations.json", [0, 0, 0, 3, 1, 1, 1]),
        ("wavy_sampled.json", [0, 0, 0, 0, 1, 1, 1]),
        ("frenet_circle.json", [1, 1, 1, 1, 1, 0, 1]),
        ("frenet_helix.json", [1, 1, 1, 1, 1, 0, 1]),
        ("bad_resolution.json", [1; 7]),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (name, codes) in table {
        for (cmd, want) in COMMANDS.iter().zip(codes) {
            assert_eq!(exit(cmd, &config(name), dir.path(), &[]), want, "{cmd} {name}");
        }
    }
}

#[test]
fn tight_tolerance_is_a_quantitative_failure() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        exit("roundtrip", &config("spiral.json"), dir.path(), &["--tol", "1e-20"]),
        2
    );
    assert_eq!(
        exit("roundtrip", &config("spiral.json"), dir.path(), &["--step", "2e-3"]),
        0
    );
}

#[test]
fn missing_config_and_unknown_command() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(exit("validate", &dir.path().join("none.json"), dir.path(), &[]), 1);
    assert_ne!(run(&["draw"]).status.code(), Some(0));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert_eq!(
            exit("roundtrip", &config("spiral.json"), dir.path(), &["--seed", "7"]),
            0
        );
    }
    for file in ["spiral.json", "spiral.csv", "spiral.dat"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
    let doc: Value = serde_json::from_slice(&std::fs::read(a.path().join("spiral.json")).unwrap()).unwrap();
    assert_eq!(doc["status"], "pass");
    assert_eq!(doc["provenance"]["seed"], 7);
}

fn circle(dir: &Path, stem: &str, m0: [f64; 2]) -> PathBuf {
    let text = format!(
        r#"{{"geometry": "e2-plane",
            "domain": {{"kind": "circle", "circumference": {TAU}, "resolution": 32}},
            "form": {{"inline": [["1", "0", "0"]]}},
            "anchors": {{"m0": [{}, {}]}},
            "outputs": {{"stem": "{stem}", "formats": ["json"]}}}}"#,
        m0[0], m0[1]
    );
    let cfg = dir.join(format!("{stem}.cfg.json"));
    std::fs::write(&cfg, text).unwrap();
    assert_eq!(exit("reconstruct", &cfg, dir, &[]), 0);
    dir.join(format!("{stem}.json"))
}

fn symmetry_config(dir: &Path, first: &Path, second: &Path) -> PathBuf {
    let text = serde_json::json!({
        "geometry": "e2-plane",
        "domain": {"kind": "circle", "circumference": TAU, "resolution": 32},
        "anchors": {"m0": [1, 0]},
        "symmetry": {"first": first, "second": second, "candidates": 4},
        "outputs": {"stem": "sym", "formats": ["json"]},
    });
    let cfg = dir.join("sym.cfg.json");
    std::fs::write(&cfg, text.to_string()).unwrap();
    cfg
}

#[test]
fn symmetry_relates_rotated_circles_and_rejects_rescaled_ones() {
    let dir = tempfile::tempdir().unwrap();
    let a = circle(dir.path(), "a", [2.0, 0.0]);
    let b = circle(dir.path(), "b", [0.0, 2.0]);
    let c = circle(dir.path(), "c", [0.5, 0.0]);
    assert_eq!(
        exit("symmetry", &symmetry_config(dir.path(), &a, &b), dir.path(), &[]),
        0
    );
    let doc: Value = serde_json::from_slice(&std::fs::read(dir.path().join("sym.json")).unwrap()).unwrap();
    assert_eq!(doc["summary"]["related"], true);
    assert_eq!(
        exit("symmetry", &symmetry_config(dir.path(), &a, &c), dir.path(), &[]),
        2
    );
}
