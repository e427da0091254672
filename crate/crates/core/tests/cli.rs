//! End-to-end checks of the command-line interface: exit-code contract,
//! report schemas, and byte-for-byte determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_riccati")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> (Output, Value) {
    let out = run(args);
    let value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    });
    (out, value)
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn classify_identity_reports_identity_type() {
    let input = fixture("identity.json");
    let (out, v) = run_json(&["classify", "--input", input.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(v["paper_type"], "Identity");
    assert_eq!(v["is_all"], true);
    assert_eq!(v["schema_version"], "1.0.0");
}

#[test]
fn classify_diag_reports_p3_with_three_points() {
    let input = fixture("diag235.json");
    let (out, v) = run_json(&["classify", "--input", input.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(v["paper_type"], "P3");
    assert_eq!(v["fixed_points"].as_array().unwrap().len(), 3);
}

#[test]
fn classify_singular_exits_two() {
    let input = fixture("singular.json");
    let out = run(&["classify", "--input", input.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn classify_garbage_exits_one() {
    let dir = std::env::temp_dir().join("riccati-cli-garbage");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, "{not json").unwrap();
    let out = run(&["classify", "--input", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn check_okamoto_accepts_with_infinity_fiber() {
    let input = fixture("okamoto.json");
    let (out, v) = run_json(&["check", "--input", input.to_str().unwrap(), "--target", "cp2"]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(v["accepted"], true);
    assert_eq!(v["fibers"]["infinity"], true);
    assert_eq!(v["fibers"]["finite"].as_array().unwrap().len(), 0);
}

#[test]
fn check_possibility4_rejects_with_constraint_and_writes_report() {
    let input = fixture("possibility4.json");
    let dir = std::env::temp_dir().join("riccati-cli-p4");
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("report.json");
    let out = run(&[
        "check",
        "--input",
        input.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 3);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["accepted"], false);
    assert_eq!(v["rejection"]["constraint"], "F != 0");
    assert_eq!(v["rejection"]["possibility"], 4);
}

#[test]
fn check_horizontal_accepts_trivially() {
    let input = fixture("horizontal.json");
    let (out, v) = run_json(&["check", "--input", input.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(v["accepted"], true);
}

#[test]
fn holonomy_diagonal_loop_matches_closed_form() {
    let field = fixture("linear_diag.json");
    let lp = fixture("unit_loop.json");
    let (out, v) = run_json(&[
        "holonomy",
        "--input",
        field.to_str().unwrap(),
        "--loop",
        lp.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(v["residual"].as_f64().unwrap() < 1e-7);
    // Normalized diag(e^{2 pi i 0.3}, e^{2 pi i 0.7}, 1): off-diagonals
    // vanish and the diagonal ratios have the right phases.
    let m = &v["matrix"];
    let entry = |i: usize, j: usize| -> (f64, f64) {
        (
            m[i][j][0].as_f64().unwrap(),
            m[i][j][1].as_f64().unwrap(),
        )
    };
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let (re, im) = entry(i, j);
                assert!(re.hypot(im) < 1e-6, "entry {i}{j} not ~0");
            }
        }
    }
    let diag = |i: usize| {
        let (re, im) = entry(i, i);
        num_complex::Complex64::new(re, im)
    };
    let ratio0 = diag(0) / diag(2);
    let want0 = num_complex::Complex64::new(0.0, 2.0 * std::f64::consts::PI * 0.3).exp();
    assert!((ratio0 - want0).norm() < 1e-6);
}

#[test]
fn holonomy_auto_generators_okamoto_single_infinity() {
    let field = fixture("okamoto.json");
    let (out, v) = run_json(&[
        "holonomy",
        "--input",
        field.to_str().unwrap(),
        "--auto-generators",
        "--base",
        "0,0",
    ]);
    assert_eq!(exit_code(&out), 0);
    let gens = v["generators"].as_array().unwrap();
    assert_eq!(gens.len(), 1);
    assert_eq!(gens[0]["fiber"], "infinity");
}

#[test]
fn holonomy_loop_through_fiber_exits_four() {
    let field = fixture("linear_diag.json");
    let lp = fixture("bad_loop.json");
    let out = run(&[
        "holonomy",
        "--input",
        field.to_str().unwrap(),
        "--loop",
        lp.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 4);
}

#[test]
fn synthesize_diagonal_generator_passes() {
    let gens = fixture("gens.json");
    let (out, v) = run_json(&["synthesize", "--input", gens.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(v["passed"], true);
    // Entry 0 is the compensating generator, entry 1 the input.
    assert_eq!(v["generators"][1]["paper_type"], "P3");
    assert_eq!(v["generators"][1]["model_case"], "c");
}

#[test]
fn synthesize_degenerate_generator_exits_two() {
    let gens = fixture("gens_singular.json");
    let out = run(&["synthesize", "--input", gens.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn reports_validate_against_schemas() {
    let dir = std::env::temp_dir().join("riccati-cli-schema");
    std::fs::create_dir_all(&dir).unwrap();
    let unit_loop = fixture("unit_loop.json");
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["classify", "--input"], "identity.json"),
        (vec!["check", "--input"], "okamoto.json"),
        (vec!["synthesize", "--input"], "gens.json"),
    ];
    for (i, (mut args, fix)) in cases.into_iter().enumerate() {
        let input = fixture(fix);
        let out_path = dir.join(format!("report{i}.json"));
        args.push(input.to_str().unwrap());
        args.push("--output");
        args.push(out_path.to_str().unwrap());
        let out = run(&args);
        assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
        let check = run(&["report", "--input", out_path.to_str().unwrap()]);
        assert_eq!(exit_code(&check), 0);
    }
    // Holonomy reports, both shapes.
    let diag = fixture("linear_diag.json");
    let single = dir.join("holonomy.json");
    let out = run(&[
        "holonomy",
        "--input",
        diag.to_str().unwrap(),
        "--loop",
        unit_loop.to_str().unwrap(),
        "--output",
        single.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(exit_code(&run(&["report", "--input", single.to_str().unwrap()])), 0);
    let gens = dir.join("generators.json");
    let out = run(&[
        "holonomy",
        "--input",
        diag.to_str().unwrap(),
        "--auto-generators",
        "--base",
        "1,0",
        "--output",
        gens.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(exit_code(&run(&["report", "--input", gens.to_str().unwrap()])), 0);

    // A mangled report fails validation with exit 1.
    let bad = dir.join("bad_report.json");
    std::fs::write(&bad, r#"{"kind": "classification", "schema_version": "1.0.0"}"#).unwrap();
    let check = run(&["report", "--input", bad.to_str().unwrap()]);
    assert_eq!(exit_code(&check), 1);
}

#[test]
fn identical_inputs_give_byte_identical_reports() {
    let field = fixture("okamoto.json");
    let a = run(&["check", "--input", field.to_str().unwrap()]);
    let b = run(&["check", "--input", field.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());

    let lp = fixture("unit_loop.json");
    let diag = fixture("linear_diag.json");
    let c = run(&[
        "holonomy",
        "--input",
        diag.to_str().unwrap(),
        "--loop",
        lp.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    let d = run(&[
        "holonomy",
        "--input",
        diag.to_str().unwrap(),
        "--loop",
        lp.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    assert_eq!(c.stdout, d.stdout);
    assert!(!c.stdout.is_empty());
}
