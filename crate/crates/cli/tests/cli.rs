use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;
use tempfile::TempDir;

const SQUARE: &str = r#"{"schema_version": "1", "n": 1, "P": [[1]], "Q": [[0]], "p": [0], "q": [1], "p0": 0, "q0": 0}"#;
const TIGHT: &str = r#"{"schema_version": "1", "n": 1, "P": [[0]], "Q": [[1]], "p": [-2], "q": [0], "p0": 2, "q0": -1}"#;

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn hck(args: &[&str]) -> Output {
    hck_env(args, None)
}

fn hck_env(args: &[&str], log: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hck"));
    cmd.args(args).env_remove("HCK_LOG");
    if let Some(level) = log {
        cmd.env("HCK_LOG", level);
    }
    cmd.output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[allow(clippy::too_many_arguments)]
fn problem(p: &str, q: &str, lin_p: &str, lin_q: &str, p0: f64, q0: f64, n: usize, extra: &str) -> String {
    format!(
        r#"{{"schema_version": "1", "n": {n}, "P": {p}, "Q": {q}, "p": {lin_p}, "q": {lin_q}, "p0": {p0}, "q0": {q0}{extra}}}"#
    )
}

#[test]
fn classify_line_parabola() {
    let sb = Sandbox::new();
    let f = sb.file("sq.json", SQUARE);
    let out = hck(&["classify-line", s(&f), "--xbar", "0", "--ybar", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let env = json(&out);
    let o = &env["outcome"];
    assert_eq!(o["kind"], "Parabola");
    assert_eq!(floats(&o["coefficients"]["first"]), vec![1.0, 0.0, 0.0]);
    assert_eq!(floats(&o["coefficients"]["second"]), vec![0.0, 1.0, 0.0]);
    // ψ must be a multiple of y₂² - y₁
    let c = &o["payload"]["conic"];
    let q: Vec<Vec<f64>> = c["quad"].as_array().unwrap().iter().map(floats).collect();
    let lin = floats(&c["lin"]);
    let k = q[1][1];
    assert!(k != 0.0);
    assert_eq!(q[0][0], 0.0);
    assert_eq!(q[0][1].abs(), 0.0);
    assert!((lin[0] + k).abs() < 1e-12 && lin[1] == 0.0);
    assert_eq!(c["constant"].as_f64().unwrap(), 0.0);
}

#[test]
fn classify_line_point_and_degenerate() {
    let sb = Sandbox::new();
    let f = sb.file("c.json", &problem("[[0]]", "[[0]]", "[0]", "[0]", 1.0, 2.0, 1, ""));
    let out = hck(&["classify-line", s(&f), "--xbar", "0", "--ybar", "1"]);
    assert_eq!(code(&out), 0);
    let env = json(&out);
    assert_eq!(env["outcome"]["kind"], "Point");
    assert_eq!(floats(&env["outcome"]["payload"]["point"]), vec![1.0, 2.0]);

    let out = hck(&["classify-line", s(&f), "--xbar", "1", "--ybar", "1"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let out = hck(&["classify-line", s(&f), "--xbar", "1,2", "--ybar", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("xbar"), "{}", stderr(&out));
}

#[test]
fn malformed_files_name_the_field() {
    let sb = Sandbox::new();
    let f = sb.file("bad.json", &problem("[[1, 2], [3, 1]]", "[[0, 0], [0, 0]]", "[0, 0]", "[0, 0]", 0.0, 0.0, 2, ""));
    let out = hck(&["classify-line", s(&f), "--xbar", "0,0", "--ybar", "1,0"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("P: not symmetric"), "{}", stderr(&out));

    let f = sb.file("syntax.json", "{\n  \"schema_version\": \"1\",\n  \"n\": 1,\n  \"P\": [[1]],,\n}");
    let out = hck(&["classify-line", s(&f), "--xbar", "0", "--ybar", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));

    let f = sb.file("missing.json", r#"{"schema_version": "1", "n": 1, "P": [[1]], "Q": [[0]], "p": [0], "q": [1], "p0": 0}"#);
    let out = hck(&["classify-line", s(&f), "--xbar", "0", "--ybar", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("q0"), "{}", stderr(&out));

    let out = hck(&["classify-line", s(&sb.path("absent.json")), "--xbar", "0", "--ybar", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn witness_case_one_and_validation() {
    let sb = Sandbox::new();
    let f = sb.file("sq.json", SQUARE);
    let out = hck(&["witness", s(&f), "--xu", "2", "--e1", "0.5,1", "--xv", "2", "--e2", "1,0", "--alpha", "0.25"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let o = json(&out)["outcome"].clone();
    assert_eq!(o["branch"], "Case1_u");
    assert_eq!(floats(&o["x_star"]), vec![2.0]);
    // w = (4, 2) + 0.25(0.5, 1) + 0.75(1, 0), ū = (4, 2)
    let e = floats(&o["e_star"]);
    assert!((e[0] - 0.875).abs() < 1e-15 && (e[1] - 0.25).abs() < 1e-15, "{e:?}");
    assert_eq!(o["verification"], "pass");

    for alpha in ["0", "1", "-0.5"] {
        let out = hck(&["witness", s(&f), "--xu", "1", "--e1", "0,0", "--xv", "-1", "--e2", "0,0", "--alpha", alpha]);
        assert_eq!(code(&out), 2, "alpha {alpha}");
        assert!(stderr(&out).contains("alpha"));
    }
    let out = hck(&["witness", s(&f), "--xu", "1", "--e1", "-1,0", "--xv", "-1", "--e2", "0,0", "--alpha", "0.5"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("e1"), "{}", stderr(&out));
}

#[test]
fn witness_parabola_branches_carry_trace() {
    let sb = Sandbox::new();
    let f = sb.file("sq.json", SQUARE);
    let out = hck(&["witness", s(&f), "--xu", "1", "--e1", "0,0", "--xv", "-2", "--e2", "0,0", "--alpha", "0.5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let env = json(&out);
    assert_eq!(env["outcome"]["branch"], "ParabolaRayHit");
    let t = &env["trace"];
    assert_eq!(floats(&t["w"]), vec![2.5, -0.5]);
    assert!(t["s"].as_f64().unwrap() > 0.0 && t["t"].as_f64().unwrap() < 0.0);
    assert!(t["ray_hit"].is_object());
    assert_eq!(t["image_kind"], "Parabola");
}

#[test]
fn witness_envelope_verifies() {
    let sb = Sandbox::new();
    let f = sb.file("map.json", &problem("[[1, 0.5], [0.5, -1]]", "[[0, 1], [1, 2]]", "[1, -1]", "[0.5, 0]", 0.3, -0.2, 2, r#", "cone": {"b": [1, 0.2], "c": [-0.5, 1]}"#));
    let env_path = sb.path("w.json");
    let out = hck(&[
        "witness", s(&f), "--xu", "1.5,-0.3", "--e1", "0.1,0.7", "--xv", "-2,1.1", "--e2", "0,0", "--alpha", "0.37",
        "--out", s(&env_path),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());

    let out = hck(&["verify", s(&f), "--envelope", s(&env_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let o = json(&out)["outcome"].clone();
    assert_eq!(o["status"], "pass");
    assert!(o["drift"].as_f64().unwrap() <= 1e-12);

    // a different problem file is refused
    let g = sb.file("other.json", &std::fs::read_to_string(&f).unwrap().replace("0.3", "0.30"));
    let out = hck(&["verify", s(&g), "--envelope", s(&env_path)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("input_digest"));

    // a tampered certificate fails
    let mut env: Value = serde_json::from_str(&std::fs::read_to_string(&env_path).unwrap()).unwrap();
    let x = env["outcome"]["x_star"][0].as_f64().unwrap();
    env["outcome"]["x_star"][0] = (x + 1e-3).into();
    let bad = sb.file("bad.json", &env.to_string());
    let out = hck(&["verify", s(&f), "--envelope", s(&bad)]);
    assert_eq!(code(&out), 4);
    assert_eq!(json(&out)["outcome"]["status"], "fail");
}

#[test]
fn envelope_numbers_have_seventeen_digits() {
    let sb = Sandbox::new();
    let f = sb.file("sq.json", SQUARE);
    let out = hck(&["witness", s(&f), "--xu", "0.1", "--e1", "0,0", "--xv", "0.7", "--e2", "0.3,0", "--alpha", "0.3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1.0000000000000001e-1"), "{text}");
    assert!(text.contains("\"input_digest\": \"sha256:"));
}

#[test]
fn digest_changes_with_bytes() {
    let sb = Sandbox::new();
    let a = sb.file("a.json", SQUARE);
    let b = sb.file("b.json", &format!("{SQUARE}\n"));
    let c = sb.file("c.json", SQUARE);
    let digest = |p: &Path| {
        let out = hck(&["classify-line", s(p), "--xbar", "0", "--ybar", "1"]);
        json(&out)["input_digest"].as_str().unwrap().to_owned()
    };
    assert_ne!(digest(&a), digest(&b));
    assert_eq!(digest(&a), digest(&c));
}

#[test]
fn slemma_verdicts_and_exit_codes() {
    let sb = Sandbox::new();
    let f = sb.file("tight.json", TIGHT);
    let out = hck(&["slemma", s(&f), "--x-star", "0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let o = json(&out)["outcome"].clone();
    assert_eq!(o["verdict"], "MultiplierFound");
    assert!((o["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(o["diagnostics"].as_array().unwrap().len() > 2);

    let f = sb.file("cx.json", &problem("[[1]]", "[[0]]", "[0]", "[1]", -1.0, 0.0, 1, ""));
    let out = hck(&["slemma", s(&f), "--x-star", "-1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let o = json(&out)["outcome"].clone();
    assert_eq!(o["verdict"], "CounterexampleFound");
    let x = floats(&o["x_witness"])[0];
    assert!(x * x - 1.0 < 0.0 && x <= 1e-9, "{x}");

    let f = sb.file("noslater.json", &problem("[[1]]", "[[1]]", "[0]", "[0]", 0.0, 0.0, 1, ""));
    for x in ["0", "3", "-0.5"] {
        let out = hck(&["slemma", s(&f), "--x-star", x]);
        assert_eq!(code(&out), 5, "x* = {x}");
    }
}

#[test]
fn slemma_on_manifold_lifts_witness() {
    let sb = Sandbox::new();
    // f = x₁² - x₂² - 1, g = x₁ - 1 on x₂ = 0: f < 0 for |x₁| < 1
    let f = sb.file(
        "m.json",
        &problem("[[1, 0], [0, -1]]", "[[0, 0], [0, 0]]", "[0, 0]", "[1, 0]", -1.0, -1.0, 2, r#", "manifold": {"H": [[0, 1]], "d": [0]}"#),
    );
    let out = hck(&["slemma", s(&f), "--x-star", "0,0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let o = json(&out)["outcome"].clone();
    assert_eq!(o["verdict"], "CounterexampleFound");
    let x = floats(&o["x_witness"]);
    assert_eq!(x.len(), 2);
    assert!(x[1].abs() < 1e-12 && x[0].abs() < 1.0, "{x:?}");

    let out = hck(&["slemma", s(&f), "--x-star", "0,1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("manifold"));
}

#[test]
fn sample_stream() {
    let sb = Sandbox::new();
    let f = sb.file("sq.json", SQUARE);
    let out = hck(&["sample", s(&f), "--count", "1", "--box", "0", "--radius", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0 0\n");

    let run = |seed: &str| hck(&["sample", s(&f), "--count", "50", "--seed", seed]).stdout;
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
    let text = String::from_utf8(run("7")).unwrap();
    for line in text.lines() {
        let v: Vec<f64> = line.split(' ').map(|t| t.parse().unwrap()).collect();
        // F(x) + e with F = (x², x), e ≥ 0, |x| ≤ 5
        assert_eq!(v.len(), 2);
        assert!(v[0] >= 0.0 && v[1] >= -5.0);
    }

    let out = hck(&["sample", s(&f), "--count", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sample_large_stream_completes() {
    let sb = Sandbox::new();
    let p = "[[1, 0, 0, 0, 0, 0], [0, -1, 0, 0, 0, 0], [0, 0, 2, 0, 0, 1], [0, 0, 0, 0, 0, 0], [0, 0, 0, 0, 1, 0], [0, 0, 1, 0, 0, 1]]";
    let f = sb.file("six.json", &problem(p, p, "[1, 0, 0, 0, 0, 1]", "[0, 1, 0, 0, 1, 0]", 0.0, 1.0, 6, ""));
    let dest = sb.path("points.txt");
    let started = Instant::now();
    let out = hck(&["sample", s(&f), "--count", "100000", "--seed", "1", "--out", s(&dest)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(started.elapsed() < Duration::from_secs(30));
    assert_eq!(std::fs::read_to_string(&dest).unwrap().lines().count(), 100_000);
}

#[test]
fn verify_convexity_modes() {
    let sb = Sandbox::new();
    let f = sb.file("sq.json", SQUARE);
    let out = hck(&["verify-convexity", s(&f), "--trials", "1000"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let o = json(&out)["outcome"].clone();
    assert_eq!(o["trials"], 1000);
    assert!(o["failures"].as_array().unwrap().is_empty());
    assert_eq!(o["verdict"], "consistent with convexity");

    let out = hck(&["verify-convexity", s(&f), "--trials", "0"]);
    assert_eq!(code(&out), 2);
    let out = hck(&["verify-convexity", s(&f), "--trials", "10", "--rho", "-5"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("manifold"));

    // Dines mode: f = x₁² + x₂², g = x₁ on x₁ + x₂ = 1; on g ≤ 0 the minimum is μ = 1 at (0, 1)
    let m = sb.file(
        "dines.json",
        &problem("[[1, 0], [0, 1]]", "[[0, 0], [0, 0]]", "[0, 0]", "[1, 0]", 0.0, 0.0, 2, r#", "manifold": {"H": [[1, 1]], "d": [1]}"#),
    );
    let out = hck(&["verify-convexity", s(&m), "--trials", "300", "--rho", "-10"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let o = json(&out)["outcome"].clone();
    assert_eq!(o["rho_validated"], true);
    assert!((o["mu_estimate"].as_f64().unwrap() - 1.0).abs() < 1e-6, "{o}");
    assert!(o["report"]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn tolerance_overrides_reach_the_envelope() {
    let sb = Sandbox::new();
    let f = sb.file("sq.json", SQUARE);
    let t = sb.file("tol.json", r#"{"cert_tol": 1e-8, "search": {"restarts": 3}}"#);
    let out = hck(&["--tol-config", s(&t), "classify-line", s(&f), "--xbar", "0", "--ybar", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let env = json(&out);
    assert_eq!(env["tolerances"]["cert_tol"].as_f64().unwrap(), 1e-8);
    assert_eq!(env["search"]["restarts"], 3);

    let t = sb.file("typo.json", r#"{"cert_toll": 1e-8}"#);
    let out = hck(&["--tol-config", s(&t), "classify-line", s(&f), "--xbar", "0", "--ybar", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cert_toll"), "{}", stderr(&out));
}

#[test]
fn log_levels() {
    let sb = Sandbox::new();
    let f = sb.file("sq.json", SQUARE);
    let args = ["classify-line", s(&f), "--xbar", "0", "--ybar", "1"];
    assert!(hck_env(&args, Some("quiet")).stderr.is_empty());
    assert!(hck_env(&args, None).stderr.is_empty());
    let out = hck_env(&args, Some("info"));
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("Parabola"), "{}", stderr(&out));
    let out = hck_env(&args, Some("loud"));
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("HCK_LOG"));
}
