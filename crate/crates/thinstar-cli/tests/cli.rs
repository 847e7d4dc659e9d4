use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinstar")).arg("--workdir").arg(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) {
    std::fs::write(dir.join(name), serde_json::to_string(cfg).unwrap()).unwrap();
}

fn star(lengths: [f64; 3], radius: f64, ell0: f64, mass: f64) -> Value {
    json!({
        "edges": lengths.iter().map(|l| json!({"length": l, "radius": {"const": radius}})).collect::<Vec<_>>(),
        "node": {"ell0": ell0, "mass_integral": mass, "node_volume": (2.0 * ell0).powi(3)},
        "alpha": {"regime": "zero"}
    })
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "sym.json", &star([1.0; 3], 1.0, 0.2, 1.0));
    dir
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn first_lambda(csv: &str) -> f64 {
    let row = csv.lines().nth(1).unwrap();
    row.split(',').nth(1).unwrap().parse().unwrap()
}

#[test]
fn symmetric_star_first_eigenvalue() {
    let d = setup();
    let o = run(d.path(), &["spectrum", "--config", "sym.json", "--regime", "zero", "--count", "3"]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!((first_lambda(&csv) - PI * PI / 4.0).abs() < 1e-12);
    // Λ₂ = Λ₃ = π² is double on the symmetric star and must be flagged.
    assert!(csv.lines().nth(2).unwrap().contains(",true,"));
}

#[test]
fn zero_count_is_a_usage_error() {
    let d = setup();
    let o = run(d.path(), &["spectrum", "--config", "sym.json", "--count", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn unknown_flags_exit_with_one() {
    let d = setup();
    assert_eq!(code(&run(d.path(), &["spectrum", "--bogus"])), 1);
    assert_eq!(code(&run(d.path(), &["--help"])), 0);
}

#[test]
fn vertex_mass_lowers_the_first_eigenvalue() {
    let d = setup();
    let zero = run(d.path(), &["spectrum", "--config", "sym.json", "--regime", "zero"]);
    let one = run(d.path(), &["spectrum", "--config", "sym.json", "--regime", "one"]);
    let (z, o) =
        (first_lambda(&String::from_utf8(zero.stdout).unwrap()), first_lambda(&String::from_utf8(one.stdout).unwrap()));
    assert!(o < z, "regime one {o} not below regime zero {z}");
}

#[test]
fn spectrum_writes_file_and_manifest() {
    let d = setup();
    let o = run(
        d.path(),
        &["spectrum", "--config", "sym.json", "--count", "2", "--format", "json", "--out", "out/spec.json"],
    );
    assert_eq!(code(&o), 0);
    let spec = read_json(&d.path().join("out/spec.json"));
    assert_eq!(spec["eigenpairs"].as_array().unwrap().len(), 2);
    let m = read_json(&d.path().join("out/spec.json.manifest.json"));
    assert_eq!(m["command"], "spectrum");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 1);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn order_zero_returns_the_limit_eigenvalue() {
    let d = setup();
    let o = run(d.path(), &["expand", "--config", "sym.json", "--order", "0", "--out", "s.json"]);
    assert_eq!(code(&o), 0);
    let s = read_json(&d.path().join("s.json"));
    let mu = s["mu"].as_object().unwrap();
    assert_eq!(mu.len(), 1);
    assert_eq!(mu["0"].as_f64().unwrap(), PI * PI / 4.0);
}

#[test]
fn missing_constants_exit_four_and_name_the_order() {
    let d = setup();
    let o = run(d.path(), &["expand", "--config", "sym.json", "--order", "1", "--out", "s.json"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8(o.stderr).unwrap().contains("exponent 1"));
    // The partial series is still written.
    let s = read_json(&d.path().join("s.json"));
    assert_eq!(s["flags"]["truncated_at"], "1");
}

#[test]
fn massless_node_has_no_fractional_terms() {
    let d = setup();
    let mut cfg = star([1.0, 1.3, 1.7], 1.0, 0.2, 0.0);
    cfg["node"]["delta_table"] = json!({"(1,2)": 0.1, "(1,3)": -0.2});
    cfg["node"]["node_integrals"] = json!({"1": 0.0});
    write_config(d.path(), "m0.json", &cfg);
    let o = run(d.path(), &["expand", "--config", "m0.json", "--regime", "frac", "--alpha", "0.3", "--out", "s.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&d.path().join("s.json"));
    let mut fractional = 0;
    for t in s["terms"].as_array().unwrap() {
        let e = t["e"].as_f64().unwrap();
        if e.fract() != 0.0 {
            fractional += 1;
            assert_eq!(t["mu"].as_f64().unwrap(), 0.0, "exponent {e}");
        }
    }
    assert!(fractional > 0);
}

#[test]
fn expansion_output_is_deterministic() {
    let d = setup();
    let args = |out: &'static str| {
        ["expand", "--config", "sym.json", "--regime", "frac", "--m0", "1", "--n0", "2", "--order", "0", "--out", out]
    };
    assert_eq!(code(&run(d.path(), &args("a.json"))), 0);
    assert_eq!(code(&run(d.path(), &args("b.json"))), 0);
    let a = std::fs::read(d.path().join("a.json")).unwrap();
    let b = std::fs::read(d.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn empty_eps_list_is_rejected() {
    let d = setup();
    let o = run(d.path(), &["oracle", "--config", "sym.json", "--regime", "frac", "--alpha", "0.5"]);
    assert_eq!(code(&o), 1);
    let o = run(d.path(), &["oracle", "--config", "sym.json", "--regime", "frac", "--alpha", "0.5", "--eps", ""]);
    assert_eq!(code(&o), 1);
}

#[test]
fn oracle_to_rates_recovers_the_slope() {
    let d = setup();
    for alpha in ["0.3", "0.5"] {
        let o = run(
            d.path(),
            &[
                "oracle",
                "--config",
                "sym.json",
                "--regime",
                "frac",
                "--alpha",
                alpha,
                "--count",
                "2",
                "--eps",
                "1e-1,1e-2,1e-3,1e-4,1e-5",
                "--out",
                "o.csv",
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let o = run(d.path(), &["rates", "--input", "o.csv", "--index", "1", "--alpha", alpha, "--out", "r.json"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let fit = read_json(&d.path().join("r.json"));
        let expected = 1.0 - alpha.parse::<f64>().unwrap();
        let slope = fit["slope"].as_f64().unwrap();
        assert!((slope - expected).abs() < 0.03, "alpha {alpha}: slope {slope}");
        // Leading coefficient on the symmetric star: −(m/π)·Λ₁·(2/3).
        let prefactor = fit["prefactor"].as_f64().unwrap();
        let closed = -(1.0 / PI) * (PI * PI / 4.0) * (2.0 / 3.0);
        assert!((prefactor - closed).abs() < 1e-3 * closed.abs(), "prefactor {prefactor} vs {closed}");
    }
}

#[test]
fn rates_rejects_short_sweeps() {
    let d = setup();
    let o =
        run(d.path(), &["oracle", "--config", "sym.json", "--regime", "zero", "--eps", "1e-1,1e-2", "--out", "o.csv"]);
    assert_eq!(code(&o), 0);
    let o = run(d.path(), &["rates", "--input", "o.csv", "--alpha", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn junction_constants_round_trip_through_config() {
    let d = setup();
    let h = 0.375 / PI.sqrt();
    let mut cfg = star([1.0, 1.3, 1.7], h, 0.25, 0.5);
    cfg["node"]["rho0"] = json!({"const": 1.0});
    cfg["node"]["junction"] = json!({"spacing": 1.0 / 32.0, "truncation": 6.0});
    write_config(d.path(), "j.json", &cfg);

    let o = run(d.path(), &["junction", "--config", "j.json", "--out", "jt.json", "--config-out", "back.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let jt = read_json(&d.path().join("jt.json"));
    let tables = &jt["constants"];
    assert!(tables["delta_table"]["(1,2)"].is_f64());
    assert!(tables["delta_table"]["(1,3)"].is_f64());

    let back = read_json(&d.path().join("back.json"));
    assert!(back["node"].get("junction").is_none());
    assert_eq!(back["node"]["delta_table"], tables["delta_table"]);

    let o = run(d.path(), &["expand", "--config", "back.json", "--order", "1", "--out", "s.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&d.path().join("s.json"));
    assert_eq!(s["mu"], jt["mu"]);

    let m = read_json(&d.path().join("jt.json.manifest.json"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}
