use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mudforce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mudforce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const FLAT: &str = r#"
name = "flat"

[foot]
shape = "flat"
length_m = 0.065
width_m = 0.065

[mud]
water_content = 0.25

[trajectory]
kind = "gait"
speed_m_s = 0.2
depth_m = 0.02

[solver]
dt_s = 5e-4
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn sphere_config() -> String {
    FLAT.replace("\"flat\"", "\"semi-sphere\"")
        .replace("length_m = 0.065\nwidth_m = 0.065", "radius_m = 0.045")
}

#[test]
fn simulate_writes_trace_and_summary() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "flat.toml", FLAT);
    let out = tmp.path().join("out");
    let o = mudforce(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert!(lines.next().unwrap().starts_with("t,"));
    assert!(lines.count() > 100);

    let summary: toml::Value = fs::read_to_string(out.join("summary.toml")).unwrap().parse().unwrap();
    let impulse = summary["metrics"]["impulse"].as_array().unwrap();
    assert!(impulse[2].as_float().unwrap() > 0.0);
    assert!(summary["metrics"]["max_suction"].as_float().unwrap() > 0.0);
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "flat.toml", FLAT);
    let read = |d: &str| {
        let out = tmp.path().join(d);
        let o = mudforce(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out.join("trace.csv")).unwrap()
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn oracle_agrees_with_closed_form() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sphere.toml", &sphere_config());
    let out = tmp.path().join("out");
    let o = mudforce(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--oracle",
        "--mesh-res",
        "4000",
        "--dt",
        "2e-3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: toml::Value = fs::read_to_string(out.join("summary.toml")).unwrap().parse().unwrap();
    let z = summary["oracle"]["relative_rmse_z"].as_float().unwrap();
    assert!(z < 0.01, "{z}");
    assert!(out.join("trace_oracle.csv").exists());
}

#[test]
fn unknown_field_is_named() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", &FLAT.replace("depth_m", "depht_m"));
    let o = mudforce(&["simulate", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("depht_m"), "{}", stderr(&o));
}

#[test]
fn out_of_range_water_content_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", &FLAT.replace("0.25", "0.6"));
    let o = mudforce(&["simulate", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("water_content"), "{}", stderr(&o));
}

#[test]
fn compare_orders_shapes_by_area() {
    let tmp = TempDir::new().unwrap();
    let flat = write_config(tmp.path(), "flat.toml", FLAT);
    let sphere = write_config(tmp.path(), "sphere.toml", &sphere_config());
    let out = tmp.path().join("out");
    let o = mudforce(&["compare", "--config", &flat, &sphere, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let mut rdr = csv::Reader::from_path(out.join("compare.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "impulse_z_ns").expect("impulse column");
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "flat");
    let iz = |r: &csv::StringRecord| r[col].parse::<f64>().unwrap();
    assert!(iz(&rows[0]) > iz(&rows[1]));
}

#[test]
fn compare_needs_two_scenarios() {
    let tmp = TempDir::new().unwrap();
    let flat = write_config(tmp.path(), "flat.toml", FLAT);
    let o = mudforce(&["compare", "--config", &flat]);
    assert!(!o.status.success());
}

#[test]
fn single_value_sweep_matches_simulate() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "flat.toml", FLAT);
    let sim = tmp.path().join("sim");
    let sweep = tmp.path().join("sweep");
    assert!(mudforce(&["simulate", "--config", &cfg, "--out", sim.to_str().unwrap()]).status.success());
    let o = mudforce(&[
        "sweep",
        "--config",
        &cfg,
        "--axis",
        "speed",
        "--values",
        "0.2",
        "--out",
        sweep.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(sim.join("trace.csv")).unwrap(),
        fs::read(sweep.join("trace_000.csv")).unwrap()
    );
}

#[test]
fn sweep_output_does_not_depend_on_thread_count() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "flat.toml", FLAT);
    let run = |threads: &str, d: &str| {
        let out = tmp.path().join(d);
        let o = Command::new(env!("CARGO_BIN_EXE_mudforce"))
            .env("MUDFORCE_THREADS", threads)
            .args(["sweep", "--config", &cfg, "--axis", "water_content", "--values", "0.25,0.35,0.45"])
            .args(["--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out.join("sweep.csv")).unwrap()
    };
    assert_eq!(run("1", "one"), run("3", "three"));
}

#[test]
fn empty_sweep_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "flat.toml", FLAT);
    let o = mudforce(&["sweep", "--config", &cfg, "--axis", "speed", "--values", ""]);
    assert!(!o.status.success());
}

#[test]
fn calibrate_recovers_builtin_parameters() {
    let tmp = TempDir::new().unwrap();
    let mut records = Vec::new();
    for v in ["0.03", "0.02", "0.01"] {
        let p = tmp.path().join(format!("rec_{v}.csv"));
        let o = mudforce(&["params", "--record", p.to_str().unwrap(), "--speed", v]);
        assert!(o.status.success(), "{}", stderr(&o));
        records.push(p.to_str().unwrap().to_string());
    }
    let out = tmp.path().join("fit");
    let mut args = vec!["calibrate"];
    args.extend(records.iter().map(String::as_str));
    args.extend(["--water-content", "0.25", "--out", out.to_str().unwrap(), "--strict"]);
    let o = mudforce(&args);
    assert!(o.status.success(), "{}", stderr(&o));

    let fitted: toml::Value = fs::read_to_string(out.join("params.toml")).unwrap().parse().unwrap();
    let builtin: toml::Value = String::from_utf8(mudforce(&["params"]).stdout).unwrap().parse().unwrap();
    for key in ["alpha_pa", "n", "lambda_s", "eta_inf_pa_s", "sigma_y_pa", "tau_build_s"] {
        let a = fitted["vertical"][key].as_float().unwrap();
        let b = builtin["vertical"][key].as_float().unwrap();
        assert!(((a - b) / b).abs() < 1e-4, "{key}: {a} vs {b}");
    }
}

#[test]
fn strict_calibration_fails_on_warnings() {
    let tmp = TempDir::new().unwrap();
    let rec = tmp.path().join("rec.csv");
    assert!(mudforce(&["params", "--record", rec.to_str().unwrap()]).status.success());
    let out = tmp.path().join("fit");
    let r = rec.to_str().unwrap();
    let o = mudforce(&["calibrate", r, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    let o = mudforce(&["calibrate", r, "--out", out.to_str().unwrap(), "--strict"]);
    assert!(!o.status.success());
}

#[test]
fn calibrate_rejects_malformed_records() {
    let tmp = TempDir::new().unwrap();
    let rec = tmp.path().join("rec.csv");
    fs::write(&rec, "time,stress\n0,1\n").unwrap();
    let o = mudforce(&["calibrate", rec.to_str().unwrap()]);
    assert!(!o.status.success());
}
