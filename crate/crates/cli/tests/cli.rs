use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn dualrisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualrisk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn config_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn solve_from_config_file() {
    let f = config_file(
        "# first figure, optimal spending\nlaw = exponential\nnu = 0.1\nrho = 0.1\nlambda = 0.1\ndelta = 1\ngamma = 0.5\n",
    );
    let o = dualrisk(&["solve", "--config", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["beta"].as_f64().unwrap() - 2.058_312_4).abs() < 1e-7);
    assert!((v["c_star"].as_f64().unwrap() - 0.053_667_6).abs() < 1e-7);
}

#[test]
fn exit_codes() {
    let o = dualrisk(&["solve", "--scenario", "fig1_rd", "--set", "rho=100"]);
    assert_eq!(o.status.code(), Some(2));

    let o = dualrisk(&["solve", "--scenario", "fig1_rd", "--set", "gamma=2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("SuperLinearDegenerate"));

    let f = config_file("rho = 1\ncolour = blue\n");
    let o = dualrisk(&["solve", "--config", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let o = dualrisk(&["solve", "--scenario", "fig1_rd", "--set", "rho=-1"]);
    assert_eq!(o.status.code(), Some(1));

    // λ large makes β(c) fall towards β₂ instead of rising.
    let o = dualrisk(&["verify", "beta_c_limit", "--set", "lambda=5", "--set", "delta=0.2"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], Value::Bool(false));
}

#[test]
fn randomised_commands_need_a_seed() {
    let o = dualrisk(&["simulate", "--scenario", "fig1_rd"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    let o = dualrisk(&["verify", "fig1_rd"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let run = |threads: &str| {
        let o = dualrisk(&[
            "simulate", "--scenario", "fig1_rd", "--seed", "9", "--paths", "5000", "--threads", threads,
        ]);
        assert_eq!(o.status.code(), Some(0));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        v["estimate"].clone()
    };
    assert_eq!(run("1"), run("2"));
}

#[test]
fn flags_override_the_file() {
    let f = config_file("scenario = fig1_rd\nx_min = 0\nx_max = 2\nx_n = 3\n");
    let path = f.path().to_str().unwrap();
    let o = dualrisk(&["curve", "--config", path, "--x-n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "x,v_noinvest,v_rd");
    assert_eq!(text.lines().count(), 6);
    assert_eq!(text.lines().nth(1).unwrap(), "0,1,1");
}

#[test]
fn curve_json_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.json");
    let o = dualrisk(&[
        "curve",
        "--scenario",
        "fig1_market",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 101);
    assert_eq!(rows[0]["v_rd_market"], Value::from(1.0));
}

#[test]
fn heatmap_and_asymptotics() {
    let o = dualrisk(&["heatmap", "--scenario", "fig3_heatmap"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "gamma,delta,c_star,feasible");
    assert_eq!(text.lines().count(), 1 + 19 * 20);

    let o = dualrisk(&[
        "asymptotics", "--knob", "delta_inf", "-s", "law=exponential", "-s", "nu=1", "-s", "rho=1", "-s",
        "lambda=1", "-s", "delta=1", "-s", "gamma=0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let last = stdout(&o).lines().last().unwrap().to_string();
    let ratio: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!((ratio - 1.0).abs() <= 0.01, "{last}");
}

#[test]
fn echoed_config_round_trips() {
    let o = dualrisk(&["solve", "--scenario", "fig1_market"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let echoed = v["config"].as_str().unwrap();
    let f = config_file(echoed);
    let again = dualrisk(&["solve", "--config", f.path().to_str().unwrap()]);
    let w: Value = serde_json::from_str(&stdout(&again)).unwrap();
    assert_eq!(v, w);
}

#[test]
fn verify_solver_scenarios() {
    for s in ["beta_c_limit", "fig3_heatmap", "fig4_heatmap"] {
        let o = dualrisk(&["verify", s]);
        assert_eq!(o.status.code(), Some(0), "{s}: {}", stdout(&o));
    }
    let o = dualrisk(&["verify", "gamma1_thresholds", "--seed", "42", "--paths", "20000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
