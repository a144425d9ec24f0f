//! The `cellgame` binary and the scenario harness end to end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use cellgame::harness::{self, Scenario};
use cellgame::nonatomic::{CongestionProfile, NonatomicInstance};
use cellgame::{AssociationProfile, NetworkInstance};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cellgame"));
    c.env_remove("CELLGAME_OUT");
    c
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn example1_scenario_stays_put() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", scenario("example1.json").to_str().unwrap(), "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let trace = fs::read_to_string(out.path().join("trace.csv")).unwrap();
    assert_eq!(trace, "step,mobile,from_bs,to_bs,cost_before,cost_after\n");
    let r = json(&out.path().join("result.json"));
    assert_eq!(r["final_profile"], serde_json::json!([2, 1]));
    assert_eq!(r["final_is_nash"], Value::Bool(true));
    assert_eq!(r["status"], "converged_ne");
    let meta = json(&out.path().join("metadata.json"));
    assert_eq!(meta["seed"], 0);
    assert_eq!(meta["scenario"]["dynamics"]["max_steps"], Value::Null);
    assert_eq!(meta["scenario"]["instance"]["target_sinr"], serde_json::json!([0.5, 0.5]));
    assert!(fs::read_to_string(out.path().join("run.log")).unwrap().contains("wall_time_s="));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| bin().args(args).arg("--out").arg(dir.path().join("o")).output().unwrap();

    let bad_noise = write(
        dir.path(),
        "noise.json",
        r#"{"experiment": "simulate", "instance": {"gains": [[1.0]], "target_sinr": [1.0], "noise_power": 0}}"#,
    );
    let o = code(&["run", bad_noise.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("noise power"));

    let overloaded = write(
        dir.path(),
        "over.json",
        r#"{"experiment": "solve_ne", "instance": {"gains": [[1.0, 1.0]], "sinr_density": [0.05], "masses": [40]}}"#,
    );
    let o = code(&["run", overloaded.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sum_l gamma_l M_l < N"));

    let malformed = write(dir.path(), "bad.json", "{\n  \"experiment\": \"simulate\",\n  \"seed\": 1x\n}");
    let o = code(&["run", malformed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json:3:"), "{}", String::from_utf8_lossy(&o.stderr));

    let stuck = write(
        dir.path(),
        "stuck.json",
        r#"{"experiment": "solve_ne", "solver": {"max_iters": 1, "starts": 1},
            "instance": {"gains": [[1.0, 0.3, 0.7], [0.2, 0.9, 0.4]], "sinr_density": [0.01, 0.02], "masses": [40, 50]}}"#,
    );
    assert_eq!(code(&["run", stuck.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(code(&["run", "/nonexistent/scenario.json"]).status.code(), Some(1));
    assert_eq!(code(&["example", "8"]).status.code(), Some(3));
    assert_eq!(code(&["example", "4"]).status.code(), Some(0));
}

#[test]
fn output_dir_from_environment() {
    let base = tempfile::tempdir().unwrap();
    let cwd = tempfile::tempdir().unwrap();
    let status = bin()
        .env("CELLGAME_OUT", base.path())
        .current_dir(cwd.path())
        .args(["example", "3"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(base.path().join("example3/example.json").exists());
    let status = bin().current_dir(cwd.path()).args(["example", "1"]).status().unwrap();
    assert!(status.success());
    assert!(cwd.path().join("out/example1/metadata.json").exists());
}

#[test]
fn sweep_command_two_cells() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sweep", "--gains", "1,0.5", "--gamma", "0.01", "--points", "200", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let mut best = (0.0, 0.0);
    for r in csv::Reader::from_path(out.path().join("poa.csv")).unwrap().records() {
        let r = r.unwrap();
        let (m, p): (f64, f64) = (r[0].parse().unwrap(), r[3].parse().unwrap());
        if p > best.1 {
            best = (m, p);
        }
    }
    assert_eq!(best.0, 50.0);
    assert!((best.1 - 1.12915).abs() < 1e-4);
    let summary = json(&out.path().join("poa_summary.json"));
    assert_eq!(summary["argmax_mass"], 50.0);
    assert_eq!(summary["spillovers"], serde_json::json!([50.0]));
}

#[test]
fn seed_flag_redraws_random_instances() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, out: &str| {
        let status = bin()
            .args(["run", scenario("random_dynamics.json").to_str().unwrap(), "--seed", seed, "--out"])
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(dir.path().join(out).join("runs.csv")).unwrap()
    };
    let (a, b, c) = (run("5", "a"), run("5", "b"), run("6", "c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let meta = json(&dir.path().join("a/metadata.json"));
    assert_eq!(meta["seed"], 5);
}

#[test]
fn five_cell_sweep_matches_golden() {
    let out = tempfile::tempdir().unwrap();
    let sc = harness::parse_scenario(&scenario("five_bs_sweep.json")).unwrap();
    harness::run_scenario(&sc, out.path()).unwrap();
    assert_eq!(
        fs::read_to_string(out.path().join("poa.csv")).unwrap(),
        fs::read_to_string(golden("five_bs_sweep_poa.csv")).unwrap()
    );
    assert_eq!(
        fs::read_to_string(out.path().join("poa_summary.json")).unwrap(),
        fs::read_to_string(golden("five_bs_sweep_summary.json")).unwrap()
    );
    let s = json(&out.path().join("poa_summary.json"));
    assert_eq!(s["argmax_at_spillover"], Value::Bool(true));
    assert_eq!(s["gains"].as_array().unwrap().len(), 5);
}

/// Every profile written to disk reloads into a valid model object.
#[test]
fn emitted_profiles_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["example1.json", "example2_mapc_star.json", "example4_enumerate.json", "example4_tolls.json", "random_dynamics.json"] {
        let sc = harness::parse_scenario(&scenario(name)).unwrap();
        let out = dir.path().join(name);
        harness::run_scenario(&sc, &out).unwrap();
        let meta = json(&out.join("metadata.json"));
        let net: NetworkInstance = serde_json::from_value(meta["scenario"]["instance"].clone()).unwrap();
        let check = |v: &Value| {
            let p: Vec<usize> = serde_json::from_value(v.clone()).unwrap();
            let a = AssociationProfile::from_one_based(&p, net.num_bs()).unwrap();
            net.check_profile(&a).unwrap();
        };
        if out.join("result.json").exists() {
            let r = json(&out.join("result.json"));
            if r.get("final_profile").is_some() {
                check(&r["final_profile"]);
                check(&r["initial_profile"]);
            }
        }
        if out.join("runs.csv").exists() {
            for rec in csv::Reader::from_path(out.join("runs.csv")).unwrap().records() {
                let rec = rec.unwrap();
                let p: Vec<usize> = rec[3].split(' ').map(|x| x.parse().unwrap()).collect();
                check(&serde_json::json!(p));
            }
        }
        if out.join("enumerate.json").exists() {
            for p in json(&out.join("enumerate.json"))["nash"].as_array().unwrap() {
                check(p);
            }
        }
        if out.join("tolls.json").exists() {
            check(&json(&out.join("tolls.json"))["profile"]);
        }
    }

    for name in ["two_bs_ne.json", "two_bs_opt.json", "two_class_opt.json"] {
        let sc = harness::parse_scenario(&scenario(name)).unwrap();
        let out = dir.path().join(name);
        harness::run_scenario(&sc, &out).unwrap();
        let meta = json(&out.join("metadata.json"));
        let inst: NonatomicInstance = serde_json::from_value(meta["scenario"]["instance"].clone()).unwrap();
        let saved = json(&out.join("profile.json"));
        let masses: Vec<Vec<f64>> = serde_json::from_value(saved["masses"].clone()).unwrap();
        let p = CongestionProfile::new(masses, &inst).unwrap();
        let loads: Vec<f64> = serde_json::from_value(saved["loads"].clone()).unwrap();
        assert_eq!(p.loads(&inst), loads);
    }
}

#[test]
fn examples_report_expected_facts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |k: u8| {
        let out = dir.path().join(format!("ex{k}"));
        harness::run_scenario(&Scenario::example(k).unwrap(), &out).unwrap();
        out
    };

    let e1 = json(&run(1).join("example.json"));
    assert!(e1["conditions"].as_array().unwrap().iter().all(|c| c["holds"] == true));
    assert_eq!(e1["runs"][0]["final_profile"], serde_json::json!([2, 1]));
    assert_eq!(e1["runs"][0]["switches"], 0);
    assert_eq!(e1["runs"][1]["final_profile"], serde_json::json!([1, 2]));
    assert_eq!(e1["dominance"]["holds"], true);
    assert_eq!(e1["equilibria"]["pareto_efficient"], serde_json::json!([[1, 2]]));
    assert_eq!(e1["profiles"][0]["tolled_nash"], true);

    let e2 = json(&run(2).join("example.json"));
    assert!(e2["conditions"].as_array().unwrap().iter().all(|c| c["holds"] == true));
    assert_eq!(e2["runs"][0]["final_profile"], serde_json::json!([1, 1, 1, 2]));
    assert_eq!(e2["runs"][0]["switches"], 0);
    assert_eq!(e2["dominance"]["holds"], true);
    assert_eq!(e2["profiles"][1]["nash"], true);
    let star = e2["runs"][1]["final_profile"].as_array().unwrap();
    assert_eq!(star.iter().filter(|b| **b == 1).count(), 2);

    let e3 = json(&run(3).join("example.json"));
    let grouped = &e3["profiles"][0];
    assert_eq!(grouped["nash"], true);
    assert_eq!(grouped["pareto_efficient"], true);
    assert_eq!(grouped["tolled_nash"], true);
    assert_eq!(grouped["system_optimal"], false);
    assert!((grouped["system_cost"].as_f64().unwrap() - 2.1666666666666665).abs() < 1e-12);
    assert_eq!(e3["profiles"][1]["nash"], true);
    assert!((e3["profiles"][1]["system_cost"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let e4 = json(&run(4).join("example.json"));
    assert_eq!(e4["every_nash_splits_two_three"], true);
    assert_eq!(e4["equilibria"]["nash"].as_array().unwrap().len(), 20);
    assert_eq!(e4["equilibria"]["system_optimal"], serde_json::json!([[1, 1, 2, 2, 2], [2, 2, 1, 1, 1]]));
    assert_eq!(e4["profiles"][1]["tolled_nash"], true);
    assert_eq!(e4["profiles"][1]["system_optimal"], false);

    let e5 = json(&run(5).join("example.json"));
    assert_eq!(e5["segregated_beats_ne"], true);
    let rel = |a: &Value, b: &Value| (a.as_f64().unwrap() - b.as_f64().unwrap()).abs() / b.as_f64().unwrap();
    assert!(rel(&e5["ne_cost_solver"], &e5["ne_cost_closed_form"]) < 1e-9);
    assert!(rel(&e5["segregated_cost"], &e5["segregated_cost_closed_form"]) < 1e-12);
    assert!(e5["opt_cost_solver"].as_f64().unwrap() <= e5["segregated_cost"].as_f64().unwrap());
    assert!((e5["threshold"].as_f64().unwrap() - 25.0).abs() < 1e-9);

    let e6 = json(&run(6).join("example.json"));
    assert!((e6["alpha_ne_closed_form"].as_f64().unwrap() - 8.0 / 9.0).abs() < 1e-12);
    assert!((e6["alpha_opt_closed_form"].as_f64().unwrap() - 0.70017).abs() < 1e-5);
    assert!(rel(&e6["alpha_ne_solver"], &e6["alpha_ne_closed_form"]) < 1e-7);
    assert!(rel(&e6["alpha_opt_solver"], &e6["alpha_opt_closed_form"]) < 1e-7);

    let e7 = json(&run(7).join("poa_summary.json"));
    assert_eq!(e7["argmax_at_spillover"], true);
}
