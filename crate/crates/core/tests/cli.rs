use std::fs;
use std::process::Command;

use orthosteer::cli::run;

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orthosteer"))
}

fn run_str(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["orthosteer"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn legendre_plan_carries_published_amplitude_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let p = plan.to_str().unwrap();
    let (code, _, err) = run_str(&[
        "plan",
        "nhi",
        "--from",
        "0,0,0",
        "--to",
        "0,0,1",
        "--family",
        "legendre",
        "--interval",
        "-1,1",
        "--out",
        p,
    ]);
    assert_eq!(code, 0, "{err}");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&plan).unwrap()).unwrap();
    let inputs = doc["phases"][0]["inputs"].as_array().unwrap();
    for t in inputs {
        let s = t["scale"].as_f64().unwrap();
        assert!((s.abs() - (15.0f64 / 4.0).sqrt()).abs() < 1e-12, "{t}");
    }
    let (code, out, _) = run_str(&["verify", p]);
    assert_eq!(code, 0);
    assert!(out.contains("x3: target 1"), "{out}");
    assert!(out.trim_end().ends_with(": ok"));
}

#[test]
fn zero_input_simulation_holds_the_initial_state() {
    let (code, out, _) = run_str(&[
        "simulate", "nhi", "--from", "0.5,-1,2", "--to", "0.5,-1,2", "--steps", "100",
    ]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,x3,u1,u2"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 101);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(&cols[1..], ["0.5", "-1", "2", "0", "0"]);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run_str(&["plan"]).0, 2);
    assert_eq!(run_str(&["plan", "nhi", "--from", "0,0", "--to", "0,0,1"]).0, 2);
    assert_eq!(
        run_str(&["plan", "nhi", "--from", "0,0,0", "--to", "0,0,1", "--steps", "10"]).0,
        2
    );
    assert_eq!(
        run_str(&["plan", "nhi", "--from", "0,0,0", "--to", "0,0,1", "--interval", "0,2"]).0,
        1
    );
    // A Jacobi weight stronger than an inverse square root cannot be simulated.
    let (code, _, err) = run_str(&[
        "simulate", "nhi", "--from", "0,0,0", "--to", "0,0,1", "--family", "jacobi", "--alpha", "-0.7", "--beta",
        "-0.7",
    ]);
    assert_eq!(code, 1, "{err}");
    assert_eq!(run_str(&["verify", "/definitely/not/here.json"]).0, 2);
    assert_eq!(run_str(&["--help"]).0, 0);
}

#[test]
fn verify_rejects_a_tampered_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("p.json");
    let p = plan.to_str().unwrap();
    assert_eq!(
        run_str(&["plan", "nhi", "--from", "0,0,0", "--to", "1,1,1", "--out", p]).0,
        0
    );
    let text = fs::read_to_string(&plan)
        .unwrap()
        .replace("\"target\": [\n    1.0,", "\"target\": [\n    1.5,");
    fs::write(&plan, text).unwrap();
    let (code, out, _) = run_str(&["verify", p]);
    assert_eq!(code, 1);
    assert!(out.contains("FAILED"));
}

#[test]
fn config_file_and_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.json");
    fs::write(
        &cfg,
        r#"{"system": "gnhi", "m": 3, "from": [0,0,0,0,0,0], "to": [1,2,3,0.5,-1,2], "family": "chebyshev_second", "output": "out/plan.json"}"#,
    )
    .unwrap();
    let status = exe()
        .args(["plan", "--config", cfg.to_str().unwrap()])
        .env("ORTHOSTEER_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let written = dir.path().join("out/plan.json");
    let verify = exe().args(["verify", written.to_str().unwrap()]).output().unwrap();
    assert!(verify.status.success(), "{}", String::from_utf8_lossy(&verify.stdout));

    fs::write(&cfg, r#"{"system": "gnhi", "bogus": 1, "from": [], "to": []}"#).unwrap();
    let bad = exe()
        .args(["plan", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn cost_modes_change_only_the_area_phase() {
    let base = ["plan", "nhi", "--from", "0,0,0", "--to", "1,-1,2"];
    let plans: Vec<serde_json::Value> = ["none", "l1", "weighted_l2"]
        .iter()
        .map(|c| {
            let mut args = base.to_vec();
            args.extend(["--cost", c]);
            let (code, out, err) = run_str(&args);
            assert_eq!(code, 0, "{err}");
            serde_json::from_str(&out).unwrap()
        })
        .collect();
    for p in &plans {
        assert_eq!(p["phases"][0]["inputs"], plans[0]["phases"][0]["inputs"]);
        assert_eq!(p["predicted_endpoint"], plans[0]["predicted_endpoint"]);
    }
    assert_eq!(plans[2]["closed_form"], "chebyshev_optimal");
    // Fuel of the constant phase is |dx1| + |dx2|; the weighted optimum costs |a|.
    assert!((plans[1]["phases"][0]["cost"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((plans[2]["phases"][1]["cost"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    // Retuned plans still verify.
    let dir = tempfile::tempdir().unwrap();
    for (i, p) in plans.iter().enumerate().take(2) {
        fs::write(dir.path().join(format!("{i}.json")), serde_json::to_string(p).unwrap()).unwrap();
        assert_eq!(
            run_str(&["verify", dir.path().join(format!("{i}.json")).to_str().unwrap()]).0,
            0
        );
    }
}

#[test]
fn attitude_plans_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (mode, extra) in [
        ("constant", vec![]),
        ("weighted", vec!["--q", "1,1"]),
        ("underactuated", vec![]),
    ] {
        let path = dir.path().join(format!("{mode}.json"));
        let mut args = vec![
            "plan",
            "so3",
            "--from",
            "0.1,0,0",
            "--to",
            "0.1,0.05,1.02",
            "--attitude",
            mode,
            "--duration",
            "1",
            "--out",
        ];
        args.push(path.to_str().unwrap());
        args.extend(extra);
        let (code, _, err) = run_str(&args);
        assert_eq!(code, 0, "{mode}: {err}");
        let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(doc["profile"]["kind"], mode);
        assert_eq!(doc["convention"], "gdot = hat(omega) g");
        assert_eq!(run_str(&["verify", path.to_str().unwrap()]).0, 0, "{mode}");
        let (code, csv, _) = run_str(&["simulate", "--plan", path.to_str().unwrap(), "--steps", "100"]);
        assert_eq!(code, 0);
        assert!(csv.starts_with("t,g11,g12,g13,g21,g22,g23,g31,g32,g33,w1,w2,w3\n"));
    }
}

#[test]
fn fuel_and_repro_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cmp.csv");
    let (code, out, _) = run_str(&[
        "fuel",
        "--compare",
        "legendre:1,2",
        "--compare",
        "trig",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let reports: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(reports[0]["family"], "trig");
    let table = fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 3);

    let plots = dir.path().join("plots");
    let (code, out, _) = run_str(&["paper-repro", "--plots", plots.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.matches("paper-deviation").count(), 3);
    assert!(!out.contains("FAIL"));
    let trace = fs::read_to_string(plots.join("chebyshev_trace.csv")).unwrap();
    let last = trace.lines().last().unwrap();
    let x3: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((x3 - 1.0).abs() < 1e-6);
}

#[test]
fn suite_is_seeded() {
    let args = [
        "suite", "nhi", "--from", "0,0,0", "--to", "0,0,0", "--family", "trig", "--seed", "3", "--count", "6",
    ];
    let (c1, a, _) = run_str(&args);
    let (c2, b, _) = run_str(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}
