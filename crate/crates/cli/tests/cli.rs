use std::fs;
use std::process::{Command, Output};

fn mbk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn sp_writes_index_set_and_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sp.json");
    let out = mbk(&[
        "sp",
        "--domain",
        "hartogs:1",
        "--p",
        "2",
        "--box",
        "-3:0,-3:0",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["indices"], serde_json::json!([[0, -1], [0, 0]]));
    assert_eq!(v["conditions"]["conditions"][1], "(a1 + a2)*p + 4 > 0");
}

#[test]
fn sp_validation_errors() {
    let out = mbk(&[
        "sp",
        "--domain",
        "omega_a:2,2,1,2",
        "--p",
        "2",
        "--box",
        "0:0,0:0",
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("gcd"));
    assert_eq!(
        code(&mbk(&[
            "sp", "--domain", "disc", "--p", "1.5", "--box", "0:1"
        ])),
        2
    );
    let empty = mbk(&["sp", "--domain", "disc", "--p", "2", "--box", "1:0"]);
    assert_eq!(code(&empty), 0);
    assert_eq!(json(&empty)["indices"], serde_json::json!([]));
}

#[test]
fn thresholds_finite_and_dense() {
    let out = mbk(&["thresholds", "--domain", "omega_a:1,1,1,2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["kind"], "finite");
    assert_eq!(
        v["values"],
        serde_json::json!(["6/1", "4/1", "3/1", "2/1", "3/2", "4/3", "6/5"])
    );
    assert!(v["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .all(|w| !w["alpha"].is_null()));
    let dense = mbk(&["thresholds", "--domain", "hartogs:sqrt(2)"]);
    assert_eq!(code(&dense), 0);
    assert_eq!(json(&dense), serde_json::json!({ "kind": "dense" }));
}

#[test]
fn norm_with_oracle_agrees() {
    let out = mbk(&[
        "norm",
        "--domain",
        "omega_a:1,1,1,2",
        "--alpha",
        "0,0",
        "--p",
        "2",
        "--oracle",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["relative_gap"].as_f64().unwrap() < 1e-6);
    let closed = v["closed_form"]["value"].as_f64().unwrap();
    assert!((closed - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
}

#[test]
fn kernel_on_bidisc() {
    let out = mbk(&[
        "kernel",
        "--domain",
        "product(disc,disc)",
        "--p",
        "2",
        "--z",
        "0.5,0.5",
        "--w",
        "0.5,0.5",
    ]);
    assert_eq!(code(&out), 0);
    let exact = (16.0 / (9.0 * std::f64::consts::PI)).powi(2);
    let re = json(&out)["value"][0].as_f64().unwrap();
    assert!((re - exact).abs() < 1e-8 * exact);
}

#[test]
fn kernel_errors_map_to_exit_codes() {
    assert_eq!(
        code(&mbk(&[
            "kernel", "--domain", "disc", "--p", "2", "--z", "1.2", "--w", "0"
        ])),
        2
    );
    let slow = mbk(&[
        "kernel",
        "--domain",
        "disc",
        "--p",
        "2",
        "--z",
        "0.999",
        "--w",
        "0.999",
        "--truncation",
        "20",
    ]);
    assert_eq!(code(&slow), 5);
}

#[test]
fn verify_suite_passes() {
    let out = mbk(&["verify", "--suite", "union-law", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["suites"][0]["passed"], true);
    assert_eq!(code(&mbk(&["verify", "--suite", "unknown"])), 2);
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out_path = dir.path().join("out.csv");
    let config = serde_json::json!({
        "command": "sp",
        "domain": { "family": "hartogs", "gamma": "1/1" },
        "p": "2",
        "box": "-3:0,-3:0",
        "format": "csv",
        "out": out_path.to_str().unwrap(),
    });
    fs::write(&cfg, config.to_string()).unwrap();
    assert_eq!(code(&mbk(&["run", "--config", cfg.to_str().unwrap()])), 0);
    assert_eq!(fs::read_to_string(&out_path).unwrap(), "0,-1\n0,0\n");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_mbk"))
            .env("MBK_THREADS", threads)
            .args([
                "continuity",
                "--domain",
                "disc",
                "--p",
                "2",
                "--k-max",
                "3",
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        fs::read(path).unwrap()
    };
    assert_eq!(run("a.json", "1"), run("b.json", "4"));
}
