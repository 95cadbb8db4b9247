use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_martingale"))
        .args(args)
        .env_remove("MARTINGALE_SEED")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", String::from_utf8_lossy(&out.stderr)));
    (code, v)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn four_outcomes(dir: &Path) -> (String, String) {
    let space = write(
        dir,
        "space.json",
        r#"{"probs": ["1/4","1/4","1/4","1/4"], "partitions": [[[0,1],[2,3]]]}"#,
    );
    let x = write(dir, "x.json", "[1, 2, 3, 4]");
    (space, x)
}

#[test]
fn condexp_block_averages() {
    let dir = tempfile::tempdir().unwrap();
    let (space, x) = four_outcomes(dir.path());
    let (code, v) = json(&["condexp", "--space", &space, "--x", &x, "--partition-index", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["result"]["y"], serde_json::json!(["3/2", "3/2", "7/2", "7/2"]));
    assert_eq!(v["result"]["expectation"], "5/2");
    assert_eq!(v["result"]["defining_property"]["passed"], true);
}

#[test]
fn condexp_extreme_partitions() {
    let dir = tempfile::tempdir().unwrap();
    let (space, x) = four_outcomes(dir.path());
    let finest = write(dir.path(), "finest.json", "[[0],[1],[2],[3]]");
    let (_, v) = json(&["condexp", "--space", &space, "--x", &x, "--partition", &finest]);
    assert_eq!(v["result"]["y"], serde_json::json!(["1", "2", "3", "4"]));
    let coarsest = write(dir.path(), "coarsest.json", r#"{"blocks": [[0,1,2,3]]}"#);
    let (_, v) = json(&["condexp", "--space", &space, "--x", &x, "--partition", &coarsest]);
    assert_eq!(v["result"]["y"], serde_json::json!(["5/2", "5/2", "5/2", "5/2"]));
}

#[test]
fn condexp_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"probs": ["1/2", "1/4"]}"#);
    let x = write(dir.path(), "x.json", "[1, 2]");
    let p = write(dir.path(), "p.json", "[[0,1]]");
    assert_eq!(
        run(&["condexp", "--space", &bad, "--x", &x, "--partition", &p])
            .status
            .code(),
        Some(2)
    );
    let (space, _) = four_outcomes(dir.path());
    let overlap = write(dir.path(), "overlap.json", "[[0,1],[1,2,3]]");
    let x4 = write(dir.path(), "x4.json", "[1,2,3,4]");
    assert_eq!(
        run(&["condexp", "--space", &space, "--x", &x4, "--partition", &overlap])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn classify_tree_walks() {
    for (tree, kind) in [
        ("4:1/2:1:-1", "martingale"),
        ("4:2/3:1:-1", "submartingale"),
        ("4:1/3:1:-1", "supermartingale"),
        ("4:1/2:0:0", "martingale"),
    ] {
        let (code, v) = json(&["classify", "--tree", tree]);
        assert_eq!(code, 0);
        assert_eq!(v["result"]["kind"], kind, "{tree}");
    }
    assert_eq!(
        run(&["classify", "--tree", "3:2/3:1:-1", "--expect", "martingale"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["classify", "--tree", "3:1/2:1:-1", "--expect", "martingale"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(run(&["classify", "--tree", "3:3/2:1:-1"]).status.code(), Some(2));
}

#[test]
fn upcross_worked_example() {
    let out = run(&["upcross", "--values", "0,2,0,2", "--band", "1/2:3/2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        rows[0],
        "band_lower,band_upper,n,value,indicator,running_integral,running_count"
    );
    assert_eq!(
        &rows[1..],
        [
            "1/2,3/2,0,0,,0,0",
            "1/2,3/2,1,2,1,2,1",
            "1/2,3/2,2,0,0,2,1",
            "1/2,3/2,3,2,1,4,2"
        ]
    );
}

#[test]
fn upcross_exit_codes_follow_the_form() {
    // X = (1, -10), band 0:1: no upcrossing, yet the literal right side is -10.
    assert_eq!(
        run(&["upcross", "--values", "1,-10", "--band", "0:1"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(&["upcross", "--values", "1,-10", "--band", "0:1", "--form", "corrected"])
            .status
            .code(),
        Some(0)
    );
    let (code, v) = json(&["upcross", "--fuzz", "--trials", "300", "--form", "corrected"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["corrected_violations"], 0);
    assert_eq!(
        run(&["upcross", "--values", "0,1", "--band", "1:0"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["upcross", "--form", "corrected"]).status.code(), Some(2));
}

#[test]
fn gw_regime_and_extinction() {
    let (code, v) = json(&["gw", "--p", "1/4,0,3/4", "regime"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["regime"], "supercritical");
    assert!((v["result"]["q"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);

    let (code, v) = json(&["gw", "--p", "3/4,0,1/4", "--trials", "2000", "extinction"]);
    assert_eq!(code, 0);
    assert!((v["result"]["q"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["result"]["monte_carlo"]["within_three_se"], true);
}

#[test]
fn gw_reads_toml_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "law.toml", "p = [\"1/4\", \"0\", \"3/4\"]\n");
    let (code, v) = json(&["gw", "--config", &cfg, "regime"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["mean"], "3/2");
}

#[test]
fn gw_rejects_invalid_laws() {
    assert_eq!(run(&["gw", "--p", "1/2,1/4", "regime"]).status.code(), Some(2));
    assert_eq!(run(&["gw", "--p", "-1/2,3/2", "regime"]).status.code(), Some(2));
    assert_eq!(run(&["gw", "--p", "1", "regime"]).status.code(), Some(2));
}

#[test]
fn seeds_select_the_stream() {
    let args = [
        "gw",
        "--p",
        "1/4,0,3/4",
        "--trials",
        "20",
        "--horizon",
        "15",
        "simulate",
        "--format",
        "csv",
    ];
    let base = run(&args).stdout;
    assert_eq!(base, run(&args).stdout);
    let mut with_seed = args.to_vec();
    with_seed.extend(["--seed", "5"]);
    assert_ne!(base, run(&with_seed).stdout);

    let from_env = Command::new(env!("CARGO_BIN_EXE_martingale"))
        .args(args)
        .env("MARTINGALE_SEED", "5")
        .output()
        .unwrap()
        .stdout;
    assert_eq!(from_env, run(&with_seed).stdout);
}
