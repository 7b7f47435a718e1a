use std::path::PathBuf;
use std::process::{Command, Output};

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models").join(name)
}

fn reach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdp-reach"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

#[test]
fn ii_reports_the_fig1_value() {
    let m = model("fig1.mdp");
    let out = reach(&["--model", m.to_str().unwrap(), "--algorithm", "ii", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let (lo, up) = (v["lower"].as_f64().unwrap(), v["upper"].as_f64().unwrap());
    assert!(lo <= 0.5 && 0.5 <= up && up - lo < 1e-6);
    assert_eq!(v["converged"], true);
    assert_eq!(v["sound"], true);
    assert!(v.get("wallTimeMillis").is_none());
}

#[test]
fn json_keys_are_in_report_order() {
    let m = model("fig3.mdp");
    let out = reach(&["--model", m.to_str().unwrap(), "--algorithm", "brtdp", "--json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let keys = [
        "algorithm",
        "lower",
        "upper",
        "width",
        "episodes",
        "steps",
        "backups",
        "exploredStates",
        "ecCollapses",
        "converged",
        "sound",
        "seed",
    ];
    let pos: Vec<usize> = keys
        .iter()
        .map(|k| text.find(&format!("\"{k}\":")).unwrap_or_else(|| panic!("missing {k}")))
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
}

#[test]
fn seeded_runs_are_byte_identical() {
    let m = model("fig1.mdp");
    let path = m.to_str().unwrap();
    for alg in [
        vec!["--algorithm", "brtdp", "--seed", "7"],
        vec![
            "--algorithm",
            "dql",
            "--epsilon",
            "0.2",
            "--delta",
            "0.1",
            "--seed",
            "3",
            "--override-m",
            "2000",
            "--override-eps-bar",
            "0.01",
            "--override-i",
            "8",
        ],
    ] {
        let mut args = vec!["--model", path, "--json"];
        args.extend(alg);
        let a = reach(&args);
        let b = reach(&args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn overridden_dql_is_flagged_unsound() {
    let m = model("coin.mdp");
    let out = reach(&[
        "--model",
        m.to_str().unwrap(),
        "--algorithm",
        "dql-no-ec",
        "--epsilon",
        "0.2",
        "--delta",
        "0.1",
        "--override-m",
        "2000",
        "--override-eps-bar",
        "0.01",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["sound"], false);
    assert!(v["upper"].as_f64().unwrap() - v["lower"].as_f64().unwrap() < 0.2);
}

#[test]
fn dql_without_overrides_is_refused() {
    let m = model("fig1.mdp");
    let out = reach(&[
        "--model",
        m.to_str().unwrap(),
        "--algorithm",
        "dql",
        "--epsilon",
        "0.1",
        "--delta",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn exhausted_budget_exits_with_two() {
    let m = model("fig1.mdp");
    let out = reach(&[
        "--model",
        m.to_str().unwrap(),
        "--algorithm",
        "brtdp",
        "--max-episodes",
        "1",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["converged"], false);
}

#[test]
fn bad_inputs_exit_with_one() {
    let missing = model("no-such-file.mdp");
    let out = reach(&["--model", missing.to_str().unwrap(), "--algorithm", "ii"]);
    assert_eq!(out.status.code(), Some(1));

    let dir = std::env::temp_dir().join(format!("mdp-reach-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.mdp");
    std::fs::write(&bad, "mdp 2\ninitial 0\naction 0 a\nto 1 0.7\n").unwrap();
    let out = reach(&["--model", bad.to_str().unwrap(), "--algorithm", "ii"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line"), "{err}");
    std::fs::remove_dir_all(&dir).ok();

    let m = model("fig1.mdp");
    let out = reach(&["--model", m.to_str().unwrap(), "--algorithm", "ii", "--override-m", "5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stats_add_wall_time_and_table_is_default() {
    let m = model("fig3.mdp");
    let out = reach(&["--model", m.to_str().unwrap(), "--algorithm", "ii", "--json", "--stats"]);
    assert!(json(&out)["wallTimeMillis"].is_u64());
    let out = reach(&["--model", m.to_str().unwrap(), "--algorithm", "vi"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text
        .lines()
        .any(|l| l.starts_with("upper") && l.trim_end().ends_with("1.000000000")));
}
