use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn privroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_privroute"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", &path]);
    let o = privroute(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn eval_reports_exact_average() {
    let dir = TempDir::new().unwrap();
    let sc = gen(
        dir.path(),
        "s.json",
        &["--topology", "uniform", "--n", "3", "--seed", "1"],
    );
    let o = privroute(&[
        "eval",
        "--scenario",
        &sc,
        "--route",
        "v1,v2,a2,v3,a3,a1",
        "--capacity",
        "2",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["avg_risk"]["exact"], "5/12");
    assert_eq!(v["worst_risk"]["exact"], "1/2");
    assert_eq!(v["orders"][0]["risk"]["exact"], "1/4");
}

#[test]
fn gen_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    for topology in ["uniform", "two-clusters", "hub-spoke", "linear"] {
        let args = ["--topology", topology, "--n", "6", "--decoys", "2", "--seed", "42"];
        let a = gen(dir.path(), "a.json", &args);
        let first = std::fs::read(&a).unwrap();
        let b = gen(dir.path(), "b.json", &args);
        assert_eq!(first, std::fs::read(&b).unwrap(), "{topology}");
    }
}

#[test]
fn pareto_on_diagonal_fixture() {
    let dir = TempDir::new().unwrap();
    let sc = gen(dir.path(), "d.json", &["--fixture", "diagonal"]);
    let o = privroute(&[
        "pareto",
        "--scenario",
        &sc,
        "--capacity",
        "2",
        "--objectives",
        "avg-risk,avg-wait",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,c,n_d,route,avg_risk,avg_risk_decimal,worst_risk,worst_risk_decimal,avg_wait,heuristic_tag,multiplicity"
    );
    assert_eq!(lines.next().unwrap(), "2,2,0,\"v1,v2,a1,a2\",1/2,0.5,1/2,0.5,2.5,,2");
    assert!(lines.next().is_none());
}

#[test]
fn pareto_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let sc = gen(
        dir.path(),
        "u.json",
        &["--topology", "uniform", "--n", "4", "--decoys", "1", "--seed", "5"],
    );
    let run = || {
        let o = privroute(&[
            "pareto",
            "--scenario",
            &sc,
            "--capacity",
            "3",
            "--decoy-budget",
            "1",
            "--with-heuristics",
        ]);
        assert!(o.status.success());
        o.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn oracle_dumps_posterior() {
    let dir = TempDir::new().unwrap();
    let sc = gen(dir.path(), "s.json", &["--topology", "linear", "--n", "3"]);
    let o = privroute(&["oracle", "--scenario", &sc, "--route", "v1,v2,a2,v3,a3,a1"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "customer,v1,v2,v3\na1,1/4,1/4,1/2\na2,1/2,1/2,0/1\na3,1/4,1/4,1/2\n"
    );
}

#[test]
fn heuristic_tags_the_record() {
    let dir = TempDir::new().unwrap();
    let sc = gen(
        dir.path(),
        "s.json",
        &["--topology", "hub-spoke", "--n", "6", "--seed", "2"],
    );
    let o = privroute(&[
        "heuristic",
        "--scenario",
        &sc,
        "--kind",
        "reversal",
        "--k",
        "1",
        "--capacity",
        "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["heuristic_tag"], "reversal(k=1)");
    assert_eq!(v["avg_risk"]["exact"], "13/75");
    assert_eq!(v["exact_instantiation"], true);
}

#[test]
fn sweep_writes_cells() {
    let o = privroute(&["sweep", "--n", "3", "--capacity", "2", "--decoys", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("3,2,0,"));
    assert!(text.contains(",5/12,"));
}

#[test]
fn fixtures_pass() {
    let o = privroute(&["fixtures"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(!text.contains("FAIL"));
    assert!(text.lines().count() >= 9);
}

#[test]
fn exit_codes_separate_failure_kinds() {
    let dir = TempDir::new().unwrap();
    let sc = gen(dir.path(), "s.json", &["--topology", "uniform", "--n", "3"]);
    let big = gen(dir.path(), "big.json", &["--topology", "uniform", "--n", "8"]);

    let usage = privroute(&["eval", "--scenario", &sc]);
    assert_eq!(usage.status.code(), Some(2));

    let invalid = privroute(&["eval", "--scenario", &sc, "--route", "a1,v1", "--capacity", "2"]);
    assert_eq!(invalid.status.code(), Some(3));
    assert!(invalid.stdout.is_empty());
    assert!(String::from_utf8_lossy(&invalid.stderr).contains("invalid route"));

    let unknown = privroute(&["eval", "--scenario", &sc, "--route", "v9,a9", "--capacity", "2"]);
    assert_eq!(unknown.status.code(), Some(3));

    let guard = privroute(&["pareto", "--scenario", &big, "--capacity", "2"]);
    assert_eq!(guard.status.code(), Some(4));

    let missing = privroute(&[
        "eval",
        "--scenario",
        "/nonexistent/s.json",
        "--route",
        "v1,a1",
        "--capacity",
        "1",
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn scenario_file_round_trips_through_the_cli() {
    let dir = TempDir::new().unwrap();
    let sc = gen(
        dir.path(),
        "s.json",
        &["--topology", "two-clusters", "--n", "5", "--decoys", "1", "--seed", "9"],
    );
    let text = std::fs::read_to_string(&sc).unwrap();
    let loaded = privroute::io::scenario_from_json(&text).unwrap();
    assert_eq!(privroute::io::scenario_to_json(&loaded).unwrap(), text);
}
