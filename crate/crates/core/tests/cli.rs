use std::path::Path;
use std::process::Command;

use nptasmc::cli::run;

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nptasmc"))
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("nptasmc").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_examples(dir: &Path) {
    let (code, _, err) = call(&["examples", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
}

fn ex(dir: &Path, name: &str, ext: &str) -> String {
    dir.join(format!("{name}.{ext}")).to_str().unwrap().to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.nptam");
    std::fs::write(&bad, "network broken\nautomaton A\n  location L0\nend\n").unwrap();
    let o = exe().args(["validate", "--model"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());

    let o = exe().args(["estimate", "--no-such-flag"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = exe().arg("estimate").output().unwrap();
    assert_eq!(o.status.code(), Some(2), "missing --model is a usage error");

    write_examples(dir.path());
    let o = exe().args(["validate", "--model", &ex(dir.path(), "abt_time", "nptam")]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], true);
}

#[test]
fn examples_are_listed_and_written() {
    let dir = tempfile::tempdir().unwrap();
    let (code, list, _) = call(&["examples"]);
    assert_eq!(code, 0);
    assert!(list.starts_with("name,query\n"));
    write_examples(dir.path());
    for line in list.lines().skip(1) {
        let name = line.split(',').next().unwrap();
        let (code, _, err) = call(&["validate", "--model", &ex(dir.path(), name, "nptam")]);
        assert_eq!(code, 0, "{name}: {err}");
    }
}

#[test]
fn estimate_echoes_parameters() {
    let dir = tempfile::tempdir().unwrap();
    write_examples(dir.path());
    let (m, q) = (ex(dir.path(), "abt_time", "nptam"), ex(dir.path(), "abt_time", "npq"));
    let (code, out, err) =
        call(&["estimate", "--model", &m, "--query", &q, "--epsilon", "0.05", "--delta", "0.05", "--seed", "7"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["required_samples"], 4794);
    assert_eq!(v["params"]["epsilon"], 0.05);
    let p = v["result"]["p_hat"].as_f64().unwrap();
    assert!((p - 0.75).abs() < 0.05);
    assert_eq!(v["diagnostics"]["runs"], 4794);
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    write_examples(dir.path());
    let (m, q) = (ex(dir.path(), "abr_t_time", "nptam"), ex(dir.path(), "abr_t_time", "npq"));
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = exe();
        c.args(["estimate", "--model", &m, "--query", &q, "--epsilon", "0.1"]);
        c.env_remove("NPTASMC_SEED");
        if let Some(s) = env {
            c.env("NPTASMC_SEED", s);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        let o = c.output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        o.stdout
    };
    assert_eq!(run(Some("5"), None), run(None, Some("5")));
    assert_ne!(run(Some("5"), None), run(None, None));
}

#[test]
fn hist_csv_is_cumulative() {
    let dir = tempfile::tempdir().unwrap();
    write_examples(dir.path());
    let (m, q) = (ex(dir.path(), "abt_time", "nptam"), ex(dir.path(), "abt_time", "npq"));
    let (code, csv, _) =
        call(&["hist", "--model", &m, "--query", &q, "--bins", "50", "--format", "csv", "--runs", "2000"]);
    assert_eq!(code, 0);
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bin,lo,hi,count,frequency,cumulative"));
    let cum: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(cum.len(), 50);
    assert!(cum.windows(2).all(|w| w[0] <= w[1]));
    assert!(*cum.last().unwrap() <= 1.0);
}

#[test]
fn artifacts_are_reproducible_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    write_examples(dir.path());
    let (m1, q1) = (ex(dir.path(), "abt_time", "nptam"), ex(dir.path(), "abt_time", "npq"));
    let m2 = ex(dir.path(), "ab_t_time", "nptam");
    let (n1, nq) = (ex(dir.path(), "timer_narrow", "nptam"), ex(dir.path(), "timer_narrow", "npq"));
    let n2 = ex(dir.path(), "timer_wide", "nptam");
    let commands: Vec<Vec<&str>> = vec![
        vec!["estimate", "--model", &m1, "--query", &q1, "--epsilon", "0.05", "--delta", "0.1"],
        vec!["test", "--model", &m1, "--query", &q1, "--theta", "0.7"],
        vec!["compare", "--model", &m1, "--query", &q1, "--model2", &m2],
        vec!["pcompare", "--model", &n1, "--query", &nq, "--model2", &n2, "--format", "csv"],
        vec!["hist", "--model", &m1, "--query", &q1, "--format", "csv", "--runs", "3000"],
        vec!["simulate", "--model", &m1, "--query", &q1, "--runs", "5"],
    ];
    for cmd in commands {
        let with = |jobs: &str| {
            let mut args = cmd.clone();
            args.extend(["--jobs", jobs, "--seed", "42"]);
            let (code, out, err) = call(&args);
            assert_eq!(code, 0, "{cmd:?}: {err}");
            out
        };
        let base = with("1");
        assert_eq!(base, with("1"), "{cmd:?} not reproducible");
        assert_eq!(base, with("3"), "{cmd:?} depends on --jobs");
        assert_eq!(base, with("8"), "{cmd:?} depends on --jobs");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    write_examples(dir.path());
    let target = dir.path().join("o.json");
    let (code, out, _) = call(&[
        "oracle",
        "--model",
        &ex(dir.path(), "abt_cost", "nptam"),
        "--query",
        "Pr[C<=6](<> T.T3)",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert!((v["result"]["probability"].as_f64().unwrap() - 0.75).abs() < 1e-6);
}

#[test]
fn bad_query_is_model_error() {
    let dir = tempfile::tempdir().unwrap();
    write_examples(dir.path());
    let m = ex(dir.path(), "abt_time", "nptam");
    let (code, _, err) = call(&["estimate", "--model", &m, "--query", "Pr[nope<=2](<> T.T3)"]);
    assert_eq!(code, 1);
    assert!(err.contains("nope"));
}
