use objrt::bench::{self, BenchConfig, BenchError, TESTS};
use objrt::ContractLevel;
use std::process::Command;

fn quick() -> BenchConfig {
    BenchConfig {
        iters: bench::MIN_ITERS,
        reps: bench::MIN_REPS,
        warmup: 1000,
        ..BenchConfig::default()
    }
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_objrt-bench"))
}

#[test]
fn every_workload_runs_and_checks_out() {
    let (rt, lib) = bench::setup();
    let report = bench::run(&rt, &lib, &TESTS, &quick()).unwrap();
    assert_eq!(report.records.len(), TESTS.len());
    for t in TESTS {
        let r = report.get(t).unwrap();
        assert_eq!(r.iters, bench::MIN_ITERS);
        assert!(r.min_ns <= r.median_ns && r.median_ns <= r.max_ns, "{t}");
        assert!(r.calls_per_sec > 0.0 && r.ratio_vs_direct > 0.0, "{t}");
    }
    assert_eq!(report.get("direct_call_baseline").unwrap().ratio_vs_direct, 1.0);
    assert!(report.cache.hits > 0);
}

#[test]
fn extra_contexts_and_levels() {
    let (rt, lib) = bench::setup();
    for level in ContractLevel::ALL_LEVELS {
        let cfg = BenchConfig {
            contract_level: level,
            contexts: 2,
            ..quick()
        };
        bench::run(&rt, &lib, &["incr", "next_method_incr", "forward_incr"], &cfg).unwrap();
    }
}

#[test]
fn configuration_is_validated() {
    let (rt, lib) = bench::setup();
    let bad = [
        BenchConfig { iters: 99_999, ..quick() },
        BenchConfig { reps: 2, ..quick() },
        BenchConfig { contexts: 0, ..quick() },
    ];
    for cfg in bad {
        assert!(matches!(bench::run(&rt, &lib, &["incr"], &cfg), Err(BenchError::Config(_))));
    }
    let mut cfg = quick();
    cfg.dispatch.cache_slot_bound = 0;
    assert!(matches!(cfg.validate(), Err(BenchError::Config(_))));
    cfg = quick();
    cfg.dispatch.fast_message_rank = 6;
    assert!(cfg.validate().is_err());
    assert!(matches!(
        bench::run(&rt, &lib, &["decr"], &quick()),
        Err(BenchError::UnknownTest(_))
    ));
    assert_eq!(bench::select("all").unwrap().len(), TESTS.len());
    assert_eq!(bench::select("addTo3").unwrap(), ["addTo3"]);
    assert!(bench::select("addTo5").is_err());
}

#[test]
fn table_and_records_formats() {
    let (rt, lib) = bench::setup();
    let report = bench::run(&rt, &lib, &["incr", "addTo"], &quick()).unwrap();
    let table = report.to_table();
    assert!(table.starts_with("test"));
    assert!(table.lines().any(|l| l.starts_with("addTo ")));
    assert!(table.lines().last().unwrap().starts_with("cache:"));
    let records: Vec<serde_json::Value> = report
        .to_records()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 2);
    for r in &records {
        for field in ["test", "iters", "median_ns", "calls_per_sec", "ratio_vs_direct"] {
            assert!(r.get(field).is_some(), "missing {field} in {r}");
        }
    }
}

#[test]
fn cli_lists_workloads() {
    let out = cli().arg("--list").output().unwrap();
    assert!(out.status.success());
    let listed: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(listed, TESTS);
}

#[test]
fn cli_runs_a_workload_as_records() {
    let out = cli()
        .args(["--test", "incrBy3", "--iters", "100000", "--reps", "3", "--warmup", "0"])
        .args(["--format", "records", "--contract-level", "all", "--fast-message-rank", "0"])
        .args(["--cache-bound", "64"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let tests: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["test"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(tests, ["incrBy3"]);
}

#[test]
fn cli_rejects_bad_arguments() {
    for args in [
        &["--test", "nope"][..],
        &["--iters", "10"],
        &["--reps", "1"],
        &["--contract-level", "most"],
        &["--fast-message-rank", "6"],
        &["--format", "xml"],
    ] {
        let out = cli().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
