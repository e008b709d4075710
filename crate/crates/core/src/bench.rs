//! Dispatcher benchmarks: counter messages of growing closed-argument
//! count and rank, forwarding through a proxy, the next-method carry path
//! and closure evaluation, each correctness-checked after timing.

use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use crate::contracts::ContractLevel;
use crate::corelib::{self, CoreLib};
use crate::dispatch::{CacheStats, Context, DispatchConfig};
use crate::exceptions::Exception;
use crate::runtime::Runtime;
use crate::value::{Obj, SlotIndex, Value};

pub const TESTS: [&str; 14] = [
    "direct_call_baseline",
    "incr",
    "incrBy",
    "incrBy2",
    "incrBy3",
    "incrBy4",
    "incrBy5",
    "addTo",
    "addTo2",
    "addTo3",
    "addTo4",
    "forward_incr",
    "next_method_incr",
    "eval_closure",
];

pub const MIN_ITERS: u64 = 100_000;
pub const MIN_REPS: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("unknown test `{0}`")]
    UnknownTest(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{test}: expected {expected}, got {got}")]
    Check { test: String, expected: i64, got: i64 },
    #[error("{test}: {source}")]
    Raised { test: String, source: Exception },
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub iters: u64,
    pub reps: usize,
    pub warmup: u64,
    pub contract_level: ContractLevel,
    pub dispatch: DispatchConfig,
    /// Extra contexts that rerun each workload to confirm correctness.
    pub contexts: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            iters: 1_000_000,
            reps: 5,
            warmup: 10_000,
            contract_level: ContractLevel::default(),
            dispatch: DispatchConfig::default(),
            contexts: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.iters < MIN_ITERS {
            return Err(BenchError::Config(format!("iterations must be at least {MIN_ITERS}")));
        }
        if self.reps < MIN_REPS {
            return Err(BenchError::Config(format!("repetitions must be at least {MIN_REPS}")));
        }
        if self.dispatch.fast_message_rank > 5 {
            return Err(BenchError::Config("fast message rank must be within 0..=5".into()));
        }
        if self.dispatch.cache_slot_bound == 0 {
            return Err(BenchError::Config("cache bound must be positive".into()));
        }
        if self.contexts == 0 {
            return Err(BenchError::Config("at least one context is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub test: String,
    pub iters: u64,
    /// Median nanoseconds per call over the repetitions.
    pub median_ns: f64,
    pub min_ns: f64,
    pub max_ns: f64,
    pub calls_per_sec: f64,
    pub ratio_vs_direct: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub cache: CacheStats,
}

impl BenchReport {
    pub fn get(&self, test: &str) -> Option<&BenchRecord> {
        self.records.iter().find(|r| r.test == test)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<22} {:>10} {:>10} {:>10} {:>10} {:>14} {:>8}\n",
            "test", "iters", "median_ns", "min_ns", "max_ns", "calls/s", "ratio"
        );
        for r in &self.records {
            out.push_str(&format!(
                "{:<22} {:>10} {:>10.2} {:>10.2} {:>10.2} {:>14.0} {:>8.2}\n",
                r.test, r.iters, r.median_ns, r.min_ns, r.max_ns, r.calls_per_sec, r.ratio_vs_direct
            ));
        }
        let c = &self.cache;
        out.push_str(&format!(
            "cache: hits {} misses {} substitutions {} evictions {}\n",
            c.hits, c.misses, c.substitutions, c.evictions
        ));
        out
    }

    /// One JSON object per line.
    pub fn to_records(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain record") + "\n")
            .collect()
    }
}

/// A runtime with the core library installed and sealed.
pub fn setup() -> (Runtime, CoreLib) {
    let mut rt = Runtime::new();
    let lib = corelib::install(&mut rt).expect("core library definitions");
    rt.seal();
    (rt, lib)
}

/// Resolves `all` or a single test name.
pub fn select(name: &str) -> Result<Vec<&'static str>, BenchError> {
    if name == "all" {
        return Ok(TESTS.to_vec());
    }
    TESTS
        .iter()
        .find(|t| **t == name)
        .map(|t| vec![*t])
        .ok_or_else(|| BenchError::UnknownTest(name.to_string()))
}

#[inline(never)]
fn direct_incr(obj: &Obj, slot: SlotIndex) -> Result<(), Exception> {
    obj.set_int(slot, obj.get_int(slot)? + 1)
}

type Step<'a> = Box<dyn FnMut(&mut Context<'a>) -> Result<(), Exception> + 'a>;
/// `Err((expected, got))` on mismatch.
type Check<'a> = Box<dyn Fn(u64) -> Result<(), (i64, i64)> + 'a>;

struct Workload<'a> {
    step: Step<'a>,
    /// Checks the final state after `calls` steps.
    check: Check<'a>,
}

fn expect(got: Result<i64, Exception>, expected: i64) -> Result<(), (i64, i64)> {
    match got {
        Ok(v) if v == expected => Ok(()),
        Ok(v) => Err((expected, v)),
        Err(_) => Err((expected, i64::MIN)),
    }
}

fn workload<'a>(name: &str, ctx: &mut Context<'a>, lib: &'a CoreLib) -> Result<Workload<'a>, Exception> {
    let c = &lib.counters;
    let counter = c.new_counter(ctx, 0)?;
    let count = {
        let counter = counter.clone();
        move |k: i64| move |n: u64| expect(c.count(&counter), n as i64 * k)
    };
    let w = match name {
        "direct_call_baseline" => {
            let (o, slot) = (counter.clone(), c.cnt);
            Workload {
                step: Box::new(move |_| direct_incr(black_box(&o), slot)),
                check: Box::new(count(1)),
            }
        }
        "incr" => {
            let (o, g) = (counter.clone(), c.gincr);
            Workload {
                step: Box::new(move |ctx| ctx.send1(g, black_box(&o)).map(drop)),
                check: Box::new(count(1)),
            }
        }
        "incrBy" | "incrBy2" | "incrBy3" | "incrBy4" | "incrBy5" => {
            let n = name[6..].parse::<usize>().unwrap_or(1);
            let g = c.gincr_by[n - 1];
            let args = vec![Value::Int(1); n];
            let o = [counter.clone()];
            Workload {
                step: Box::new(move |ctx| ctx.send(g, black_box(&o), &args).map(drop)),
                check: Box::new(count(n as i64)),
            }
        }
        "addTo" | "addTo2" | "addTo3" | "addTo4" => {
            let n = name[5..].parse::<usize>().unwrap_or(1);
            let g = c.gadd_to[n - 1];
            let mut rs = vec![counter.clone()];
            for _ in 0..n {
                rs.push(c.new_counter(ctx, 1)?);
            }
            Workload {
                step: Box::new(move |ctx| ctx.send(g, black_box(&rs), &[]).map(drop)),
                check: Box::new(count(n as i64)),
            }
        }
        "forward_incr" => {
            let proxy = lib.proxies.wrap(ctx, lib.proxies.proxy.class, &counter)?;
            let g = c.gincr;
            Workload {
                step: Box::new(move |ctx| ctx.send1(g, black_box(&proxy)).map(drop)),
                check: Box::new(count(1)),
            }
        }
        "next_method_incr" => {
            let milli = c.new_milli(ctx, 0, 0)?;
            let g = c.gincr_by[0];
            let o = [milli.clone()];
            let args = [Value::Int(999)];
            Workload {
                step: Box::new(move |ctx| ctx.send(g, black_box(&o), &args).map(drop)),
                check: Box::new(move |n| {
                    let total = n as i64 * 999;
                    expect(c.count(&milli), total / 1000)?;
                    expect(milli.get_int(c.mcnt), total % 1000)
                }),
            }
        }
        "eval_closure" => {
            let fun = ctx.make_functor(c.gincr, std::slice::from_ref(&counter), &[])?;
            Workload {
                step: Box::new(move |ctx| ctx.eval(black_box(&fun), &[]).map(drop)),
                check: Box::new(count(1)),
            }
        }
        other => unreachable!("unlisted workload {other}"),
    };
    Ok(w)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

fn raised(test: &str) -> impl FnOnce(Exception) -> BenchError + '_ {
    move |source| BenchError::Raised {
        test: test.to_string(),
        source,
    }
}

/// Runs the named workloads in `ctx`: warmup, then `reps` rounds in which
/// every workload runs one timed loop (round-robin, so slow drift affects
/// all of them alike), then the correctness checks. Returns nanoseconds per
/// call for each workload and repetition.
fn measure<'a>(
    names: &[&str],
    ctx: &mut Context<'a>,
    lib: &'a CoreLib,
    cfg: &BenchConfig,
) -> Result<Vec<Vec<f64>>, BenchError> {
    let mut loads = Vec::with_capacity(names.len());
    for &name in names {
        let mut w = workload(name, ctx, lib).map_err(raised(name))?;
        for _ in 0..cfg.warmup {
            (w.step)(ctx).map_err(raised(name))?;
        }
        loads.push(w);
    }
    let mut samples = vec![Vec::with_capacity(cfg.reps); names.len()];
    for _ in 0..cfg.reps {
        for ((w, out), &name) in loads.iter_mut().zip(&mut samples).zip(names) {
            let start = Instant::now();
            for _ in 0..cfg.iters {
                (w.step)(ctx).map_err(raised(name))?;
            }
            out.push(start.elapsed().as_nanos() as f64 / cfg.iters as f64);
        }
    }
    let calls = cfg.warmup + cfg.iters * cfg.reps as u64;
    for (w, &name) in loads.iter().zip(names) {
        (w.check)(calls).map_err(|(expected, got)| BenchError::Check {
            test: name.to_string(),
            expected,
            got,
        })?;
    }
    Ok(samples)
}

/// Runs `tests` in one fresh context of `rt` and checks every workload.
pub fn run(rt: &Runtime, lib: &CoreLib, tests: &[&str], cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    cfg.validate()?;
    for t in tests {
        if !TESTS.contains(t) {
            return Err(BenchError::UnknownTest(t.to_string()));
        }
    }
    let mut ctx = rt.context_with(cfg.dispatch);
    ctx.set_contract_level(cfg.contract_level);
    let mut names = vec!["direct_call_baseline"];
    names.extend(tests.iter().filter(|t| **t != "direct_call_baseline"));
    let mut samples = measure(&names, &mut ctx, lib, cfg)?;
    let base = median(&mut samples[0].clone());
    let mut records = Vec::with_capacity(tests.len());
    for &t in tests {
        let i = names.iter().position(|n| *n == t).expect("measured");
        let samples = &mut samples[i];
        let (min, max) = samples
            .iter()
            .fold((f64::INFINITY, 0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let med = median(samples);
        records.push(BenchRecord {
            test: t.to_string(),
            iters: cfg.iters,
            median_ns: med,
            min_ns: min,
            max_ns: max,
            calls_per_sec: 1e9 / med,
            ratio_vs_direct: med / base,
        });
    }
    if cfg.contexts > 1 {
        verify_contexts(rt, lib, tests, cfg)?;
    }
    Ok(BenchReport {
        records,
        cache: ctx.cache_stats(),
    })
}

/// Reruns each workload once in `cfg.contexts` parallel contexts; only
/// the correctness checks matter here.
fn verify_contexts(rt: &Runtime, lib: &CoreLib, tests: &[&str], cfg: &BenchConfig) -> Result<(), BenchError> {
    let light = BenchConfig {
        reps: 1,
        warmup: 0,
        ..cfg.clone()
    };
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.contexts)
            .map(|_| {
                let light = &light;
                s.spawn(move || {
                    let mut ctx = rt.context_with(light.dispatch);
                    ctx.set_contract_level(light.contract_level);
                    measure(tests, &mut ctx, lib, light).map(drop)
                })
            })
            .collect();
        handles
            .into_iter()
            .try_for_each(|h| h.join().expect("benchmark thread panicked"))
    })
}
