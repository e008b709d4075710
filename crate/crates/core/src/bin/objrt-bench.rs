//! Message dispatch benchmarks.

use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use objrt::bench::{self, BenchConfig};
use objrt::{ContractLevel, DispatchConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Table,
    Records,
}

#[derive(Parser, Debug)]
#[command(name = "objrt-bench", version, about = "Message dispatch benchmarks")]
struct Args {
    /// Workload name, or `all`.
    #[arg(long, default_value = "all")]
    test: String,
    /// Calls per timed repetition.
    #[arg(long, default_value_t = 1_000_000)]
    iters: u64,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 10_000)]
    warmup: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Highest rank sent without frame bookkeeping (0 disables).
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u8).range(0..=5))]
    fast_message_rank: u8,
    /// none, pre, post or all.
    #[arg(long, default_value = "pre")]
    contract_level: ContractLevel,
    /// Maximum slots per rank cache.
    #[arg(long, default_value_t = 65_536)]
    cache_bound: usize,
    /// Rerun every workload in this many contexts to confirm correctness.
    #[arg(long, default_value_t = 1)]
    contexts: usize,
    /// List workload names and exit.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for t in bench::TESTS {
            println!("{t}");
        }
        return ExitCode::SUCCESS;
    }
    let tests = match bench::select(&args.test) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("objrt-bench: {e}");
            return ExitCode::from(2);
        }
    };
    let defaults = DispatchConfig::default();
    let cfg = BenchConfig {
        iters: args.iters,
        reps: args.reps,
        warmup: args.warmup,
        contract_level: args.contract_level,
        dispatch: DispatchConfig {
            fast_message_rank: args.fast_message_rank as usize,
            initial_slots: defaults.initial_slots.min(args.cache_bound.max(1)),
            cache_slot_bound: args.cache_bound,
        },
        contexts: args.contexts,
    };
    let (rt, lib) = bench::setup();
    match bench::run(&rt, &lib, &tests, &cfg) {
        Ok(report) => {
            match args.format {
                Format::Table => print!("{}", report.to_table()),
                Format::Records => print!("{}", report.to_records()),
            }
            ExitCode::SUCCESS
        }
        Err(e @ (bench::BenchError::Config(_) | bench::BenchError::UnknownTest(_))) => {
            eprintln!("objrt-bench: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("objrt-bench: correctness check failed: {e}");
            ExitCode::FAILURE
        }
    }
}
