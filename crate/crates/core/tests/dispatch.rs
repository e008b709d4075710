mod common;

use common::{random_generic, random_receivers, Tree};
use objrt::bench;
use objrt::dispatch::{hash_slot, CacheKey, RankCache, CHAIN_LENGTH};
use objrt::{DispatchConfig, ExKind, Obj, Runtime, Value};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn hash_is_shifted_sum() {
    assert_eq!(hash_slot(3, &[5], 1023), 8);
    assert_eq!(hash_slot(3, &[5, 7], 1023), 3 + 5 + 14);
    // Rank bits above the identity do not take part.
    assert_eq!(hash_slot(3, &[(2 << 24) | 5], 1023), 8);
}

#[test]
fn hash_is_asymmetric_in_receiver_order() {
    let mut rng = StdRng::seed_from_u64(11);
    let mut collisions = 0;
    for _ in 0..10_000 {
        let a = rng.gen_range(1..1 << 24);
        let b = rng.gen_range(1..1 << 24);
        if a == b {
            continue;
        }
        if hash_slot(17, &[a, b], u32::MAX) == hash_slot(17, &[b, a], u32::MAX) {
            collisions += 1;
        }
    }
    // a + 2b == b + 2a only when a == b (mod 2^32).
    assert_eq!(collisions, 0);
}

#[test]
fn hash_spreads_keys_evenly() {
    let mut rng = StdRng::seed_from_u64(12);
    let mut load = vec![0u32; 1024];
    let n = 100_000;
    for _ in 0..n {
        let sel = rng.gen_range(1..1 << 24);
        let rank = rng.gen_range(1..=5);
        let recv: Vec<u32> = (0..rank).map(|_| rng.gen_range(1..1 << 24)).collect();
        load[hash_slot(sel, &recv, 1023)] += 1;
    }
    let mean = n as f64 / 1024.0;
    let max = *load.iter().max().unwrap() as f64;
    assert!(max <= 3.0 * mean, "max load {max}, mean {mean}");
}

#[test]
fn fourth_colliding_key_evicts_exactly_one() {
    let (rt, lib) = bench::setup();
    let m = rt.methods().of_generic(lib.counters.gincr)[0];
    let mut cache = RankCache::new(1, 8, 8);
    // Same slot under mask 7: receiver ids differing by multiples of 8.
    let keys: Vec<CacheKey> = (0..4).map(|i| [1, 8 * i + 1, 0, 0, 0, 0]).collect();
    let slot = cache.slot_of(&keys[0]);
    assert!(keys.iter().all(|k| cache.slot_of(k) == slot));
    let evictions: Vec<bool> = keys.iter().map(|&k| cache.insert(k, m)).collect();
    assert_eq!(evictions, [false, false, false, true]);
    assert_eq!(cache.max_chain(), CHAIN_LENGTH);
    assert!(cache.lookup(&keys[0]).is_none(), "oldest entry survived");
    assert!(keys[1..].iter().all(|k| cache.lookup(k).is_some()));
}

#[test]
fn cache_grows_until_bound() {
    let (rt, lib) = bench::setup();
    let m = rt.methods().of_generic(lib.counters.gincr)[0];
    let mut cache = RankCache::new(1, 4, 16);
    for i in 0..100 {
        cache.insert([9, i * 7 + 1, 0, 0, 0, 0], m);
        assert!(cache.max_chain() <= CHAIN_LENGTH);
    }
    assert_eq!(cache.slots(), 16);
}

#[test]
fn stats_count_misses_then_hits() {
    let (rt, lib) = bench::setup();
    let mut ctx = rt.context();
    let c = lib.counters.new_counter(&mut ctx, 41).unwrap();
    let before = ctx.cache_stats();
    lib.counters.incr(&mut ctx, &c).unwrap();
    let first = ctx.cache_stats();
    assert_eq!(first.misses, before.misses + 1);
    lib.counters.incr(&mut ctx, &c).unwrap();
    let second = ctx.cache_stats();
    assert_eq!(second.hits, first.hits + 1);
    assert_eq!(second.misses, first.misses);
    assert_eq!(lib.counters.count(&c).unwrap(), 43);
}

#[test]
fn multimethod_returns_first_receiver() {
    let (rt, lib) = bench::setup();
    let mut ctx = rt.context();
    let a = lib.counters.new_counter(&mut ctx, 1).unwrap();
    let b = lib.counters.new_counter(&mut ctx, 2).unwrap();
    let r = ctx.send_obj(lib.counters.gadd_to[0], &[a.clone(), b], &[]).unwrap();
    assert!(r.ptr_eq(&a));
    assert_eq!(lib.counters.count(&a).unwrap(), 3);
}

#[test]
fn unknown_message_raises_bad_message() {
    let mut rt = Runtime::new();
    let lib = objrt::corelib::install(&mut rt).unwrap();
    let object = rt.kernel().object.class;
    let gprint = rt.define_generic("gprint", 1, &[], None).unwrap();
    rt.seal();
    let mut ctx = rt.context();
    let c = lib.counters.new_counter(&mut ctx, 0).unwrap();
    let e = ctx.send1(gprint, &c).unwrap_err();
    assert_eq!(e.builtin_kind(), Some(ExKind::BadMessage));
    assert_eq!(ctx.cache_stats().substitutions, 1);
    assert!(!rt.understands(&[lib.counters.counter.class], gprint));
    assert!(rt.understands(&[lib.counters.counter.class], lib.counters.gincr));
    assert!(ctx
        .understands_message(&[object], gprint)
        .ptr_eq(&rt.false_obj()));

    // Through a proxy the delegate does not understand it either.
    let p = lib.proxies.wrap(&mut ctx, lib.proxies.proxy.class, &c).unwrap();
    let e = ctx.send1(gprint, &p).unwrap_err();
    assert_eq!(e.builtin_kind(), Some(ExKind::BadMessage));
}

#[test]
fn wrong_receiver_count_is_bad_arity() {
    let (rt, lib) = bench::setup();
    let mut ctx = rt.context();
    let c = lib.counters.new_counter(&mut ctx, 0).unwrap();
    let e = ctx.send(lib.counters.gincr, &[c.clone(), c.clone()], &[]).unwrap_err();
    assert_eq!(e.builtin_kind(), Some(ExKind::BadArity));
    let e = ctx.send(lib.counters.gincr_by[0], std::slice::from_ref(&c), &[]).unwrap_err();
    assert_eq!(e.builtin_kind(), Some(ExKind::BadArity));
}

#[test]
fn deallocated_receiver_is_rejected() {
    let (rt, lib) = bench::setup();
    let mut ctx = rt.context();
    let c = lib.counters.new_counter(&mut ctx, 0).unwrap();
    ctx.release(&c).unwrap();
    let e = lib.counters.incr(&mut ctx, &c).unwrap_err();
    assert_eq!(e.builtin_kind(), Some(ExKind::BadValue));
}

#[test]
fn fast_rank_only_changes_counters() {
    let (rt, lib) = bench::setup();
    let mut fast = rt.context();
    let mut framed = rt.context_with(DispatchConfig {
        fast_message_rank: 0,
        ..DispatchConfig::default()
    });
    for ctx in [&mut fast, &mut framed] {
        let c = lib.counters.new_counter(ctx, 0).unwrap();
        for _ in 0..10 {
            lib.counters.incr(ctx, &c).unwrap();
        }
        assert_eq!(lib.counters.count(&c).unwrap(), 10);
    }
    assert!(fast.cache_stats().fast_sends > 0);
    assert_eq!(framed.cache_stats().fast_sends, 0);
    assert!(framed.cache_stats().framed_sends > fast.cache_stats().framed_sends);
}

#[test]
fn forwarded_returns_match_direct_returns() {
    let (rt, lib) = bench::setup();
    let mut ctx = rt.context();
    let cs = &lib.counters;
    let mut rng = StdRng::seed_from_u64(21);
    for case in 0..200 {
        let rank = rng.gen_range(2..=5);
        let g = cs.gadd_to[rank - 2];
        let values: Vec<i64> = (0..rank).map(|_| rng.gen_range(0..100)).collect();
        let direct: Vec<Obj> = values.iter().map(|&v| cs.new_counter(&mut ctx, v).unwrap()).collect();
        let inner: Vec<Obj> = values.iter().map(|&v| cs.new_counter(&mut ctx, v).unwrap()).collect();
        let pos = rng.gen_range(0..rank);
        let class = if rng.gen_bool(0.5) {
            lib.proxies.proxy.class
        } else {
            lib.proxies.tracer.class
        };
        let proxy = lib.proxies.wrap(&mut ctx, class, &inner[pos]).unwrap();
        let mut via = inner.clone();
        via[pos] = proxy.clone();

        let d = ctx.send_obj(g, &direct, &[]).unwrap();
        let f = ctx.send_obj(g, &via, &[]).unwrap();
        assert!(d.ptr_eq(&direct[0]));
        // The proxy stands in for its delegate in the answer.
        assert!(f.ptr_eq(&via[0]), "case {case}: forwarded answer is not the first receiver");
        assert_eq!(cs.count(&direct[0]).unwrap(), cs.count(&inner[0]).unwrap(), "case {case}");
    }
}

#[test]
fn forward_hint_follows_the_delegate_class() {
    let (rt, lib) = bench::setup();
    let mut ctx = rt.context();
    let cs = &lib.counters;
    let plain = cs.new_counter(&mut ctx, 0).unwrap();
    let milli = cs.new_milli(&mut ctx, 0, 0).unwrap();
    let p1 = lib.proxies.wrap(&mut ctx, lib.proxies.proxy.class, &plain).unwrap();
    let p2 = lib.proxies.wrap(&mut ctx, lib.proxies.proxy.class, &milli).unwrap();
    for _ in 0..4 {
        cs.incr_by(&mut ctx, &p1, 600).unwrap();
        cs.incr_by(&mut ctx, &p2, 600).unwrap();
        cs.incr(&mut ctx, &p1).unwrap();
        cs.incr(&mut ctx, &p2).unwrap();
    }
    assert_eq!(cs.count(&plain).unwrap(), 4 * 601);
    // 2400 thousandths carry twice, plus four plain increments.
    assert_eq!(cs.count(&milli).unwrap(), 2 + 4);
    assert_eq!(milli.get_int(cs.mcnt).unwrap(), 400);
    ctx.invalidate_caches();
    cs.incr(&mut ctx, &p2).unwrap();
    assert_eq!(cs.count(&milli).unwrap(), 7);
}

#[test]
fn repeated_delegation_hits_the_cache() {
    let (rt, lib) = bench::setup();
    let mut ctx = rt.context();
    let c = lib.counters.new_counter(&mut ctx, 0).unwrap();
    let p = lib.proxies.wrap(&mut ctx, lib.proxies.proxy.class, &c).unwrap();
    lib.counters.incr(&mut ctx, &p).unwrap();
    let s1 = ctx.cache_stats();
    assert_eq!(s1.substitutions, 1);
    for _ in 0..100 {
        lib.counters.incr(&mut ctx, &p).unwrap();
    }
    let s2 = ctx.cache_stats();
    assert_eq!(s2.substitutions, 1);
    assert_eq!(s2.misses, s1.misses);
    assert_eq!(lib.counters.count(&c).unwrap(), 101);
}

fn check_equivalence(seed: u64, config: DispatchConfig) -> Result<(), TestCaseError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let tree = Tree::random(&mut rng, 20, 6);
    let mut rt = Runtime::new();
    let ids = tree.define(&mut rt, "K");
    let gens: Vec<_> = (1..=3)
        .map(|r| random_generic(&mut rng, &mut rt, &tree, &ids, &format!("g{r}"), r, 8))
        .collect();
    rt.seal();
    let object = rt.kernel().object.class;
    let mut on = rt.context_with(config);
    let mut off = rt.context_with(config);
    off.set_cache_enabled(false);
    let objs: Vec<Obj> = ids.iter().map(|&c| on.gnew(c).unwrap()).collect();
    let root = on.gnew(object).unwrap();
    for _ in 0..300 {
        let g = &gens[rng.gen_range(0..gens.len())];
        let recv = random_receivers(&mut rng, &tree, g.rank);
        let receivers: Vec<Obj> = recv.iter().map(|r| r.map_or(root.clone(), |i| objs[i].clone())).collect();
        let a = on.send(g.id, &receivers, &[]).map_err(|e| e.builtin_kind());
        let b = off.send(g.id, &receivers, &[]).map_err(|e| e.builtin_kind());
        prop_assert_eq!(a.as_ref().ok().and_then(Value::as_int), b.as_ref().ok().and_then(Value::as_int));
        prop_assert_eq!(a.err(), b.err());
        for rank in 1..=3 {
            prop_assert!(on.cache(rank).max_chain() <= CHAIN_LENGTH);
        }
    }
    prop_assert_eq!(off.cache_stats().hits, 0);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn caching_is_transparent(seed in any::<u64>()) {
        check_equivalence(seed, DispatchConfig::default())?;
    }

    #[test]
    fn tiny_caches_stay_transparent_and_bounded(seed in any::<u64>(), slots in 1usize..8) {
        check_equivalence(seed, DispatchConfig { initial_slots: slots, cache_slot_bound: slots, ..DispatchConfig::default() })?;
    }
}
