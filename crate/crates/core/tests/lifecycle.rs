use objrt::corelib::gc::install_collector;
use objrt::value::LifeState;
use objrt::{ClassId, ExKind, Obj, Rc, Runtime, SlotIndex, TypeTag, Value};
use proptest::prelude::*;
use std::sync::{Arc, Mutex};

struct Fixture {
    rt: Runtime,
    parent: ClassId,
    child: ClassId,
    v: SlotIndex,
    log: Arc<Mutex<Vec<&'static str>>>,
}

fn fixture(collect: bool) -> Fixture {
    let mut rt = Runtime::new();
    let k = rt.kernel().clone();
    let parent = rt.define_class("Parent", Some(k.object.class), &[("v", TypeTag::Int)]).unwrap().class;
    let child = rt.define_class("Child", Some(parent), &[("w", TypeTag::Int)]).unwrap().class;
    let v = rt.slot(parent, "v").unwrap();
    let log: Arc<Mutex<Vec<&'static str>>> = Arc::default();
    for (c, tag) in [(parent, "parent"), (child, "child")] {
        let l = log.clone();
        rt.method(k.gdeinit, &[c])
            .define(move |ctx, f| {
                l.lock().unwrap().push(tag);
                ctx.next_method(f)
            })
            .unwrap();
    }
    if collect {
        install_collector(&mut rt).unwrap();
    }
    rt.seal();
    Fixture { rt, parent, child, v, log }
}

fn state(o: &Obj) -> LifeState {
    o.as_instance().unwrap().state()
}

#[test]
fn deinit_runs_most_specific_first() {
    let fx = fixture(false);
    let mut ctx = fx.rt.context();
    let o = ctx.gnew(fx.child).unwrap();
    ctx.retain(&o).unwrap();
    ctx.release(&o).unwrap();
    assert!(fx.log.lock().unwrap().is_empty());
    ctx.release(&o).unwrap();
    assert_eq!(*fx.log.lock().unwrap(), ["child", "parent"]);
    assert_eq!(state(&o), LifeState::Deallocated);
    assert_eq!(fx.rt.heap_stats().live(), 0);
    let err = ctx.send1(fx.rt.kernel().gretain, &o).unwrap_err();
    assert_eq!(err.builtin_kind(), Some(ExKind::BadValue));
}

#[test]
fn delete_ignores_the_count() {
    let fx = fixture(false);
    let mut ctx = fx.rt.context();
    let o = ctx.gnew(fx.parent).unwrap();
    ctx.retain(&o).unwrap();
    ctx.delete(&o).unwrap();
    assert_eq!(state(&o), LifeState::Deallocated);
    assert_eq!(*fx.log.lock().unwrap(), ["parent"]);
}

#[test]
fn pool_objects_drain_on_delete() {
    let fx = fixture(false);
    let k = fx.rt.kernel().clone();
    let mut ctx = fx.rt.context();
    let outer = ctx.gnew(fx.parent).unwrap();
    ctx.auto_release(&outer).unwrap();
    let pool = ctx.gnew(k.auto_release.class).unwrap();
    assert_eq!(ctx.pool_depth(), 2);
    let a = ctx.gnew(fx.parent).unwrap();
    let b = ctx.gnew(fx.child).unwrap();
    ctx.auto_release(&a).unwrap();
    ctx.auto_release(&b).unwrap();
    ctx.retain(&a).unwrap();
    assert_eq!(ctx.pending_releases(), 2);
    ctx.delete(&pool).unwrap();
    assert_eq!(ctx.pool_depth(), 1);
    assert_eq!(ctx.pending_releases(), 1);
    // Newest first: b (child, parent), then a survives with one reference.
    assert_eq!(*fx.log.lock().unwrap(), ["child", "parent"]);
    assert_eq!(state(&b), LifeState::Deallocated);
    assert_eq!(a.rc(), Rc::Counted(1));
    assert_eq!(state(&outer), LifeState::Live);
    ctx.release(&a).unwrap();
    ctx.drain_top().unwrap();
    assert_eq!(state(&outer), LifeState::Deallocated);
    assert_eq!(state(&pool), LifeState::Deallocated);
    assert_eq!(fx.rt.heap_stats().live(), 0);
}

#[test]
fn deleting_an_outer_pool_drains_inner_ones() {
    let fx = fixture(false);
    let k = fx.rt.kernel().clone();
    let mut ctx = fx.rt.context();
    let p1 = ctx.gnew(k.auto_release.class).unwrap();
    let x = ctx.gnew(fx.parent).unwrap();
    ctx.auto_release(&x).unwrap();
    let _p2 = ctx.gnew(k.auto_release.class).unwrap();
    let y = ctx.gnew(fx.parent).unwrap();
    ctx.auto_release(&y).unwrap();
    assert_eq!(ctx.pool_depth(), 3);
    ctx.delete(&p1).unwrap();
    assert_eq!(ctx.pool_depth(), 1);
    assert_eq!(state(&x), LifeState::Deallocated);
    assert_eq!(state(&y), LifeState::Deallocated);
}

#[test]
fn automatic_objects_expire_with_their_scope() {
    let fx = fixture(false);
    let mut ctx = fx.rt.context();
    let (auto, kept) = ctx
        .with_scope(|ctx, scope| {
            let a = ctx.make_automatic(scope, fx.parent, &[(fx.v, Value::Int(7))])?;
            assert_eq!(a.rc(), Rc::Auto);
            let kept = ctx.retain(&a)?;
            assert!(!kept.ptr_eq(&a));
            assert_eq!(kept.rc(), Rc::Counted(1));
            assert_eq!(kept.get_int(fx.v)?, 7);
            Ok((a, kept))
        })
        .unwrap();
    assert_eq!(state(&auto), LifeState::Expired);
    let err = ctx.send1(fx.rt.kernel().gretain, &auto).unwrap_err();
    assert!(err.message().unwrap().contains("scope"));
    assert_eq!(kept.get_int(fx.v).unwrap(), 7);
    ctx.release(&kept).unwrap();
    // Automatic objects are never deinitialized.
    assert_eq!(*fx.log.lock().unwrap(), ["parent"]);
    let outer = ctx.open_scope();
    let inner = ctx.open_scope();
    assert!(ctx.close_scope(outer).is_err());
    ctx.close_scope(inner).unwrap();
    ctx.close_scope(outer).unwrap();
    assert!(ctx.make_automatic(outer, fx.parent, &[]).is_err());
}

#[test]
fn clone_and_new_with_copy_attributes() {
    let fx = fixture(false);
    let mut ctx = fx.rt.context();
    let a = ctx.gnew(fx.parent).unwrap();
    a.set(fx.v, Value::Int(11)).unwrap();
    let b = ctx.gclone(&a).unwrap();
    let c = ctx.gnew_with(fx.parent, &a).unwrap();
    assert_eq!(b.get_int(fx.v).unwrap(), 11);
    assert_eq!(c.get_int(fx.v).unwrap(), 11);
    let other = ctx.gnew(fx.child).unwrap();
    let err = ctx.gnew_with(fx.parent, &other).unwrap_err();
    assert_eq!(err.builtin_kind(), Some(ExKind::BadType));
}

#[test]
fn collector_reclaims_at_pool_deletion() {
    let fx = fixture(true);
    let k = fx.rt.kernel().clone();
    let mut ctx = fx.rt.context();
    let before = fx.rt.heap_stats().live();
    let pool = ctx.gnew(k.auto_release.class).unwrap();
    let objs: Vec<Obj> = (0..100).map(|_| ctx.gnew(fx.parent).unwrap()).collect();
    let keep = ctx.gnew(fx.parent).unwrap();
    ctx.retain(&keep).unwrap();
    // Explicit deletes are ignored under the collector.
    ctx.delete(&objs[0]).unwrap();
    assert_eq!(state(&objs[0]), LifeState::Live);
    ctx.delete(&pool).unwrap();
    assert!(objs.iter().all(|o| state(o) == LifeState::Deallocated));
    assert_eq!(state(&keep), LifeState::Live);
    ctx.release(&keep).unwrap();
    assert_eq!(fx.rt.heap_stats().live(), before);
}

#[test]
fn auto_delete_under_collector_clones_automatic_objects() {
    let fx = fixture(true);
    let k = fx.rt.kernel().clone();
    let mut ctx = fx.rt.context();
    let pool = ctx.gnew(k.auto_release.class).unwrap();
    let token = ctx.open_scope();
    let a = ctx.make_automatic(token, fx.parent, &[(fx.v, Value::Int(3))]).unwrap();
    let d = ctx.auto_delete(&a).unwrap();
    assert!(!d.ptr_eq(&a));
    assert_eq!(d.get_int(fx.v).unwrap(), 3);
    ctx.close_scope(token).unwrap();
    assert_eq!(state(&d), LifeState::Live);
    ctx.delete(&pool).unwrap();
    assert_eq!(state(&d), LifeState::Deallocated);
}

#[derive(Debug, Clone)]
enum Op {
    New,
    Retain(usize),
    Release(usize),
    Auto(usize),
    Push,
    Pop,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        2 => Just(Op::New),
        3 => any::<usize>().prop_map(Op::Retain),
        3 => any::<usize>().prop_map(Op::Release),
        2 => any::<usize>().prop_map(Op::Auto),
        1 => Just(Op::Push),
        1 => Just(Op::Pop),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_follow_the_model(ops in proptest::collection::vec(op(), 1..200)) {
        let fx = fixture(false);
        let k = fx.rt.kernel().clone();
        let mut ctx = fx.rt.context();
        let mut objs: Vec<Obj> = Vec::new();
        let mut rc: Vec<u32> = Vec::new();
        let mut pools: Vec<(Option<Obj>, Vec<usize>)> = vec![(None, Vec::new())];
        let live = |rc: &[u32]| rc.iter().filter(|&&n| n > 0).count();
        fn pick(rc: &[u32], i: usize) -> Option<usize> {
            let alive: Vec<usize> = (0..rc.len()).filter(|&j| rc[j] > 0).collect();
            (!alive.is_empty()).then(|| alive[i % alive.len()])
        }
        for op in ops {
            match op {
                Op::New => {
                    objs.push(ctx.gnew(fx.parent).unwrap());
                    rc.push(1);
                }
                Op::Retain(i) => if let Some(j) = pick(&rc, i) {
                    ctx.retain(&objs[j]).unwrap();
                    rc[j] += 1;
                },
                Op::Release(i) => if let Some(j) = pick(&rc, i) {
                    ctx.release(&objs[j]).unwrap();
                    rc[j] -= 1;
                },
                Op::Auto(i) => if let Some(j) = pick(&rc, i) {
                    ctx.auto_release(&objs[j]).unwrap();
                    pools.last_mut().unwrap().1.push(j);
                },
                Op::Push => {
                    let p = ctx.gnew(k.auto_release.class).unwrap();
                    pools.push((Some(p), Vec::new()));
                }
                Op::Pop => if pools.len() > 1 {
                    let (p, entries) = pools.pop().unwrap();
                    ctx.delete(&p.unwrap()).unwrap();
                    for j in entries.into_iter().rev() {
                        if rc[j] > 0 {
                            rc[j] -= 1;
                        }
                    }
                },
            }
            prop_assert_eq!(ctx.pool_depth(), pools.len());
            for (o, &n) in objs.iter().zip(&rc) {
                if n == 0 {
                    prop_assert_eq!(state(o), LifeState::Deallocated);
                } else {
                    prop_assert_eq!(o.rc(), Rc::Counted(n));
                }
            }
            let pool_objects = pools.len() as u64 - 1;
            prop_assert_eq!(fx.rt.heap_stats().live(), live(&rc) as u64 + pool_objects);
        }
    }
}
