use objrt::exceptions::{ExKind, Exception, Payload, Protected};
use objrt::{origin, Runtime, Value};
use std::cell::RefCell;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

fn sealed() -> Runtime {
    let mut rt = Runtime::new();
    rt.seal();
    rt
}

fn bad(kind: ExKind, msg: &str) -> Exception {
    Exception::builtin(kind, msg).at(origin!())
}

#[test]
fn predefined_classes_derive_from_exception() {
    let rt = Runtime::new();
    let k = rt.kernel();
    for kind in ExKind::ALL {
        let c = k.ex(kind);
        assert!(rt.registry().is_kind_of(c, k.exception.class));
        assert_eq!(rt.registry().get(c).name, kind.class_name());
    }
}

#[test]
fn first_matching_handler_wins() {
    let rt = sealed();
    let k = rt.kernel().clone();
    let mut ctx = rt.context();
    let hit = RefCell::new(Vec::new());
    Protected::new(|_| Err(bad(ExKind::BadRange, "r")))
        .catch(k.ex(ExKind::BadValue), |_, _| {
            hit.borrow_mut().push("value");
            Ok(())
        })
        .catch(k.exception.class, |_, _| {
            hit.borrow_mut().push("exception");
            Ok(())
        })
        .catch(k.ex(ExKind::BadRange), |_, _| {
            hit.borrow_mut().push("range");
            Ok(())
        })
        .catch_any(|_, _| {
            hit.borrow_mut().push("any");
            Ok(())
        })
        .run(&mut ctx)
        .unwrap();
    assert_eq!(*hit.borrow(), ["exception"]);
}

#[test]
fn unmatched_exceptions_propagate_after_finally() {
    let rt = sealed();
    let k = rt.kernel().clone();
    let mut ctx = rt.context();
    let log = RefCell::new(Vec::new());
    let err = Protected::new(|ctx| {
        Protected::new(|_| Err(bad(ExKind::BadType, "inner")))
            .catch(k.ex(ExKind::BadSize), |_, _| Ok(()))
            .finally(|_| {
                log.borrow_mut().push("inner finally");
                Ok(())
            })
            .run(ctx)
    })
    .finally(|_| {
        log.borrow_mut().push("outer finally");
        Ok(())
    })
    .run(&mut ctx)
    .unwrap_err();
    assert_eq!(err.builtin_kind(), Some(ExKind::BadType));
    assert_eq!(err.message(), Some("inner"));
    assert!(err.origin().unwrap().file.ends_with("exceptions.rs"));
    assert_eq!(*log.borrow(), ["inner finally", "outer finally"]);
}

#[test]
fn handlers_rethrow_by_returning_err() {
    let rt = sealed();
    let k = rt.kernel().clone();
    let mut ctx = rt.context();
    let outer = RefCell::new(None);
    Protected::new(|ctx| {
        Protected::new(|_| Err(bad(ExKind::NotFound, "missing")))
            .catch(k.ex(ExKind::NotFound), |_, ex| Err(ex))
            .run(ctx)
    })
    .catch(k.exception.class, |_, ex| {
        *outer.borrow_mut() = ex.message().map(str::to_owned);
        Ok(())
    })
    .run(&mut ctx)
    .unwrap();
    assert_eq!(outer.borrow().as_deref(), Some("missing"));
}

#[test]
fn finally_exception_replaces_pending_one() {
    let rt = sealed();
    let mut ctx = rt.context();
    let err = Protected::new(|_| Err(bad(ExKind::BadValue, "first")))
        .finally(|_| Err(bad(ExKind::BadFormat, "second")))
        .run(&mut ctx)
        .unwrap_err();
    assert_eq!(err.builtin_kind(), Some(ExKind::BadFormat));
    let err = Protected::new(|_| Ok(()))
        .finally(|_| Err(bad(ExKind::BadFormat, "late")))
        .run(&mut ctx)
        .unwrap_err();
    assert_eq!(err.message(), Some("late"));
}

#[test]
fn user_classes_and_objects_can_be_thrown() {
    let mut rt = Runtime::new();
    let k = rt.kernel().clone();
    let mine = rt.define_class("ExMine", Some(k.exception.class), &[]).unwrap();
    let other = rt.define_class("Token", Some(k.object.class), &[]).unwrap();
    rt.seal();
    let mut ctx = rt.context();
    let token = ctx.gnew(other.class).unwrap();
    let caught = RefCell::new(None);
    Protected::new(|_| Err(Exception::object(token.clone())))
        .catch(k.exception.class, |_, _| panic!("not an exception subclass"))
        .catch(other.class, |_, ex| {
            *caught.borrow_mut() = Some(ex);
            Ok(())
        })
        .run(&mut ctx)
        .unwrap();
    match caught.into_inner().unwrap().payload() {
        Payload::Object(o) => assert!(o.ptr_eq(&token)),
        Payload::Builtin(_) => panic!("expected object payload"),
    }
    // A thrown class-object is caught through its metaclass.
    let co = rt.class_object(mine.class);
    let err = Protected::new(|_| Err(Exception::object(co.clone())))
        .catch(mine.class, |_, _| panic!("class-object is not an instance"))
        .run(&mut ctx)
        .unwrap_err();
    assert!(err.is_kind_of(&rt, mine.meta));
}

#[test]
fn builtin_payload_materializes_with_message() {
    let rt = sealed();
    let k = rt.kernel().clone();
    let mut ctx = rt.context();
    let mut ex = bad(ExKind::BadCast, "no cast");
    let obj = ex.payload_object(&mut ctx);
    assert_eq!(obj.class_id(), k.ex(ExKind::BadCast));
    assert_eq!(obj.get(k.ex_str_slot).unwrap(), Value::Str("no cast".into()));
    assert!(ex.builtin_kind().is_none());
    assert!(ex.payload_object(&mut ctx).ptr_eq(&obj));
}

#[test]
fn refused_allocation_throws_bad_alloc_class_object() {
    let mut rt = Runtime::new();
    let k = rt.kernel().clone();
    let thing = rt.define_class("Thing", Some(k.object.class), &[]).unwrap();
    let refuse = Arc::new(AtomicBool::new(false));
    let r = refuse.clone();
    rt.set_alloc_hook(Arc::new(move |_| !r.load(Ordering::Relaxed)));
    rt.seal();
    let mut ctx = rt.context();
    assert!(ctx.gnew(thing.class).is_ok());
    refuse.store(true, Ordering::Relaxed);
    let err = ctx.gnew(thing.class).unwrap_err();
    assert!(err.is_kind_of(&rt, k.ex_triple(ExKind::BadAlloc).meta));
    assert!(!err.is_kind_of(&rt, k.ex(ExKind::BadAlloc)));
}

#[test]
fn toplevel_terminates_on_uncaught() {
    let rt = sealed();
    let mut ctx = rt.context();
    assert_eq!(ctx.toplevel(|_| Ok(3)).unwrap(), 3);
    assert!(!ctx.is_terminated());
    let err = ctx
        .toplevel(|_| -> Result<(), _> { Err(bad(ExKind::NotSupported, "boom")) })
        .unwrap_err();
    assert!(err.diagnostic.contains("ExNotSupported"));
    assert!(err.diagnostic.contains("boom"));
    assert!(ctx.is_terminated());
    assert!(ctx.toplevel(|_| Ok(())).is_err());
}
