//! Delegation through the unrecognized-message generics: `Proxy` forwards
//! anything it does not understand to its delegate, `Tracer` logs before
//! forwarding and `Locker` records a sorted lock/unlock pattern around it.

use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;

use crate::dispatch::Context;
use crate::error::DefineError;
use crate::exceptions::Exception;
use crate::id::ClassId;
use crate::object_model::ClassTriple;
use crate::runtime::Runtime;
use crate::value::{Obj, SlotIndex, TypeTag, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub selector: String,
    /// Receiver class names, with traced proxies replaced by their delegate.
    pub receivers: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockEvent {
    Lock(i64),
    Unlock(i64),
}

#[derive(Clone)]
pub struct Proxies {
    pub proxy: ClassTriple,
    pub tracer: ClassTriple,
    pub locker: ClassTriple,
    pub obj_slot: SlotIndex,
    pub lock_slot: SlotIndex,
    pub trace: Arc<Mutex<Vec<TraceEntry>>>,
    pub locks: Arc<Mutex<Vec<LockEvent>>>,
}

/// Returns the proxy instead of the delegate when the forwarded message
/// answered the delegate itself.
fn name_of(ctx: &Context<'_>, o: &Obj) -> String {
    match o.as_class() {
        Some(c) => ctx.runtime().registry().get(c.class).name.clone(),
        None => ctx.runtime().registry().get(o.class_id()).name.clone(),
    }
}

impl Proxies {
    pub(crate) fn install(rt: &mut Runtime) -> Result<Self, DefineError> {
        let k = rt.kernel().clone();
        let object = k.object.class;
        let proxy = rt.define_class("Proxy", Some(object), &[("obj", TypeTag::Link)])?;
        let tracer = rt.define_class("Tracer", Some(proxy.class), &[])?;
        let locker = rt.define_class("Locker", Some(proxy.class), &[("lock", TypeTag::Int)])?;
        let p = Proxies {
            proxy,
            tracer,
            locker,
            obj_slot: rt.slot(proxy.class, "obj")?,
            lock_slot: rt.slot(locker.class, "lock")?,
            trace: Arc::default(),
            locks: Arc::default(),
        };
        let slot = p.obj_slot;

        let gretain = k.gretain;
        rt.method(k.ginit_with, &[proxy.class, object]).define(move |ctx, f| {
            let d = ctx.send_obj(gretain, &[f.recv(1).clone()], &[])?;
            f.this().set(slot, Value::Obj(d))?;
            let this = f.this().clone();
            f.set_ret(this);
            Ok(())
        })?;
        rt.method(k.ginit_with, &[proxy.class, proxy.class]).define(move |ctx, f| {
            let d = f.recv(1).get_obj(slot)?;
            let d = ctx.send_obj(gretain, &[d], &[])?;
            f.this().set(slot, Value::Obj(d))?;
            let this = f.this().clone();
            f.set_ret(this);
            Ok(())
        })?;
        let grelease = k.grelease;
        rt.method(k.gdeinit, &[proxy.class]).define(move |ctx, f| {
            if let Ok(d) = f.this().link(slot) {
                if d.class_word() != 0 {
                    ctx.send1(grelease, d)?;
                }
            }
            ctx.next_method(f)
        })?;

        for rank in 1..=5 {
            for pos in 0..rank {
                let mut specs = vec![object; rank];
                specs[pos] = proxy.class;
                rt.method(k.gum[rank - 1], &specs).forward_to(pos, slot)?;
            }
        }

        for rank in 1..=5 {
            for pos in 0..rank {
                let mut specs = vec![object; rank];
                specs[pos] = tracer.class;
                let log = p.trace.clone();
                rt.method(k.gum[rank - 1], &specs).define(move |ctx, f| {
                    let receivers = f
                        .receivers()
                        .iter()
                        .enumerate()
                        .map(|(i, r)| {
                            let shown = if i == pos { r.link(slot).unwrap_or(r) } else { r };
                            name_of(ctx, shown)
                        })
                        .collect();
                    let selector = ctx.runtime().generic(f.sel()).name.clone();
                    log.lock().push(TraceEntry { selector, receivers });
                    ctx.next_method(f)
                })?;
            }
        }

        let counter = Arc::new(AtomicI64::new(1));
        let lock_slot = p.lock_slot;
        rt.method(k.ginit_with, &[locker.class, object]).define(move |ctx, f| {
            ctx.next_method(f)?;
            f.this().set_int(lock_slot, counter.fetch_add(1, Ordering::Relaxed))
        })?;
        let log = p.locks.clone();
        rt.method(k.gum[0], &[locker.class]).define(move |ctx, f| {
            let id = f.this().get_int(lock_slot)?;
            log.lock().push(LockEvent::Lock(id));
            let out = ctx.next_method(f);
            log.lock().push(LockEvent::Unlock(id));
            out
        })?;
        let log = p.locks.clone();
        rt.method(k.gum[1], &[locker.class, locker.class]).define(move |ctx, f| {
            let mut ids = [f.recv(0).get_int(lock_slot)?, f.recv(1).get_int(lock_slot)?];
            ids.sort_unstable();
            log.lock().extend(ids.iter().map(|&i| LockEvent::Lock(i)));
            let out = ctx.next_method(f);
            log.lock().extend(ids.iter().rev().map(|&i| LockEvent::Unlock(i)));
            out
        })?;
        Ok(p)
    }

    /// `gnewWith(class, delegate)` for `Proxy`, `Tracer` or `Locker`.
    pub fn wrap(&self, ctx: &mut Context<'_>, class: ClassId, delegate: &Obj) -> Result<Obj, Exception> {
        ctx.gnew_with(class, delegate)
    }

    pub fn delegate<'a>(&self, proxy: &'a Obj) -> Result<&'a Obj, Exception> {
        proxy.link(self.obj_slot)
    }
}
