//! Creation, destruction and ownership: reference counting, autorelease
//! pools, automatic (scope-bound) objects and class initialization.

use std::sync::atomic::Ordering;

use crate::dispatch::Context;
use crate::error::DefineError;
use crate::exceptions::{ExKind, Exception};
use crate::id::ClassId;
use crate::runtime::Runtime;
use crate::value::{LifeState, Obj, Rc, SlotIndex, Value, RC_AUTO};

/// Deferred releases, drained in reverse insertion order.
#[derive(Debug, Default)]
pub struct Pool {
    pub(crate) owner: Option<Obj>,
    pub(crate) entries: Vec<Obj>,
}

impl Pool {
    pub(crate) fn root() -> Self {
        Pool::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug)]
pub(crate) struct Scope {
    token: u64,
    objects: Vec<Obj>,
}

/// Handle to an open automatic-object scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScopeToken(u64);

/// Visiting direction for class initializers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitDirection {
    /// `ginitialize`, ascending class rank.
    Up,
    /// `gdeinitialize`, descending class rank.
    Down,
}

fn this_instance(obj: &Obj) -> Option<&crate::value::Instance> {
    obj.as_instance().map(|a| &**a)
}

pub(crate) fn install(rt: &mut Runtime) -> Result<(), DefineError> {
    let k = rt.kernel().clone();
    let object = k.object.class;

    rt.method(k.galloc, &[k.object.meta]).define(|ctx, frame| {
        let cls = frame.this().as_class().expect("class-object receiver").class;
        let obj = ctx.runtime().allocate(cls)?;
        frame.set_ret(obj);
        Ok(())
    })?;
    rt.method(k.ginit, &[object]).define(|_, frame| {
        let this = frame.this().clone();
        frame.set_ret(this);
        Ok(())
    })?;
    rt.method(k.ginit_with, &[object, object]).define(|ctx, frame| {
        let (dst, src) = (frame.recv(0), frame.recv(1));
        if dst.class_id() != src.class_id() {
            let rt = ctx.runtime();
            return Err(Exception::builtin(
                ExKind::BadType,
                format!(
                    "cannot initialize {} from {}",
                    rt.registry().get(dst.class_id()).name,
                    rt.registry().get(src.class_id()).name
                ),
            ));
        }
        if let (Some(d), Some(s)) = (this_instance(dst), this_instance(src)) {
            d.copy_slots_from(s)?;
        }
        let this = dst.clone();
        frame.set_ret(this);
        Ok(())
    })?;
    rt.method(k.gdeinit, &[object]).define(|_, frame| {
        let this = frame.this().clone();
        frame.set_ret(this);
        Ok(())
    })?;
    rt.method(k.gdealloc, &[object]).define(|ctx, frame| {
        if let Some(inst) = this_instance(frame.this()) {
            if let Rc::Counted(_) = inst.rc() {
                inst.rc.store(0, Ordering::Release);
                inst.retire(LifeState::Deallocated);
                ctx.runtime().note_dealloc();
            }
        }
        Ok(())
    })?;
    rt.method(k.gretain, &[object]).define(|ctx, frame| {
        let this = frame.this();
        let out = match this.rc() {
            Rc::Counted(_) => {
                this_instance(this).unwrap().rc.fetch_add(1, Ordering::AcqRel);
                this.clone()
            }
            Rc::Auto => ctx.gclone(this)?,
            Rc::Static => this.clone(),
        };
        frame.set_ret(out);
        Ok(())
    })?;
    rt.method(k.grelease, &[object]).define(|ctx, frame| {
        let this = frame.this();
        let Rc::Counted(n) = this.rc() else {
            return Ok(());
        };
        match n {
            0 => Err(Exception::builtin(ExKind::BadValue, "reference count underflow")),
            1 => {
                let inst = this_instance(this).unwrap();
                inst.rc.store(0, Ordering::Release);
                let k = ctx.runtime().kernel();
                let (deinit, dealloc) = (k.gdeinit, k.gdealloc);
                ctx.send1(deinit, this)?;
                if this.class_word() != 0 {
                    ctx.send1(dealloc, this)?;
                }
                Ok(())
            }
            _ => {
                this_instance(this).unwrap().rc.fetch_sub(1, Ordering::AcqRel);
                Ok(())
            }
        }
    })?;
    rt.method(k.gauto_release, &[object]).define(|ctx, frame| {
        let this = frame.this();
        let out = match this.rc() {
            Rc::Counted(_) => {
                ctx.push_autorelease(this.clone());
                this.clone()
            }
            Rc::Auto => {
                let clone = ctx.gclone(this)?;
                ctx.push_autorelease(clone.clone());
                clone
            }
            Rc::Static => this.clone(),
        };
        frame.set_ret(out);
        Ok(())
    })?;
    rt.method(k.gauto_delete, &[object]).define(|ctx, frame| {
        let g = ctx.runtime().kernel().gauto_release;
        let out = ctx.send_obj(g, frame.receivers(), &[])?;
        frame.set_ret(out);
        Ok(())
    })?;
    rt.method(k.gdelete, &[object]).define(|ctx, frame| destroy(ctx, frame.this()))?;
    rt.method(k.gclone, &[object]).define(|ctx, frame| {
        let this = frame.this();
        let out = if this.is_class_object() {
            this.clone()
        } else {
            let k = ctx.runtime().kernel();
            let (gclass, galloc, ginit_with) = (k.gclass, k.galloc, k.ginit_with);
            let cls = ctx.send_obj(gclass, std::slice::from_ref(this), &[])?;
            let fresh = ctx.send_obj(galloc, &[cls], &[])?;
            ctx.send_obj(ginit_with, &[fresh, this.clone()], &[])?
        };
        frame.set_ret(out);
        Ok(())
    })?;

    let pool = k.auto_release.class;
    rt.method(k.ginit, &[pool]).define(|ctx, frame| {
        ctx.pools.push(Pool {
            owner: Some(frame.this().clone()),
            entries: Vec::new(),
        });
        let this = frame.this().clone();
        frame.set_ret(this);
        Ok(())
    })?;
    rt.method(k.gdeinit, &[pool]).define(|ctx, frame| {
        let this = frame.this().clone();
        if let Some(at) = ctx
            .pools
            .iter()
            .rposition(|p| p.owner.as_ref().is_some_and(|o| o.ptr_eq(&this)))
        {
            while ctx.pools.len() > at {
                ctx.drain_top()?;
            }
        }
        ctx.next_method(frame)
    })?;
    rt.method(k.gdelete, &[pool]).define(|ctx, frame| destroy(ctx, frame.this()))?;
    Ok(())
}

/// `gdeinit` then `gdealloc` for counted instances.
pub(crate) fn destroy(ctx: &mut Context<'_>, this: &Obj) -> Result<(), Exception> {
    if let Rc::Counted(_) = this.rc() {
        let k = ctx.runtime().kernel();
        let (deinit, dealloc) = (k.gdeinit, k.gdealloc);
        ctx.send1(deinit, this)?;
        if this.class_word() != 0 {
            ctx.send1(dealloc, this)?;
        }
    }
    Ok(())
}

impl Context<'_> {
    fn kernel_send(&mut self, pick: fn(&crate::runtime::Kernel) -> crate::generics::GenericId, obj: &Obj) -> Result<Value, Exception> {
        let g = pick(self.runtime().kernel());
        self.send1(g, obj)
    }

    /// `ginit(galloc(cls))`.
    pub fn gnew(&mut self, class: ClassId) -> Result<Obj, Exception> {
        let rt = self.runtime();
        let cls = rt.class_object(class);
        let k = rt.kernel();
        let (galloc, ginit) = (k.galloc, k.ginit);
        let fresh = self.send_obj(galloc, &[cls], &[])?;
        self.send_obj(ginit, &[fresh], &[])
    }

    /// `ginitWith(galloc(cls), other)`.
    pub fn gnew_with(&mut self, class: ClassId, other: &Obj) -> Result<Obj, Exception> {
        let rt = self.runtime();
        let cls = rt.class_object(class);
        let k = rt.kernel();
        let (galloc, ginit_with) = (k.galloc, k.ginit_with);
        let fresh = self.send_obj(galloc, &[cls], &[])?;
        self.send_obj(ginit_with, &[fresh, other.clone()], &[])
    }

    pub fn gclone(&mut self, obj: &Obj) -> Result<Obj, Exception> {
        let g = self.runtime().kernel().gclone;
        self.send_obj(g, std::slice::from_ref(obj), &[])
    }

    pub fn retain(&mut self, obj: &Obj) -> Result<Obj, Exception> {
        let g = self.runtime().kernel().gretain;
        self.send_obj(g, std::slice::from_ref(obj), &[])
    }

    pub fn release(&mut self, obj: &Obj) -> Result<(), Exception> {
        self.kernel_send(|k| k.grelease, obj).map(drop)
    }

    pub fn auto_release(&mut self, obj: &Obj) -> Result<Obj, Exception> {
        let g = self.runtime().kernel().gauto_release;
        self.send_obj(g, std::slice::from_ref(obj), &[])
    }

    pub fn auto_delete(&mut self, obj: &Obj) -> Result<Obj, Exception> {
        let g = self.runtime().kernel().gauto_delete;
        self.send_obj(g, std::slice::from_ref(obj), &[])
    }

    pub fn delete(&mut self, obj: &Obj) -> Result<(), Exception> {
        self.kernel_send(|k| k.gdelete, obj).map(drop)
    }

    pub(crate) fn push_autorelease(&mut self, obj: Obj) {
        self.pools.last_mut().expect("root pool").entries.push(obj);
    }

    /// Number of pools, including the context's root pool.
    pub fn pool_depth(&self) -> usize {
        self.pools.len()
    }

    /// Entries waiting in the innermost pool.
    pub fn pending_releases(&self) -> usize {
        self.pools.last().map_or(0, Pool::len)
    }

    /// Releases every entry of the innermost pool, newest first, and pops
    /// it unless it is the root pool. Entries already deallocated are
    /// skipped. The first error is reported after the pool is emptied.
    pub fn drain_top(&mut self) -> Result<(), Exception> {
        let pool = if self.pools.len() > 1 {
            self.pools.pop().unwrap()
        } else {
            std::mem::take(&mut self.pools[0])
        };
        let mut first = None;
        for obj in pool.entries.into_iter().rev() {
            if obj.class_word() == 0 {
                continue;
            }
            if let Err(e) = self.release(&obj) {
                first.get_or_insert(e);
            }
        }
        first.map_or(Ok(()), Err)
    }

    pub fn open_scope(&mut self) -> ScopeToken {
        let token = self.next_scope;
        self.next_scope += 1;
        self.scopes.push(Scope {
            token,
            objects: Vec::new(),
        });
        ScopeToken(token)
    }

    /// Closes the innermost scope; its automatic objects become invalid.
    pub fn close_scope(&mut self, token: ScopeToken) -> Result<(), Exception> {
        match self.scopes.last() {
            Some(s) if s.token == token.0 => {}
            _ => {
                return Err(Exception::builtin(
                    ExKind::BadValue,
                    "scope closed out of order or twice",
                ))
            }
        }
        let scope = self.scopes.pop().unwrap();
        for obj in scope.objects {
            if let Some(i) = obj.as_instance() {
                i.retire(LifeState::Expired);
            }
        }
        Ok(())
    }

    /// Runs `body` inside a fresh scope, closing it on every exit path.
    pub fn with_scope<T>(
        &mut self,
        body: impl FnOnce(&mut Self, ScopeToken) -> Result<T, Exception>,
    ) -> Result<T, Exception> {
        let token = self.open_scope();
        let out = body(self, token);
        let closed = self.close_scope(token);
        let out = out?;
        closed.map(|_| out)
    }

    /// Creates an automatic object bound to an open scope.
    pub fn make_automatic(
        &mut self,
        token: ScopeToken,
        class: ClassId,
        inits: &[(SlotIndex, Value)],
    ) -> Result<Obj, Exception> {
        let Some(scope) = self.scopes.iter().position(|s| s.token == token.0) else {
            return Err(Exception::builtin(ExKind::BadValue, "scope is closed"));
        };
        let obj = self.runtime().build_uncounted(class, RC_AUTO)?;
        for (slot, v) in inits {
            obj.set(*slot, v.clone())?;
        }
        self.scopes[scope].objects.push(obj.clone());
        Ok(obj)
    }

    /// Sends `ginitialize` (up) or `gdeinitialize` (down) to every class
    /// that specializes it on its own property metaclass, in rank order.
    /// Returns the visited classes.
    pub fn run_class_initializers(&mut self, direction: InitDirection) -> Result<Vec<ClassId>, Exception> {
        let rt = self.runtime();
        let k = rt.kernel();
        let g = match direction {
            InitDirection::Up => k.ginitialize,
            InitDirection::Down => k.gdeinitialize,
        };
        let mut order = rt.registry().by_ascending_rank();
        if direction == InitDirection::Down {
            order.reverse();
        }
        let mut visited = Vec::new();
        for class in order {
            let Some(pm) = rt.registry().get(class).property_metaclass else {
                continue;
            };
            if rt.methods().of_generic(g).iter().any(|&m| rt.methods().get(m).specializers[0] == pm) {
                let obj = rt.class_object(class);
                self.send1(g, &obj)?;
                visited.push(class);
            }
        }
        Ok(visited)
    }
}

impl Drop for Context<'_> {
    fn drop(&mut self) {
        while let Some(scope) = self.scopes.last() {
            let token = ScopeToken(scope.token);
            let _ = self.close_scope(token);
        }
        while !self.pools.is_empty() {
            if let Err(e) = self.drain_top() {
                log::warn!("error while draining autorelease pool: {e}");
            }
            if self.pools.len() == 1 && self.pools[0].is_empty() {
                break;
            }
        }
    }
}
