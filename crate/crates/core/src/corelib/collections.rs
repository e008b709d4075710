//! A vector-backed `Stack` whose `gpush`/`gtop`/`gpop` are aliases of
//! `gput`/`gget`/`gdrop`, and an immutable `Array` mapped by functors.

use std::sync::Arc;

use parking_lot::Mutex;

use crate::dispatch::Context;
use crate::error::DefineError;
use crate::exceptions::{ExKind, Exception};
use crate::generics::GenericId;
use crate::object_model::ClassTriple;
use crate::runtime::Runtime;
use crate::value::{Obj, SlotIndex, TypeTag, Value};

type Items = Mutex<Vec<Obj>>;

#[derive(Debug, Clone, Copy)]
pub struct Collections {
    pub stack: ClassTriple,
    pub array: ClassTriple,
    stack_items: SlotIndex,
    array_items: SlotIndex,
    pub gput: GenericId,
    pub gget: GenericId,
    pub gdrop: GenericId,
    pub gpush: GenericId,
    pub gtop: GenericId,
    pub gpop: GenericId,
    /// `gmap(fun, array)`: a new array of `geval1(fun, item)`.
    pub gmap: GenericId,
    pub glength: GenericId,
}

fn items(obj: &Obj, slot: SlotIndex) -> Result<Arc<Items>, Exception> {
    match obj.get(slot)? {
        Value::Native(n) => n
            .downcast::<Items>()
            .map_err(|_| Exception::builtin(ExKind::BadType, "not a collection")),
        _ => Ok(Arc::default()),
    }
}

impl Collections {
    pub(crate) fn install(rt: &mut Runtime) -> Result<Self, DefineError> {
        let k = rt.kernel().clone();
        let object = k.object.class;
        let stack = rt.define_class("Stack", Some(object), &[("items", TypeTag::Native)])?;
        let array = rt.define_class("Array", Some(object), &[("items", TypeTag::Native)])?;
        let obj = Some(TypeTag::Obj);
        let c = Collections {
            stack,
            array,
            stack_items: rt.slot(stack.class, "items")?,
            array_items: rt.slot(array.class, "items")?,
            gput: rt.define_generic("gput", 2, &[], None)?,
            gget: rt.define_generic("gget", 2, &[], obj)?,
            gdrop: rt.define_generic("gdrop", 2, &[], None)?,
            gpush: rt.define_generic("gpush", 2, &[], None)?,
            gtop: rt.define_generic("gtop", 2, &[], obj)?,
            gpop: rt.define_generic("gpop", 2, &[], None)?,
            gmap: rt.define_generic("gmap", 2, &[], obj)?,
            glength: rt.define_generic("glength", 1, &[], Some(TypeTag::Int))?,
        };
        for (class, slot) in [(stack.class, c.stack_items), (array.class, c.array_items)] {
            rt.method(k.ginit, &[class]).define(move |ctx, f| {
                f.this().set(slot, Value::Native(Arc::new(Items::default())))?;
                ctx.next_method(f)
            })?;
            rt.method(c.glength, &[class]).define(move |_, f| {
                let n = items(f.this(), slot)?.lock().len();
                f.set_ret(n as i64);
                Ok(())
            })?;
        }
        let slot = c.stack_items;
        let gretain = k.gretain;
        rt.method(c.gput, &[stack.class, object]).define(move |ctx, f| {
            let kept = ctx.send_obj(gretain, &[f.recv(1).clone()], &[])?;
            items(f.this(), slot)?.lock().push(kept);
            Ok(())
        })?;
        rt.method(c.gget, &[stack.class, object]).define(move |ctx, f| {
            let top = items(f.this(), slot)?.lock().last().cloned();
            f.set_ret(top.unwrap_or_else(|| ctx.runtime().nil()));
            Ok(())
        })?;
        let grelease = k.grelease;
        rt.method(c.gdrop, &[stack.class, object]).define(move |ctx, f| {
            let popped = items(f.this(), slot)?.lock().pop();
            match popped {
                Some(o) => ctx.send1(grelease, &o).map(drop),
                None => Err(Exception::builtin(ExKind::BadRange, "pop from an empty stack")),
            }
        })?;
        let specs = [stack.class, object];
        rt.define_alias(c.gpush, c.gput, &specs)?;
        rt.define_alias(c.gtop, c.gget, &specs)?;
        rt.define_alias(c.gpop, c.gdrop, &specs)?;
        rt.method(k.gdeinit, &[stack.class]).define(move |ctx, f| {
            let held = std::mem::take(&mut *items(f.this(), slot)?.lock());
            for o in held.iter().rev() {
                if o.class_word() != 0 {
                    ctx.send1(grelease, o)?;
                }
            }
            ctx.next_method(f)
        })?;

        let (aslot, aclass) = (c.array_items, array.class);
        let geval1 = k.geval[1];
        rt.method(c.gmap, &[k.functor.class, array.class]).define(move |ctx, f| {
            let src = items(f.recv(1), aslot)?.lock().clone();
            let mut out = Vec::with_capacity(src.len());
            for item in src {
                out.push(ctx.send_obj(geval1, &[f.this().clone(), item], &[])?);
            }
            let arr = ctx.gnew(aclass)?;
            arr.set(aslot, Value::Native(Arc::new(Mutex::new(out))))?;
            f.set_ret(arr);
            Ok(())
        })?;
        Ok(c)
    }

    pub fn new_stack(&self, ctx: &mut Context<'_>) -> Result<Obj, Exception> {
        ctx.gnew(self.stack.class)
    }

    pub fn new_array(&self, ctx: &mut Context<'_>, elems: Vec<Obj>) -> Result<Obj, Exception> {
        let arr = ctx.gnew(self.array.class)?;
        arr.set(self.array_items, Value::Native(Arc::new(Mutex::new(elems))))?;
        Ok(arr)
    }

    /// Snapshot of the elements of a stack (bottom first) or array.
    pub fn elements(&self, obj: &Obj) -> Result<Vec<Obj>, Exception> {
        let slot = if obj.class_id() == self.stack.class { self.stack_items } else { self.array_items };
        Ok(items(obj, slot)?.lock().clone())
    }
}
