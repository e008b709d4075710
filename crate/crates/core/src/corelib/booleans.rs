//! Class predicates: `gand`, `gor` and `gnot` over the `True`, `False` and
//! `TrueFalse` class-objects. `TrueFalse` stands for "unknown" (Kleene
//! three-valued logic).

use crate::dispatch::Context;
use crate::error::DefineError;
use crate::exceptions::Exception;
use crate::generics::GenericId;
use crate::id::ClassId;
use crate::runtime::Runtime;
use crate::value::{Obj, TypeTag};

#[derive(Debug, Clone, Copy)]
pub struct Booleans {
    pub gand: GenericId,
    pub gor: GenericId,
    pub gnot: GenericId,
}

fn answer(rt: &mut Runtime, g: GenericId, specs: &[ClassId], result: ClassId) -> Result<(), DefineError> {
    rt.method(g, specs).define(move |ctx, f| {
        let out = ctx.runtime().class_object(result);
        f.set_ret(out);
        Ok(())
    })?;
    Ok(())
}

impl Booleans {
    pub(crate) fn install(rt: &mut Runtime) -> Result<Self, DefineError> {
        let k = rt.kernel().clone();
        let ret = Some(TypeTag::Obj);
        let b = Booleans {
            gand: rt.define_generic("gand", 2, &[], ret)?,
            gor: rt.define_generic("gor", 2, &[], ret)?,
            gnot: rt.define_generic("gnot", 1, &[], ret)?,
        };
        let (t, f, u) = (k.true_, k.false_, k.true_false);
        answer(rt, b.gand, &[u.meta, u.meta], u.class)?;
        answer(rt, b.gand, &[t.meta, t.meta], t.class)?;
        answer(rt, b.gand, &[f.meta, u.meta], f.class)?;
        answer(rt, b.gand, &[u.meta, f.meta], f.class)?;
        answer(rt, b.gor, &[u.meta, u.meta], u.class)?;
        answer(rt, b.gor, &[f.meta, f.meta], f.class)?;
        answer(rt, b.gor, &[t.meta, u.meta], t.class)?;
        answer(rt, b.gor, &[u.meta, t.meta], t.class)?;
        answer(rt, b.gnot, &[u.meta], u.class)?;
        answer(rt, b.gnot, &[t.meta], f.class)?;
        answer(rt, b.gnot, &[f.meta], t.class)?;
        Ok(b)
    }

    pub fn and(&self, ctx: &mut Context<'_>, a: &Obj, b: &Obj) -> Result<Obj, Exception> {
        ctx.send_obj(self.gand, &[a.clone(), b.clone()], &[])
    }

    pub fn or(&self, ctx: &mut Context<'_>, a: &Obj, b: &Obj) -> Result<Obj, Exception> {
        ctx.send_obj(self.gor, &[a.clone(), b.clone()], &[])
    }

    pub fn not(&self, ctx: &mut Context<'_>, a: &Obj) -> Result<Obj, Exception> {
        ctx.send_obj(self.gnot, std::slice::from_ref(a), &[])
    }
}
