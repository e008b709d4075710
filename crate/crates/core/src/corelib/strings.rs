//! A minimal string class cluster: `String` is the public front and
//! `StringLiteral` the private implementation built by its initializer.

use crate::dispatch::Context;
use crate::error::DefineError;
use crate::exceptions::{ExKind, Exception};
use crate::generics::{GenericId, Param};
use crate::object_model::ClassTriple;
use crate::runtime::Runtime;
use crate::value::{Obj, SlotIndex, TypeTag, Value};

#[derive(Debug, Clone, Copy)]
pub struct Strings {
    pub string: ClassTriple,
    pub literal: ClassTriple,
    pub str_slot: SlotIndex,
    pub ginit_with_str: GenericId,
    pub gnew_with_str: GenericId,
    pub gstr: GenericId,
    pub gsize: GenericId,
}

impl Strings {
    pub(crate) fn install(rt: &mut Runtime) -> Result<Self, DefineError> {
        let k = rt.kernel().clone();
        let string = rt.define_class("String", Some(k.object.class), &[])?;
        let literal = rt.define_class("StringLiteral", Some(string.class), &[("str", TypeTag::Str)])?;
        let str_param = [Param::new("str", TypeTag::Str)];
        let s = Strings {
            string,
            literal,
            str_slot: rt.slot(literal.class, "str")?,
            ginit_with_str: rt.define_generic("ginitWithStr", 1, &str_param, Some(TypeTag::Obj))?,
            gnew_with_str: rt.define_generic("gnewWithStr", 1, &str_param, Some(TypeTag::Obj))?,
            gstr: rt.define_generic("gstr", 1, &[], Some(TypeTag::Str))?,
            gsize: rt.define_generic("gsize", 1, &[], Some(TypeTag::Int))?,
        };
        let (galloc, ginit_with_str) = (k.galloc, s.ginit_with_str);
        rt.method(s.gnew_with_str, &[k.object.meta]).define(move |ctx, f| {
            let fresh = ctx.send_obj(galloc, f.receivers(), &[])?;
            let out = ctx.send_obj(ginit_with_str, &[fresh], &[f.arg(0)])?;
            f.set_ret(out);
            Ok(())
        })?;
        // The front class does not allocate; its initializer picks the
        // concrete subclass.
        rt.method(k.galloc, &[string.prop_meta]).define(|_, f| {
            let this = f.this().clone();
            f.set_ret(this);
            Ok(())
        })?;
        let lit_class = literal.class;
        rt.method(s.ginit_with_str, &[string.prop_meta]).define(move |ctx, f| {
            let cls = ctx.runtime().class_object(lit_class);
            let lit = ctx.send_obj(galloc, &[cls], &[])?;
            let out = ctx.send_obj(ginit_with_str, &[lit], &[f.arg(0)])?;
            f.set_ret(out);
            Ok(())
        })?;
        let slot = s.str_slot;
        rt.method(s.ginit_with_str, &[literal.class]).define(move |_, f| {
            f.this().set(slot, f.arg(0))?;
            let this = f.this().clone();
            f.set_ret(this);
            Ok(())
        })?;
        rt.method(s.gstr, &[literal.class]).define(move |_, f| {
            let v = f.this().get(slot)?;
            f.set_ret(v);
            Ok(())
        })?;
        rt.method(s.gsize, &[literal.class]).define(move |_, f| {
            let n = f.this().get(slot)?.as_str().map_or(0, str::len);
            f.set_ret(n as i64);
            Ok(())
        })?;
        rt.method(k.ginit_with, &[literal.class, literal.class]).define(move |_, f| {
            f.this().set(slot, f.recv(1).get(slot)?)?;
            let this = f.this().clone();
            f.set_ret(this);
            Ok(())
        })?;
        Ok(s)
    }

    /// `gnewWithStr(String, s)`.
    pub fn new_string(&self, ctx: &mut Context<'_>, s: &str) -> Result<Obj, Exception> {
        let cls = ctx.runtime().class_object(self.string.class);
        ctx.send_obj(self.gnew_with_str, &[cls], &[Value::str(s)])
    }

    /// Text of a string object.
    pub fn text(&self, ctx: &mut Context<'_>, obj: &Obj) -> Result<String, Exception> {
        match ctx.send(self.gstr, std::slice::from_ref(obj), &[])? {
            Value::Str(s) => Ok(s.to_string()),
            other => Err(Exception::builtin(ExKind::BadType, format!("gstr returned {other:?}"))),
        }
    }
}
