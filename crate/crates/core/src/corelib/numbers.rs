//! Boxed integers and floats with the four arithmetic generics.

use crate::dispatch::Context;
use crate::error::DefineError;
use crate::exceptions::{ExKind, Exception};
use crate::generics::GenericId;
use crate::lifecycle::ScopeToken;
use crate::object_model::ClassTriple;
use crate::runtime::Runtime;
use crate::value::{Obj, SlotIndex, TypeTag, Value};

#[derive(Debug, Clone, Copy)]
pub struct Numbers {
    pub int: ClassTriple,
    pub float: ClassTriple,
    pub int_value: SlotIndex,
    pub float_value: SlotIndex,
    pub gint: GenericId,
    pub gfloat: GenericId,
    pub gadd: GenericId,
    pub gsub: GenericId,
    pub gmul: GenericId,
    pub gdiv: GenericId,
}

#[derive(Clone, Copy)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    fn ints(self, a: i64, b: i64) -> Result<i64, Exception> {
        let r = match self {
            Op::Add => a.checked_add(b),
            Op::Sub => a.checked_sub(b),
            Op::Mul => a.checked_mul(b),
            Op::Div if b == 0 => return Err(Exception::builtin(ExKind::BadDomain, "division by zero")),
            Op::Div => a.checked_div(b),
        };
        r.ok_or_else(|| Exception::builtin(ExKind::BadRange, "integer overflow"))
    }

    fn floats(self, a: f64, b: f64) -> f64 {
        match self {
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => a * b,
            Op::Div => a / b,
        }
    }
}

impl Numbers {
    pub(crate) fn install(rt: &mut Runtime) -> Result<Self, DefineError> {
        let object = rt.kernel().object.class;
        let int = rt.define_class("Int", Some(object), &[("value", TypeTag::Int)])?;
        let float = rt.define_class("Float", Some(object), &[("value", TypeTag::Float)])?;
        let ret = Some(TypeTag::Obj);
        let n = Numbers {
            int,
            float,
            int_value: rt.slot(int.class, "value")?,
            float_value: rt.slot(float.class, "value")?,
            gint: rt.define_generic("gint", 1, &[], Some(TypeTag::Int))?,
            gfloat: rt.define_generic("gfloat", 1, &[], Some(TypeTag::Float))?,
            gadd: rt.define_generic("gadd", 2, &[], ret)?,
            gsub: rt.define_generic("gsub", 2, &[], ret)?,
            gmul: rt.define_generic("gmul", 2, &[], ret)?,
            gdiv: rt.define_generic("gdiv", 2, &[], ret)?,
        };
        let (iv, fv) = (n.int_value, n.float_value);
        rt.method(n.gint, &[int.class]).define(move |_, f| {
            let v = f.this().get_int(iv)?;
            f.set_ret(v);
            Ok(())
        })?;
        rt.method(n.gint, &[float.class]).define(move |_, f| {
            let v = f.this().get_float(fv)?;
            f.set_ret(v as i64);
            Ok(())
        })?;
        rt.method(n.gfloat, &[int.class]).define(move |_, f| {
            let v = f.this().get_int(iv)?;
            f.set_ret(v as f64);
            Ok(())
        })?;
        rt.method(n.gfloat, &[float.class]).define(move |_, f| {
            let v = f.this().get_float(fv)?;
            f.set_ret(v);
            Ok(())
        })?;
        for (g, op) in [(n.gadd, Op::Add), (n.gsub, Op::Sub), (n.gmul, Op::Mul), (n.gdiv, Op::Div)] {
            let (ic, fc) = (int.class, float.class);
            rt.method(g, &[ic, ic]).define(move |ctx, f| {
                let r = op.ints(f.recv(0).get_int(iv)?, f.recv(1).get_int(iv)?)?;
                let out = new_boxed(ctx, ic, iv, Value::Int(r))?;
                f.set_ret(out);
                Ok(())
            })?;
            for specs in [[fc, fc], [ic, fc], [fc, ic]] {
                rt.method(g, &specs).define(move |ctx, f| {
                    let a = as_f64(f.recv(0), iv, fv)?;
                    let b = as_f64(f.recv(1), iv, fv)?;
                    let out = new_boxed(ctx, fc, fv, Value::Float(op.floats(a, b)))?;
                    f.set_ret(out);
                    Ok(())
                })?;
            }
        }
        Ok(n)
    }

    pub fn new_int(&self, ctx: &mut Context<'_>, v: i64) -> Result<Obj, Exception> {
        new_boxed(ctx, self.int.class, self.int_value, Value::Int(v))
    }

    pub fn new_float(&self, ctx: &mut Context<'_>, v: f64) -> Result<Obj, Exception> {
        new_boxed(ctx, self.float.class, self.float_value, Value::Float(v))
    }

    /// Automatic integer bound to `scope`.
    pub fn auto_int(&self, ctx: &mut Context<'_>, scope: ScopeToken, v: i64) -> Result<Obj, Exception> {
        ctx.make_automatic(scope, self.int.class, &[(self.int_value, Value::Int(v))])
    }

    pub fn int_of(&self, obj: &Obj) -> Result<i64, Exception> {
        obj.get_int(self.int_value)
    }

    pub fn float_of(&self, obj: &Obj) -> Result<f64, Exception> {
        as_f64(obj, self.int_value, self.float_value)
    }
}

fn as_f64(obj: &Obj, iv: SlotIndex, fv: SlotIndex) -> Result<f64, Exception> {
    obj.get_float(fv).or_else(|_| obj.get_int(iv).map(|i| i as f64))
}

fn new_boxed(ctx: &mut Context<'_>, class: crate::id::ClassId, slot: SlotIndex, v: Value) -> Result<Obj, Exception> {
    let obj = ctx.gnew(class)?;
    obj.set(slot, v)?;
    Ok(obj)
}
