//! Multiple inheritance by delegation: `IOStream` derives from `OutStream`
//! and forwards rank-1 messages it does not understand to an `InStream`.

use crate::dispatch::Context;
use crate::error::DefineError;
use crate::exceptions::Exception;
use crate::generics::{GenericId, Param};
use crate::object_model::ClassTriple;
use crate::runtime::Runtime;
use crate::value::{Obj, SlotIndex, TypeTag, Value};

#[derive(Debug, Clone, Copy)]
pub struct Streams {
    pub in_stream: ClassTriple,
    pub out_stream: ClassTriple,
    pub io_stream: ClassTriple,
    data: SlotIndex,
    pos: SlotIndex,
    buf: SlotIndex,
    inner: SlotIndex,
    /// Next byte, or -1 at the end.
    pub gread: GenericId,
    /// Bytes left to read.
    pub gavailable: GenericId,
    pub gwrite: GenericId,
    pub gcontents: GenericId,
}

impl Streams {
    pub(crate) fn install(rt: &mut Runtime) -> Result<Self, DefineError> {
        let k = rt.kernel().clone();
        let object = k.object.class;
        let in_stream = rt.define_class("InStream", Some(object), &[("data", TypeTag::Str), ("pos", TypeTag::Int)])?;
        let out_stream = rt.define_class("OutStream", Some(object), &[("buf", TypeTag::Str)])?;
        let io_stream = rt.define_class("IOStream", Some(out_stream.class), &[("in_stream", TypeTag::Obj)])?;
        let s = Streams {
            in_stream,
            out_stream,
            io_stream,
            data: rt.slot(in_stream.class, "data")?,
            pos: rt.slot(in_stream.class, "pos")?,
            buf: rt.slot(out_stream.class, "buf")?,
            inner: rt.slot(io_stream.class, "in_stream")?,
            gread: rt.define_generic("gread", 1, &[], Some(TypeTag::Int))?,
            gavailable: rt.define_generic("gavailable", 1, &[], Some(TypeTag::Int))?,
            gwrite: rt.define_generic("gwrite", 1, &[Param::new("ch", TypeTag::Int)], None)?,
            gcontents: rt.define_generic("gcontents", 1, &[], Some(TypeTag::Str))?,
        };
        let (data, pos, buf, inner) = (s.data, s.pos, s.buf, s.inner);
        rt.method(s.gread, &[in_stream.class]).define(move |_, f| {
            let this = f.this();
            let p = this.get_int(pos)?;
            let next = match this.get(data)?.as_str().and_then(|d| d.as_bytes().get(p as usize).copied()) {
                Some(b) => {
                    this.set_int(pos, p + 1)?;
                    b as i64
                }
                None => -1,
            };
            f.set_ret(next);
            Ok(())
        })?;
        rt.method(s.gavailable, &[in_stream.class]).define(move |_, f| {
            let this = f.this();
            let len = this.get(data)?.as_str().map_or(0, str::len) as i64;
            f.set_ret((len - this.get_int(pos)?).max(0));
            Ok(())
        })?;
        rt.method(s.gwrite, &[out_stream.class]).define(move |_, f| {
            let this = f.this();
            let mut text = this.get(buf)?.as_str().unwrap_or_default().to_string();
            text.push(char::from(f.int(0) as u8));
            this.set(buf, Value::str(&text))
        })?;
        rt.method(s.gcontents, &[out_stream.class]).define(move |_, f| {
            let v = f.this().get(buf)?;
            f.set_ret(v);
            Ok(())
        })?;
        rt.method(k.gum[0], &[io_stream.class]).define(move |ctx, f| {
            let target = f.this().get_obj(inner)?;
            ctx.forward_message(f, std::slice::from_ref(&target))
        })?;
        Ok(s)
    }

    pub fn new_in(&self, ctx: &mut Context<'_>, data: &str) -> Result<Obj, Exception> {
        let o = ctx.gnew(self.in_stream.class)?;
        o.set(self.data, Value::str(data))?;
        Ok(o)
    }

    pub fn new_out(&self, ctx: &mut Context<'_>) -> Result<Obj, Exception> {
        ctx.gnew(self.out_stream.class)
    }

    /// An `IOStream` reading from `input`.
    pub fn new_io(&self, ctx: &mut Context<'_>, input: &Obj) -> Result<Obj, Exception> {
        let o = ctx.gnew(self.io_stream.class)?;
        o.set(self.inner, Value::Obj(input.clone()))?;
        Ok(o)
    }

    pub fn read(&self, ctx: &mut Context<'_>, stream: &Obj) -> Result<i64, Exception> {
        ctx.send1(self.gread, stream).map(|v| v.as_int().unwrap_or(-1))
    }

    pub fn write(&self, ctx: &mut Context<'_>, stream: &Obj, ch: u8) -> Result<(), Exception> {
        ctx.send(self.gwrite, std::slice::from_ref(stream), &[Value::Int(ch as i64)]).map(drop)
    }

    pub fn contents(&self, ctx: &mut Context<'_>, stream: &Obj) -> Result<String, Exception> {
        ctx.send1(self.gcontents, stream)
            .map(|v| v.as_str().unwrap_or_default().to_string())
    }
}
