//! `Counter` and `MilliCounter`: the benchmark and contract workhorses.

use std::sync::Arc;

use crate::contracts::{invariant_origin, test_assert, Contract};
use crate::corelib::numbers::Numbers;
use crate::dispatch::Context;
use crate::error::DefineError;
use crate::exceptions::Exception;
use crate::generics::{GenericId, Param};
use crate::id::ClassId;
use crate::object_model::ClassTriple;
use crate::runtime::Runtime;
use crate::value::{Obj, SlotIndex, TypeTag, Value};

#[derive(Debug, Clone, Copy)]
pub struct Counters {
    pub counter: ClassTriple,
    pub milli: ClassTriple,
    pub cnt: SlotIndex,
    pub mcnt: SlotIndex,
    pub gincr: GenericId,
    /// `gincrBy`, `gincrBy2` .. `gincrBy5`.
    pub gincr_by: [GenericId; 5],
    /// `gaddTo`, `gaddTo2` .. `gaddTo4` (ranks 2 to 5).
    pub gadd_to: [GenericId; 4],
    pub p_value: ClassId,
    pub p_class: ClassId,
}

const BY: [&str; 5] = ["by", "by2", "by3", "by4", "by5"];

impl Counters {
    pub(crate) fn install(rt: &mut Runtime, num: &Numbers) -> Result<Self, DefineError> {
        let k = rt.kernel().clone();
        let counter = rt.define_class("Counter", Some(k.object.class), &[("cnt", TypeTag::Int)])?;
        let milli = rt.define_class("MilliCounter", Some(counter.class), &[("mcnt", TypeTag::Int)])?;
        let gincr = rt.define_generic("gincr", 1, &[], None)?;
        let mut gincr_by = [gincr; 5];
        for (n, g) in gincr_by.iter_mut().enumerate() {
            let params: Vec<Param> = BY[..=n].iter().map(|b| Param::new(b, TypeTag::Int)).collect();
            let name = if n == 0 { "gincrBy".to_string() } else { format!("gincrBy{}", n + 1) };
            *g = rt.define_generic(&name, 1, &params, None)?;
        }
        let mut gadd_to = [gincr; 4];
        for (n, g) in gadd_to.iter_mut().enumerate() {
            let name = if n == 0 { "gaddTo".to_string() } else { format!("gaddTo{}", n + 1) };
            *g = rt.define_generic(&name, n + 2, &[], Some(TypeTag::Obj))?;
        }
        let cnt = rt.slot(counter.class, "cnt")?;
        let mcnt = rt.slot(milli.class, "mcnt")?;

        rt.method(gincr, &[counter.class]).contract(
            Contract::<i64>::new(move |_, f, _| {
                let this = f.this();
                this.set_int(cnt, this.get_int(cnt)?.wrapping_add(1))
            })
            .pre(move |_, f, old| {
                *old = f.this().get_int(cnt)?;
                Ok(())
            })
            .post(move |_, f, old| test_assert(f.this().get_int(cnt)? > *old, "counter overflow", None)),
        )?;
        for (n, &g) in gincr_by.iter().enumerate() {
            rt.method(g, &[counter.class]).define(move |_, f| {
                let by: i64 = (0..=n).map(|i| f.int(i)).sum();
                let this = f.this();
                this.set_int(cnt, this.get_int(cnt)?.wrapping_add(by))
            })?;
        }
        rt.method(gincr_by[0], &[milli.class])
            .next_path(gincr)
            .params(&[Param::new("by", TypeTag::Int)])
            .contract(
                Contract::<()>::new(move |ctx, f, _| {
                    let this = f.this();
                    let m = this.get_int(mcnt)? + f.int(0);
                    this.set_int(mcnt, m)?;
                    if m >= 1000 {
                        this.set_int(mcnt, m - 1000)?;
                        ctx.next_method(f)?;
                    }
                    Ok(())
                })
                .pre(|_, f, _| {
                    let by = f.int(0);
                    test_assert((0..1000).contains(&by), "millicount out or range", None)
                }),
            )?;
        rt.method(k.ginvariant, &[counter.class]).define(move |_, f| {
            test_assert(f.this().get_int(cnt)? >= 0, "counter out of range", Some(invariant_origin(f)))
        })?;
        rt.method(k.ginvariant, &[milli.class]).define(move |ctx, f| {
            ctx.next_method(f)?;
            let m = f.this().get_int(mcnt)?;
            test_assert((0..1000).contains(&m), "millicount out of range", Some(invariant_origin(f)))
        })?;
        for (n, &g) in gadd_to.iter().enumerate() {
            let specs = vec![counter.class; n + 2];
            rt.method(g, &specs).define(move |_, f| {
                let rs = f.receivers();
                let mut sum = 0;
                for r in &rs[1..] {
                    sum += r.get_int(cnt)?;
                }
                rs[0].set_int(cnt, rs[0].get_int(cnt)? + sum)?;
                f.set_ret(rs[0].clone());
                Ok(())
            })?;
        }

        let p_value = rt.define_property("value")?.class;
        let p_class = rt.define_property("class")?.class;
        let (int_class, iv, gint, gclass) = (num.int.class, num.int_value, num.gint, k.gclass);
        rt.bind_property(
            counter.class,
            p_value,
            Some("cnt"),
            Arc::new(move |ctx, v| {
                let boxed = ctx.gnew(int_class)?;
                boxed.set(iv, v)?;
                Ok(boxed)
            }),
            Some(Arc::new(move |ctx, o| ctx.send(gint, std::slice::from_ref(o), &[]))),
        )?;
        rt.bind_property(
            counter.class,
            p_class,
            None,
            Arc::new(move |ctx, v| match v {
                Value::Obj(o) => ctx.send_obj(gclass, &[o], &[]),
                _ => Ok(ctx.runtime().nil()),
            }),
            None,
        )?;

        Ok(Counters {
            counter,
            milli,
            cnt,
            mcnt,
            gincr,
            gincr_by,
            gadd_to,
            p_value,
            p_class,
        })
    }

    pub fn new_counter(&self, ctx: &mut Context<'_>, n: i64) -> Result<Obj, Exception> {
        let c = ctx.gnew(self.counter.class)?;
        c.set_int(self.cnt, n)?;
        Ok(c)
    }

    pub fn new_milli(&self, ctx: &mut Context<'_>, n: i64, m: i64) -> Result<Obj, Exception> {
        let c = ctx.gnew(self.milli.class)?;
        c.set_int(self.cnt, n)?;
        c.set_int(self.mcnt, m)?;
        Ok(c)
    }

    pub fn count(&self, obj: &Obj) -> Result<i64, Exception> {
        obj.get_int(self.cnt)
    }

    pub fn incr(&self, ctx: &mut Context<'_>, obj: &Obj) -> Result<(), Exception> {
        ctx.send1(self.gincr, obj).map(drop)
    }

    pub fn incr_by(&self, ctx: &mut Context<'_>, obj: &Obj, by: i64) -> Result<(), Exception> {
        ctx.send(self.gincr_by[0], std::slice::from_ref(obj), &[Value::Int(by)]).map(drop)
    }
}
