//! Collector configuration: every allocation is auto-released, explicit
//! deletes are ignored and retaining an automatic object keeps its clone
//! alive past the enclosing pool. Objects are then reclaimed by deleting
//! (or draining) an `AutoRelease` pool.

use crate::error::DefineError;
use crate::lifecycle::destroy;
use crate::runtime::Runtime;
use crate::value::{Obj, Rc, Value};

/// Installs the collector around methods. Call before sealing.
pub fn install_collector(rt: &mut Runtime) -> Result<(), DefineError> {
    let k = rt.kernel().clone();
    let object = k.object.class;
    let gauto_release = k.gauto_release;
    rt.method(k.galloc, &[k.object.meta]).around().define(move |ctx, f| {
        ctx.next_method(f)?;
        if let Some(Value::Obj(o)) = f.ret() {
            let o = o.clone();
            ctx.send1(gauto_release, &o)?;
        }
        Ok(())
    })?;
    rt.method(k.gdelete, &[object]).around().define(|_, _| Ok(()))?;
    // Pools keep their explicit delete: it is what triggers a collection.
    rt.method(k.gdelete, &[k.auto_release.class])
        .around()
        .define(|ctx, f| destroy(ctx, f.this()))?;
    let gclone = k.gclone;
    rt.method(k.gauto_delete, &[object]).around().define(move |ctx, f| {
        let this = f.this().clone();
        let out: Obj = if this.rc() == Rc::Auto {
            ctx.send_obj(gclone, &[this], &[])?
        } else {
            this
        };
        f.set_ret(out);
        Ok(())
    })?;
    let gretain = k.gretain;
    rt.method(k.gretain, &[object]).around().define(move |ctx, f| {
        ctx.next_method(f)?;
        if f.this().rc() == Rc::Auto {
            if let Some(Value::Obj(o)) = f.ret() {
                let o = o.clone();
                let again = ctx.send_obj(gretain, &[o], &[])?;
                f.set_ret(again);
            }
        }
        Ok(())
    })?;
    Ok(())
}
