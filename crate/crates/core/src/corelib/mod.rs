//! Example class library built on the runtime: boxed numbers, a string
//! cluster, counters, boolean class predicates, proxies, streams, a stack
//! and arrays, plus the collector and KVO patterns.

pub mod booleans;
pub mod collections;
pub mod counter;
pub mod gc;
pub mod kvo;
pub mod numbers;
pub mod proxy;
pub mod streams;
pub mod strings;

use crate::error::DefineError;
use crate::exceptions::{ExKind, Exception};
use crate::runtime::Runtime;

pub use booleans::Booleans;
pub use collections::Collections;
pub use counter::Counters;
pub use gc::install_collector;
pub use kvo::NotificationCenter;
pub use numbers::Numbers;
pub use proxy::Proxies;
pub use streams::Streams;
pub use strings::Strings;

/// Handles to everything [`install`] defined.
#[derive(Clone)]
pub struct CoreLib {
    pub numbers: Numbers,
    pub strings: Strings,
    pub counters: Counters,
    pub booleans: Booleans,
    pub proxies: Proxies,
    pub streams: Streams,
    pub collections: Collections,
}

/// Defines the library classes, generics and methods on an unsealed
/// runtime.
pub fn install(rt: &mut Runtime) -> Result<CoreLib, DefineError> {
    let numbers = Numbers::install(rt)?;
    let strings = Strings::install(rt)?;
    let counters = Counters::install(rt, &numbers)?;
    let booleans = Booleans::install(rt)?;
    let proxies = Proxies::install(rt)?;
    let streams = Streams::install(rt)?;
    let collections = Collections::install(rt)?;
    install_string_keys(rt, &strings)?;
    Ok(CoreLib {
        numbers,
        strings,
        counters,
        booleans,
        proxies,
        streams,
        collections,
    })
}

/// `ggetAt(obj, "key")` and `gputAt(obj, "key", value)`: string keys are
/// translated to properties, unknown ones raise `ExBadProperty`.
fn install_string_keys(rt: &mut Runtime, s: &Strings) -> Result<(), DefineError> {
    let k = rt.kernel().clone();
    let (object, string) = (k.object.class, s.string.class);
    let slot = s.str_slot;
    let key = move |ctx: &crate::dispatch::Context<'_>, o: &crate::value::Obj| {
        let name = o.get(slot)?;
        let name = name.as_str().unwrap_or_default();
        let rt = ctx.runtime();
        rt.property(name)
            .map(|p| rt.class_object(p))
            .ok_or_else(|| Exception::builtin(ExKind::BadProperty, format!("unknown property key `{name}`")))
    };
    let gget_at = k.gget_at;
    rt.method(gget_at, &[object, string]).define(move |ctx, f| {
        let p = key(ctx, f.recv(1))?;
        let out = ctx.send_obj(gget_at, &[f.this().clone(), p], &[])?;
        f.set_ret(out);
        Ok(())
    })?;
    let gput_at = k.gput_at;
    rt.method(gput_at, &[object, string, object]).define(move |ctx, f| {
        let p = key(ctx, f.recv(1))?;
        ctx.send(gput_at, &[f.this().clone(), p, f.recv(2).clone()], &[]).map(drop)
    })?;
    Ok(())
}
