//! C ABI for the objrt runtime.
//!
//! Handles are opaque pointers. A runtime comes with the core library
//! installed and sealed; contexts borrow it and must be freed first
//! (`objrt_runtime_free` answers `OBJRT_STATUS_BUSY` otherwise). Object
//! handles own a reference to the Rust value only: freeing a handle does
//! not release the object, `objrt_release` does.
//!
//! Fallible calls return an [`ObjrtStatus`]. When a message raises, the
//! status names the exception class and `objrt_last_error` describes it.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::atomic::{AtomicUsize, Ordering};

use objrt::corelib::CoreLib;
use objrt::{Context, ContractLevel, ExKind, Exception, GenericId, Obj, Runtime, Value};

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjrtStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    UnknownName = 3,
    Busy = 4,
    InvalidArgument = 5,
    Panic = 6,
    ExBadAlloc = 16,
    ExBadArity = 17,
    ExBadAssert = 18,
    ExBadCast = 19,
    ExBadDomain = 20,
    ExBadFormat = 21,
    ExBadMessage = 22,
    ExBadProperty = 23,
    ExBadRange = 24,
    ExBadSize = 25,
    ExBadType = 26,
    ExBadValue = 27,
    ExNotFound = 28,
    ExNotImplemented = 29,
    ExNotSupported = 30,
    /// Any other thrown object.
    Exception = 31,
}

impl ObjrtStatus {
    fn of_kind(kind: ExKind) -> Self {
        match kind {
            ExKind::BadAlloc => ObjrtStatus::ExBadAlloc,
            ExKind::BadArity => ObjrtStatus::ExBadArity,
            ExKind::BadAssert => ObjrtStatus::ExBadAssert,
            ExKind::BadCast => ObjrtStatus::ExBadCast,
            ExKind::BadDomain => ObjrtStatus::ExBadDomain,
            ExKind::BadFormat => ObjrtStatus::ExBadFormat,
            ExKind::BadMessage => ObjrtStatus::ExBadMessage,
            ExKind::BadProperty => ObjrtStatus::ExBadProperty,
            ExKind::BadRange => ObjrtStatus::ExBadRange,
            ExKind::BadSize => ObjrtStatus::ExBadSize,
            ExKind::BadType => ObjrtStatus::ExBadType,
            ExKind::BadValue => ObjrtStatus::ExBadValue,
            ExKind::NotFound => ObjrtStatus::ExNotFound,
            ExKind::NotImplemented => ObjrtStatus::ExNotImplemented,
            ExKind::NotSupported => ObjrtStatus::ExNotSupported,
        }
    }

    fn description(self) -> &'static CStr {
        match self {
            ObjrtStatus::Ok => c"ok",
            ObjrtStatus::NullArgument => c"null argument",
            ObjrtStatus::InvalidUtf8 => c"string is not valid UTF-8",
            ObjrtStatus::UnknownName => c"unknown name",
            ObjrtStatus::Busy => c"runtime still has open contexts",
            ObjrtStatus::InvalidArgument => c"invalid argument",
            ObjrtStatus::Panic => c"internal error",
            ObjrtStatus::ExBadAlloc => c"ExBadAlloc",
            ObjrtStatus::ExBadArity => c"ExBadArity",
            ObjrtStatus::ExBadAssert => c"ExBadAssert",
            ObjrtStatus::ExBadCast => c"ExBadCast",
            ObjrtStatus::ExBadDomain => c"ExBadDomain",
            ObjrtStatus::ExBadFormat => c"ExBadFormat",
            ObjrtStatus::ExBadMessage => c"ExBadMessage",
            ObjrtStatus::ExBadProperty => c"ExBadProperty",
            ObjrtStatus::ExBadRange => c"ExBadRange",
            ObjrtStatus::ExBadSize => c"ExBadSize",
            ObjrtStatus::ExBadType => c"ExBadType",
            ObjrtStatus::ExBadValue => c"ExBadValue",
            ObjrtStatus::ExNotFound => c"ExNotFound",
            ObjrtStatus::ExNotImplemented => c"ExNotImplemented",
            ObjrtStatus::ExNotSupported => c"ExNotSupported",
            ObjrtStatus::Exception => c"exception",
        }
    }
}

/// Contract checking level of a context.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjrtContractLevel {
    None = 0,
    Pre = 1,
    Post = 2,
    All = 3,
}

impl From<ObjrtContractLevel> for ContractLevel {
    fn from(l: ObjrtContractLevel) -> Self {
        match l {
            ObjrtContractLevel::None => ContractLevel::None,
            ObjrtContractLevel::Pre => ContractLevel::Pre,
            ObjrtContractLevel::Post => ContractLevel::Post,
            ObjrtContractLevel::All => ContractLevel::All,
        }
    }
}

impl From<ContractLevel> for ObjrtContractLevel {
    fn from(l: ContractLevel) -> Self {
        match l {
            ContractLevel::None => ObjrtContractLevel::None,
            ContractLevel::Pre => ObjrtContractLevel::Pre,
            ContractLevel::Post => ObjrtContractLevel::Post,
            ContractLevel::All => ObjrtContractLevel::All,
        }
    }
}

/// Delegating wrapper classes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjrtProxyKind {
    Proxy = 0,
    Tracer = 1,
    Locker = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjrtValueKind {
    Void = 0,
    Int = 1,
    Float = 2,
    Object = 3,
    /// A value with no C representation (strings, native data).
    Other = 4,
}

/// Return value of a message. `object` is a new handle when `kind` is
/// `OBJRT_VALUE_KIND_OBJECT`, to be freed with `objrt_object_free`.
#[repr(C)]
#[derive(Debug)]
pub struct ObjrtValue {
    pub kind: ObjrtValueKind,
    pub int_value: i64,
    pub float_value: f64,
    pub object: *mut ObjrtObject,
}

impl ObjrtValue {
    fn from_value(v: Value) -> Self {
        let mut out = ObjrtValue {
            kind: ObjrtValueKind::Void,
            int_value: 0,
            float_value: 0.0,
            object: ptr::null_mut(),
        };
        match v {
            Value::Void => {}
            Value::Int(i) => {
                out.kind = ObjrtValueKind::Int;
                out.int_value = i;
            }
            Value::Float(f) => {
                out.kind = ObjrtValueKind::Float;
                out.float_value = f;
            }
            Value::Obj(o) => {
                out.kind = ObjrtValueKind::Object;
                out.object = new_handle(o);
            }
            _ => out.kind = ObjrtValueKind::Other,
        }
        out
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ObjrtCacheStats {
    pub hits: u64,
    pub misses: u64,
    pub substitutions: u64,
    pub evictions: u64,
}

/// A sealed runtime with the core library.
pub struct ObjrtRuntime {
    rt: Runtime,
    lib: CoreLib,
    contexts: AtomicUsize,
}

/// An execution context. Use from one thread at a time.
pub struct ObjrtContext {
    // Borrows `ObjrtRuntime::rt`, kept alive by the context count.
    ctx: Context<'static>,
    owner: *const ObjrtRuntime,
    last_error: Option<CString>,
}

/// A reference to a runtime object.
pub struct ObjrtObject {
    obj: Obj,
}

fn new_handle(obj: Obj) -> *mut ObjrtObject {
    Box::into_raw(Box::new(ObjrtObject { obj }))
}

fn guard(f: impl FnOnce() -> ObjrtStatus) -> ObjrtStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(ObjrtStatus::Panic)
}

impl ObjrtContext {
    fn runtime<'a>(&self) -> &'a ObjrtRuntime {
        // SAFETY: the runtime cannot be freed while this context exists,
        // and is never borrowed mutably.
        unsafe { &*self.owner }
    }

    fn fail(&mut self, ex: Exception) -> ObjrtStatus {
        let rt = self.ctx.runtime();
        let class = ex.class(rt);
        let status = ExKind::ALL
            .iter()
            .find(|&&k| {
                let t = rt.kernel().ex_triple(k);
                rt.registry().is_kind_of(class, t.class) || rt.registry().is_kind_of(class, t.meta)
            })
            .map_or(ObjrtStatus::Exception, |&k| ObjrtStatus::of_kind(k));
        self.last_error = CString::new(ex.to_string().replace('\0', " ")).ok();
        status
    }

    fn finish<T>(&mut self, r: Result<T, Exception>, out: impl FnOnce(T)) -> ObjrtStatus {
        match r {
            Ok(v) => {
                self.last_error = None;
                out(v);
                ObjrtStatus::Ok
            }
            Err(e) => self.fail(e),
        }
    }

    fn note(&mut self, status: ObjrtStatus, what: &str) -> ObjrtStatus {
        self.last_error = CString::new(what).ok();
        status
    }
}

unsafe fn name<'a>(s: *const c_char) -> Result<&'a str, ObjrtStatus> {
    if s.is_null() {
        return Err(ObjrtStatus::NullArgument);
    }
    CStr::from_ptr(s).to_str().map_err(|_| ObjrtStatus::InvalidUtf8)
}

unsafe fn objects(ptrs: *const *const ObjrtObject, n: usize) -> Result<Vec<Obj>, ObjrtStatus> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if ptrs.is_null() {
        return Err(ObjrtStatus::NullArgument);
    }
    std::slice::from_raw_parts(ptrs, n)
        .iter()
        .map(|&p| p.as_ref().map(|h| h.obj.clone()).ok_or(ObjrtStatus::NullArgument))
        .collect()
}

unsafe fn ints<'a>(ptr: *const i64, n: usize) -> Result<&'a [i64], ObjrtStatus> {
    match (n, ptr.is_null()) {
        (0, _) => Ok(&[]),
        (_, true) => Err(ObjrtStatus::NullArgument),
        _ => Ok(std::slice::from_raw_parts(ptr, n)),
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn objrt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn objrt_status_str(status: ObjrtStatus) -> *const c_char {
    status.description().as_ptr()
}

/// Creates a runtime with the core library installed. Returns NULL on
/// failure.
#[no_mangle]
pub extern "C" fn objrt_runtime_new() -> *mut ObjrtRuntime {
    catch_unwind(|| {
        let (rt, lib) = objrt::bench::setup();
        Box::into_raw(Box::new(ObjrtRuntime {
            rt,
            lib,
            contexts: AtomicUsize::new(0),
        }))
    })
    .unwrap_or(ptr::null_mut())
}

/// Frees a runtime. Fails with `OBJRT_STATUS_BUSY` while contexts are open.
///
/// # Safety
/// `rt` must be NULL or a pointer from `objrt_runtime_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn objrt_runtime_free(rt: *mut ObjrtRuntime) -> ObjrtStatus {
    let Some(r) = rt.as_ref() else {
        return ObjrtStatus::Ok;
    };
    if r.contexts.load(Ordering::Acquire) != 0 {
        return ObjrtStatus::Busy;
    }
    drop(Box::from_raw(rt));
    ObjrtStatus::Ok
}

/// Instances allocated and not yet deallocated.
///
/// # Safety
/// `rt` must be a live runtime handle.
#[no_mangle]
pub unsafe extern "C" fn objrt_runtime_live_objects(rt: *const ObjrtRuntime) -> u64 {
    rt.as_ref().map_or(0, |r| r.rt.heap_stats().live())
}

/// Opens a context on `rt`. Returns NULL if `rt` is NULL.
///
/// # Safety
/// `rt` must be NULL or a live runtime handle.
#[no_mangle]
pub unsafe extern "C" fn objrt_context_new(rt: *const ObjrtRuntime) -> *mut ObjrtContext {
    let Some(r) = rt.as_ref() else {
        return ptr::null_mut();
    };
    // SAFETY: the runtime is boxed and outlives the context (see
    // `objrt_runtime_free`).
    let runtime: &'static Runtime = &*ptr::addr_of!(r.rt);
    r.contexts.fetch_add(1, Ordering::AcqRel);
    Box::into_raw(Box::new(ObjrtContext {
        ctx: runtime.context(),
        owner: rt,
        last_error: None,
    }))
}

/// Closes a context, draining its autorelease pools.
///
/// # Safety
/// `ctx` must be NULL or a live context handle.
#[no_mangle]
pub unsafe extern "C" fn objrt_context_free(ctx: *mut ObjrtContext) {
    if ctx.is_null() {
        return;
    }
    let c = Box::from_raw(ctx);
    let owner = c.owner;
    let _ = catch_unwind(AssertUnwindSafe(move || drop(c)));
    (*owner).contexts.fetch_sub(1, Ordering::AcqRel);
}

/// Message of the last failed call on `ctx`, or NULL. Valid until the
/// next call on the same context.
///
/// # Safety
/// `ctx` must be NULL or a live context handle.
#[no_mangle]
pub unsafe extern "C" fn objrt_last_error(ctx: *const ObjrtContext) -> *const c_char {
    ctx.as_ref()
        .and_then(|c| c.last_error.as_ref())
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// # Safety
/// `ctx` must be a live context handle.
#[no_mangle]
pub unsafe extern "C" fn objrt_set_contract_level(ctx: *mut ObjrtContext, level: ObjrtContractLevel) -> ObjrtStatus {
    let Some(c) = ctx.as_mut() else {
        return ObjrtStatus::NullArgument;
    };
    c.ctx.set_contract_level(level.into());
    ObjrtStatus::Ok
}

/// # Safety
/// `ctx` must be a live context handle.
#[no_mangle]
pub unsafe extern "C" fn objrt_contract_level(ctx: *const ObjrtContext) -> ObjrtContractLevel {
    ctx.as_ref()
        .map_or(ObjrtContractLevel::Pre, |c| c.ctx.contract_level().into())
}

/// Turns the message caches of `ctx` on or off.
///
/// # Safety
/// `ctx` must be a live context handle.
#[no_mangle]
pub unsafe extern "C" fn objrt_set_cache_enabled(ctx: *mut ObjrtContext, enabled: bool) -> ObjrtStatus {
    let Some(c) = ctx.as_mut() else {
        return ObjrtStatus::NullArgument;
    };
    c.ctx.set_cache_enabled(enabled);
    ObjrtStatus::Ok
}

/// # Safety
/// `ctx` must be a live context handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn objrt_cache_stats(ctx: *const ObjrtContext, out: *mut ObjrtCacheStats) -> ObjrtStatus {
    let (Some(c), false) = (ctx.as_ref(), out.is_null()) else {
        return ObjrtStatus::NullArgument;
    };
    let s = c.ctx.cache_stats();
    *out = ObjrtCacheStats {
        hits: s.hits,
        misses: s.misses,
        substitutions: s.substitutions,
        evictions: s.evictions,
    };
    ObjrtStatus::Ok
}

/// New `Counter` with count `n`, stored in `*out`.
///
/// # Safety
/// `ctx` must be a live context handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn objrt_counter_new(ctx: *mut ObjrtContext, n: i64, out: *mut *mut ObjrtObject) -> ObjrtStatus {
    let (Some(c), false) = (ctx.as_mut(), out.is_null()) else {
        return ObjrtStatus::NullArgument;
    };
    guard(|| {
        let lib = &c.runtime().lib;
        let r = lib.counters.new_counter(&mut c.ctx, n);
        c.finish(r, |o| *out = new_handle(o))
    })
}

/// New `MilliCounter` with counts `n` and `milli`, stored in `*out`.
///
/// # Safety
/// `ctx` must be a live context handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn objrt_milli_counter_new(
    ctx: *mut ObjrtContext,
    n: i64,
    milli: i64,
    out: *mut *mut ObjrtObject,
) -> ObjrtStatus {
    let (Some(c), false) = (ctx.as_mut(), out.is_null()) else {
        return ObjrtStatus::NullArgument;
    };
    guard(|| {
        let lib = &c.runtime().lib;
        let r = lib.counters.new_milli(&mut c.ctx, n, milli);
        c.finish(r, |o| *out = new_handle(o))
    })
}

/// Wraps `delegate` in a delegating object, stored in `*out`.
///
/// # Safety
/// `ctx` and `delegate` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn objrt_proxy_new(
    ctx: *mut ObjrtContext,
    kind: ObjrtProxyKind,
    delegate: *const ObjrtObject,
    out: *mut *mut ObjrtObject,
) -> ObjrtStatus {
    let (Some(c), Some(d), false) = (ctx.as_mut(), delegate.as_ref(), out.is_null()) else {
        return ObjrtStatus::NullArgument;
    };
    guard(|| {
        let px = &c.runtime().lib.proxies;
        let class = match kind {
            ObjrtProxyKind::Proxy => px.proxy.class,
            ObjrtProxyKind::Tracer => px.tracer.class,
            ObjrtProxyKind::Locker => px.locker.class,
        };
        let r = px.wrap(&mut c.ctx, class, &d.obj);
        c.finish(r, |o| *out = new_handle(o))
    })
}

/// Count of a `Counter` (or subclass) instance.
///
/// # Safety
/// `ctx` and `obj` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn objrt_counter_value(
    ctx: *mut ObjrtContext,
    obj: *const ObjrtObject,
    out: *mut i64,
) -> ObjrtStatus {
    let (Some(c), Some(o), false) = (ctx.as_mut(), obj.as_ref(), out.is_null()) else {
        return ObjrtStatus::NullArgument;
    };
    let r = c.runtime().lib.counters.count(&o.obj);
    c.finish(r, |v| *out = v)
}

fn generic(c: &mut ObjrtContext, selector: &str) -> Result<GenericId, ObjrtStatus> {
    match c.ctx.runtime().generic_id(selector) {
        Some(g) => Ok(g),
        None => Err(c.note(ObjrtStatus::UnknownName, &format!("unknown generic `{selector}`"))),
    }
}

/// Sends the generic named `selector` to `receivers` with integer closed
/// arguments. `out` may be NULL when the result is not wanted.
///
/// # Safety
/// `ctx` must be a live context handle, `selector` a NUL-terminated
/// string, `receivers` an array of `n_receivers` live object handles,
/// `args` an array of `n_args` integers and `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn objrt_send(
    ctx: *mut ObjrtContext,
    selector: *const c_char,
    receivers: *const *const ObjrtObject,
    n_receivers: usize,
    args: *const i64,
    n_args: usize,
    out: *mut ObjrtValue,
) -> ObjrtStatus {
    let Some(c) = ctx.as_mut() else {
        return ObjrtStatus::NullArgument;
    };
    let prepared = (|| {
        let sel = name(selector)?;
        let g = generic(c, sel)?;
        Ok((g, objects(receivers, n_receivers)?, ints(args, n_args)?))
    })();
    let (g, recv, args) = match prepared {
        Ok(p) => p,
        Err(s) => return s,
    };
    let rank = c.ctx.runtime().generic(g).rank;
    if recv.len() != rank {
        return c.note(
            ObjrtStatus::InvalidArgument,
            &format!("generic of rank {rank} given {} receivers", recv.len()),
        );
    }
    let args: Vec<Value> = args.iter().map(|&i| Value::Int(i)).collect();
    guard(|| {
        let r = c.ctx.send(g, &recv, &args);
        c.finish(r, |v| {
            if !out.is_null() {
                *out = ObjrtValue::from_value(v);
            }
        })
    })
}

/// Whether `receivers` understand the generic named `selector` (without
/// falling back to delegation).
///
/// # Safety
/// As for `objrt_send`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn objrt_understands(
    ctx: *mut ObjrtContext,
    selector: *const c_char,
    receivers: *const *const ObjrtObject,
    n_receivers: usize,
    out: *mut bool,
) -> ObjrtStatus {
    let (Some(c), false) = (ctx.as_mut(), out.is_null()) else {
        return ObjrtStatus::NullArgument;
    };
    let prepared = (|| {
        let sel = name(selector)?;
        Ok((generic(c, sel)?, objects(receivers, n_receivers)?))
    })();
    let (g, recv) = match prepared {
        Ok(p) => p,
        Err(s) => return s,
    };
    let classes: Vec<_> = recv.iter().map(Obj::class_id).collect();
    *out = c.ctx.runtime().understands(&classes, g);
    ObjrtStatus::Ok
}

/// Retains `obj`. For automatic objects the retained value is a copy,
/// which replaces the object held by the handle.
///
/// # Safety
/// `ctx` and `obj` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn objrt_retain(ctx: *mut ObjrtContext, obj: *mut ObjrtObject) -> ObjrtStatus {
    let (Some(c), Some(o)) = (ctx.as_mut(), obj.as_mut()) else {
        return ObjrtStatus::NullArgument;
    };
    guard(|| {
        let r = c.ctx.retain(&o.obj);
        c.finish(r, |kept| o.obj = kept)
    })
}

/// Releases `obj`; the object is destroyed when its count reaches zero.
/// The handle stays valid and must still be freed.
///
/// # Safety
/// `ctx` and `obj` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn objrt_release(ctx: *mut ObjrtContext, obj: *const ObjrtObject) -> ObjrtStatus {
    let (Some(c), Some(o)) = (ctx.as_mut(), obj.as_ref()) else {
        return ObjrtStatus::NullArgument;
    };
    guard(|| {
        let r = c.ctx.release(&o.obj);
        c.finish(r, |_| ())
    })
}

/// Frees a handle without touching the object's reference count.
///
/// # Safety
/// `obj` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn objrt_object_free(obj: *mut ObjrtObject) {
    if !obj.is_null() {
        drop(Box::from_raw(obj));
    }
}
