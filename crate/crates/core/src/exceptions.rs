//! Exceptions and protected blocks.
//!
//! A thrown value is any object, instance or class-object. Method bodies
//! propagate exceptions as `Err` values; [`Protected`] gives the ordered
//! catch / catch-any / finally structure on top of that.

use std::fmt;
use std::sync::Arc;

use crate::dispatch::Context;
use crate::id::ClassId;
use crate::runtime::Runtime;
use crate::value::{Obj, Value};

/// The predefined exception classes, all deriving from `Exception`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExKind {
    BadAlloc,
    BadArity,
    BadAssert,
    BadCast,
    BadDomain,
    BadFormat,
    BadMessage,
    BadProperty,
    BadRange,
    BadSize,
    BadType,
    BadValue,
    NotFound,
    NotImplemented,
    NotSupported,
}

impl ExKind {
    pub const ALL: [ExKind; 15] = [
        ExKind::BadAlloc,
        ExKind::BadArity,
        ExKind::BadAssert,
        ExKind::BadCast,
        ExKind::BadDomain,
        ExKind::BadFormat,
        ExKind::BadMessage,
        ExKind::BadProperty,
        ExKind::BadRange,
        ExKind::BadSize,
        ExKind::BadType,
        ExKind::BadValue,
        ExKind::NotFound,
        ExKind::NotImplemented,
        ExKind::NotSupported,
    ];

    pub fn class_name(self) -> &'static str {
        match self {
            ExKind::BadAlloc => "ExBadAlloc",
            ExKind::BadArity => "ExBadArity",
            ExKind::BadAssert => "ExBadAssert",
            ExKind::BadCast => "ExBadCast",
            ExKind::BadDomain => "ExBadDomain",
            ExKind::BadFormat => "ExBadFormat",
            ExKind::BadMessage => "ExBadMessage",
            ExKind::BadProperty => "ExBadProperty",
            ExKind::BadRange => "ExBadRange",
            ExKind::BadSize => "ExBadSize",
            ExKind::BadType => "ExBadType",
            ExKind::BadValue => "ExBadValue",
            ExKind::NotFound => "ExNotFound",
            ExKind::NotImplemented => "ExNotImplemented",
            ExKind::NotSupported => "ExNotSupported",
        }
    }

    pub(crate) fn index(self) -> usize {
        ExKind::ALL.iter().position(|&k| k == self).unwrap()
    }
}

/// Source location attached to a throw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub func: String,
    pub file: String,
    pub line: u32,
}

impl Origin {
    pub fn new(func: &str, file: &str, line: u32) -> Self {
        Origin {
            func: func.to_string(),
            file: file.to_string(),
            line,
        }
    }
}

/// Captures the current source location as an [`Origin`].
#[macro_export]
macro_rules! origin {
    () => {
        $crate::exceptions::Origin::new(module_path!(), file!(), line!())
    };
}

#[derive(Debug, Clone)]
pub enum Payload {
    Object(Obj),
    /// A predefined exception not materialized as an object yet.
    Builtin(ExKind),
}

struct Inner {
    payload: Payload,
    message: Option<Arc<str>>,
    origin: Option<Origin>,
}

/// A thrown value travelling up the `Err` path.
pub struct Exception(Box<Inner>);

impl Exception {
    pub fn builtin(kind: ExKind, message: impl Into<Arc<str>>) -> Self {
        Exception(Box::new(Inner {
            payload: Payload::Builtin(kind),
            message: Some(message.into()),
            origin: None,
        }))
    }

    /// Throws an arbitrary object (instance or class-object).
    pub fn object(obj: Obj) -> Self {
        Exception(Box::new(Inner {
            payload: Payload::Object(obj),
            message: None,
            origin: None,
        }))
    }

    pub fn with_message(mut self, message: impl Into<Arc<str>>) -> Self {
        self.0.message = Some(message.into());
        self
    }

    pub fn at(mut self, origin: Origin) -> Self {
        self.0.origin = Some(origin);
        self
    }

    pub fn payload(&self) -> &Payload {
        &self.0.payload
    }

    pub fn builtin_kind(&self) -> Option<ExKind> {
        match self.0.payload {
            Payload::Builtin(k) => Some(k),
            Payload::Object(_) => None,
        }
    }

    pub fn message(&self) -> Option<&str> {
        self.0.message.as_deref()
    }

    pub fn origin(&self) -> Option<&Origin> {
        self.0.origin.as_ref()
    }

    /// Class used for handler matching: the instance's class, or the
    /// class of a thrown class-object (its property metaclass).
    pub fn class(&self, rt: &Runtime) -> ClassId {
        match &self.0.payload {
            Payload::Object(o) => o.class_id(),
            Payload::Builtin(k) => rt.kernel().ex(*k),
        }
    }

    pub fn is_kind_of(&self, rt: &Runtime, class: ClassId) -> bool {
        rt.registry().is_kind_of(self.class(rt), class)
    }

    /// The thrown object, creating the instance for predefined kinds.
    pub fn payload_object(&mut self, ctx: &mut Context<'_>) -> Obj {
        match &self.0.payload {
            Payload::Object(o) => o.clone(),
            Payload::Builtin(kind) => {
                let rt = ctx.runtime();
                let class = rt.kernel().ex(*kind);
                let obj = rt.instantiate(class);
                if let Some(msg) = &self.0.message {
                    let _ = obj.set(rt.kernel().ex_str_slot, Value::Str(msg.clone()));
                }
                self.0.payload = Payload::Object(obj.clone());
                obj
            }
        }
    }
}

impl fmt::Debug for Exception {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Exception");
        match &self.0.payload {
            Payload::Builtin(k) => d.field("kind", &k.class_name()),
            Payload::Object(o) => d.field("payload", o),
        };
        if let Some(m) = &self.0.message {
            d.field("message", m);
        }
        if let Some(o) = &self.0.origin {
            d.field("origin", o);
        }
        d.finish()
    }
}

impl fmt::Display for Exception {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.payload {
            Payload::Builtin(k) => write!(f, "{}", k.class_name())?,
            Payload::Object(o) => write!(f, "{o:?}")?,
        }
        if let Some(m) = &self.0.message {
            write!(f, ": {m}")?;
        }
        if let Some(o) = &self.0.origin {
            write!(f, " ({} at {}:{})", o.func, o.file, o.line)?;
        }
        Ok(())
    }
}

impl std::error::Error for Exception {}

type Block<'a> = Box<dyn FnOnce(&mut Context<'_>) -> Result<(), Exception> + 'a>;
type Handler<'a> = Box<dyn FnOnce(&mut Context<'_>, Exception) -> Result<(), Exception> + 'a>;

/// A protected block with ordered handlers and an optional finally clause.
///
/// Handlers are tried in registration order with `is_kind_of`; the first
/// match runs. Returning `Err` from a handler rethrows. The finally clause
/// runs on every exit path; an exception it raises replaces the pending one.
pub struct Protected<'a> {
    body: Block<'a>,
    handlers: Vec<(ClassId, Handler<'a>)>,
    any: Option<Handler<'a>>,
    finally: Option<Block<'a>>,
}

impl<'a> Protected<'a> {
    pub fn new(body: impl FnOnce(&mut Context<'_>) -> Result<(), Exception> + 'a) -> Self {
        Protected {
            body: Box::new(body),
            handlers: Vec::new(),
            any: None,
            finally: None,
        }
    }

    pub fn catch(
        mut self,
        class: ClassId,
        handler: impl FnOnce(&mut Context<'_>, Exception) -> Result<(), Exception> + 'a,
    ) -> Self {
        self.handlers.push((class, Box::new(handler)));
        self
    }

    pub fn catch_any(
        mut self,
        handler: impl FnOnce(&mut Context<'_>, Exception) -> Result<(), Exception> + 'a,
    ) -> Self {
        self.any = Some(Box::new(handler));
        self
    }

    pub fn finally(mut self, block: impl FnOnce(&mut Context<'_>) -> Result<(), Exception> + 'a) -> Self {
        self.finally = Some(Box::new(block));
        self
    }

    pub fn run(self, ctx: &mut Context<'_>) -> Result<(), Exception> {
        let Protected {
            body,
            handlers,
            any,
            finally,
        } = self;
        let outcome = match body(ctx) {
            Ok(()) => Ok(()),
            Err(ex) => {
                let rt = ctx.runtime();
                let class = ex.class(rt);
                let matched = handlers
                    .into_iter()
                    .find(|(c, _)| rt.registry().is_kind_of(class, *c));
                match (matched, any) {
                    (Some((_, handler)), _) => handler(ctx, ex),
                    (None, Some(handler)) => handler(ctx, ex),
                    (None, None) => Err(ex),
                }
            }
        };
        match finally {
            Some(block) => match block(ctx) {
                Ok(()) => outcome,
                Err(e) => Err(e),
            },
            None => outcome,
        }
    }
}
