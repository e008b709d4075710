//! Design by contract: pre/post/body phases gated by a per-context level,
//! assertions and class invariants.

use std::str::FromStr;
use std::sync::Arc;

use crate::dispatch::{Context, Frame};
use crate::error::DefineError;
use crate::exceptions::{ExKind, Exception, Origin};
use crate::methods::MethodId;
use crate::runtime::MethodBuilder;
use crate::value::{Obj, Value};

/// Which contract sections run. Each level includes the ones below it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContractLevel {
    None,
    #[default]
    Pre,
    Post,
    All,
}

impl ContractLevel {
    pub const ALL_LEVELS: [ContractLevel; 4] = [
        ContractLevel::None,
        ContractLevel::Pre,
        ContractLevel::Post,
        ContractLevel::All,
    ];

    pub fn runs_pre(self) -> bool {
        self >= ContractLevel::Pre
    }

    pub fn runs_post(self) -> bool {
        self >= ContractLevel::Post
    }

    pub fn runs_invariants(self) -> bool {
        self == ContractLevel::All
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown contract level `{0}` (expected none, pre, post or all)")]
pub struct ParseLevelError(String);

impl FromStr for ContractLevel {
    type Err = ParseLevelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(ContractLevel::None),
            "pre" => Ok(ContractLevel::Pre),
            "post" => Ok(ContractLevel::Post),
            "all" => Ok(ContractLevel::All),
            _ => Err(ParseLevelError(s.to_string())),
        }
    }
}

/// Raises `ExBadAssert` when `cond` is false.
pub fn test_assert(cond: bool, message: &str, origin: Option<Origin>) -> Result<(), Exception> {
    if cond {
        return Ok(());
    }
    let ex = Exception::builtin(ExKind::BadAssert, message);
    Err(match origin {
        Some(o) => ex.at(o),
        None => ex,
    })
}

/// `test_assert!(cond)` or `test_assert!(cond, "message")`, recording the
/// call site.
#[macro_export]
macro_rules! test_assert {
    ($cond:expr) => {
        $crate::contracts::test_assert($cond, stringify!($cond), Some($crate::origin!()))
    };
    ($cond:expr, $msg:expr) => {
        $crate::contracts::test_assert($cond, $msg, Some($crate::origin!()))
    };
}

/// Sends `ginvariant` to `obj` with the caller's location.
pub fn test_invariant(ctx: &mut Context<'_>, obj: &Obj, origin: Origin) -> Result<(), Exception> {
    let g = ctx.runtime().kernel().ginvariant;
    ctx.send(
        g,
        std::slice::from_ref(obj),
        &[
            Value::str(&origin.func),
            Value::str(&origin.file),
            Value::Int(origin.line as i64),
        ],
    )
    .map(drop)
}

/// Location passed to a `ginvariant` method, for propagating into its
/// assertions.
pub fn invariant_origin(frame: &Frame<'_>) -> Origin {
    Origin::new(frame.str(0), frame.str(1), frame.int(2) as u32)
}

type PreHook<L> = Box<dyn Fn(&mut Context<'_>, &Frame<'_>, &mut L) -> Result<(), Exception> + Send + Sync>;
type PostHook<L> = Box<dyn Fn(&mut Context<'_>, &Frame<'_>, &L) -> Result<(), Exception> + Send + Sync>;
type BodyHook<L> = Box<dyn Fn(&mut Context<'_>, &mut Frame<'_>, &mut L) -> Result<(), Exception> + Send + Sync>;

/// A method body with optional pre and post sections. `L` is the capture
/// area shared by the sections of one invocation (values saved in PRE for
/// use in POST).
pub struct Contract<L> {
    pre: Option<PreHook<L>>,
    post: Option<PostHook<L>>,
    body: BodyHook<L>,
}

impl<L: Default + 'static> Contract<L> {
    pub fn new(
        body: impl Fn(&mut Context<'_>, &mut Frame<'_>, &mut L) -> Result<(), Exception> + Send + Sync + 'static,
    ) -> Self {
        Contract {
            pre: None,
            post: None,
            body: Box::new(body),
        }
    }

    pub fn pre(
        mut self,
        f: impl Fn(&mut Context<'_>, &Frame<'_>, &mut L) -> Result<(), Exception> + Send + Sync + 'static,
    ) -> Self {
        self.pre = Some(Box::new(f));
        self
    }

    pub fn post(
        mut self,
        f: impl Fn(&mut Context<'_>, &Frame<'_>, &L) -> Result<(), Exception> + Send + Sync + 'static,
    ) -> Self {
        self.post = Some(Box::new(f));
        self
    }

    /// Runs the sections enabled by the context's level. At `All`, the
    /// invariant of each distinct receiver is checked after POST, once per
    /// send (frames entered through `next_method` leave it to the caller).
    pub fn run(&self, ctx: &mut Context<'_>, frame: &mut Frame<'_>) -> Result<(), Exception> {
        let level = ctx.contract_level();
        let mut locals = L::default();
        if level.runs_pre() {
            if let Some(pre) = &self.pre {
                pre(ctx, frame, &mut locals)?;
            }
        }
        (self.body)(ctx, frame, &mut locals)?;
        if level.runs_post() {
            if let Some(post) = &self.post {
                post(ctx, frame, &locals)?;
            }
        }
        if level.runs_invariants() && !frame.is_chained() {
            let receivers = frame.receivers();
            for (i, r) in receivers.iter().enumerate() {
                if receivers[..i].iter().any(|p| p.ptr_eq(r)) {
                    continue;
                }
                test_invariant(ctx, r, crate::origin!())?;
            }
        }
        Ok(())
    }
}

impl MethodBuilder<'_> {
    /// Defines the method with a contracted body.
    pub fn contract<L>(self, contract: Contract<L>) -> Result<MethodId, DefineError>
    where
        L: Default + 'static,
        Contract<L>: Send + Sync,
    {
        let c = Arc::new(contract);
        self.define(move |ctx, frame| c.run(ctx, frame))
    }
}
