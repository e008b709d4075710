use thiserror::Error;

/// Errors raised while populating the runtime (classes, generics, methods,
/// properties). Runtime failures during message sends are exceptions, see
/// [`crate::exceptions::Exception`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DefineError {
    #[error("identity space exhausted")]
    CapacityExhausted,
    #[error("registry is sealed")]
    Sealed,
    #[error("registry is not sealed yet")]
    NotSealed,
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown superclass for `{0}`")]
    UnknownSuperclass(String),
    #[error("superclass `{0}` cannot be derived")]
    NotDerivable(String),
    #[error("generic rank {0} outside 1..=5")]
    RankOutOfRange(usize),
    #[error("unknown generic `{0}`")]
    UnknownGeneric(String),
    #[error("signature mismatch at parameter {position}: {reason}")]
    SignatureMismatch { position: usize, reason: String },
    #[error("expected {expected} specializers, got {got}")]
    SpecializerCount { expected: usize, got: usize },
    #[error("duplicate primary method for `{0}`")]
    DuplicateMethod(String),
    #[error("incompatible generics `{0}` and `{1}`")]
    IncompatibleGenerics(String, String),
    #[error("no source method for alias of `{0}`")]
    SourceMethodMissing(String),
    #[error("incompatible alternate next path `{0}`")]
    IncompatibleAlternate(String),
    #[error("methods belong to different generics")]
    DifferentGeneric,
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("property `{0}` already bound on `{1}`")]
    RebindingConflict(String, String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
}

/// Errors from dynamic class changes.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassChangeError {
    #[error("target is not a superclass of the object's class")]
    NotASuperclass,
    #[error("classes do not share the given superclass")]
    NoCommonSuperclass,
    #[error("target instance size {target} exceeds allocated size {allocated}")]
    SizeExceeded { target: u32, allocated: u32 },
    #[error("receiver is not an instance")]
    NotAnInstance,
}

/// Class lookup failure (`class_of` on 0 or an identity never issued).
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("no class registered for identity {0:#x}")]
pub struct LookupError(pub u32);
