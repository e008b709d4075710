//! An embeddable dynamic object runtime: classes with metaclasses and
//! property metaclasses, generic functions of rank 1 to 5 with multiple
//! dispatch, per-context message caches, delegation, contracts,
//! exceptions, properties, ownership and functors.
//!
//! Setup happens on a mutable [`Runtime`]; [`Runtime::seal`] freezes it and
//! [`Runtime::context`] hands out execution contexts that send messages.

pub mod bench;
pub mod contracts;
pub mod corelib;
pub mod dispatch;
pub mod error;
pub mod exceptions;
pub mod functors;
pub mod generics;
pub mod id;
pub mod lifecycle;
pub mod methods;
pub mod object_model;
pub mod properties;
pub mod runtime;
pub mod value;

pub use contracts::{Contract, ContractLevel};
pub use dispatch::{CacheStats, Context, DispatchConfig, Frame};
pub use error::{ClassChangeError, DefineError, LookupError};
pub use exceptions::{ExKind, Exception, Origin, Protected};
pub use generics::{GenericId, Param};
pub use id::ClassId;
pub use methods::{MethodId, MethodKind};
pub use object_model::{ClassKind, ClassTriple};
pub use runtime::{HeapStats, Kernel, Runtime};
pub use value::{Obj, Rc, SlotIndex, TypeTag, Value};
