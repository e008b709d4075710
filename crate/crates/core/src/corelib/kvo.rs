//! Key-value observing as a pattern: around methods on the property
//! accessors post notifications before and after every access.

use std::sync::Arc;

use parking_lot::Mutex;

use crate::error::DefineError;
use crate::id::ClassId;
use crate::properties::property_name;
use crate::runtime::Runtime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Before,
    After,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Notification {
    pub phase: Phase,
    pub property: String,
    /// `true` for writes.
    pub put: bool,
}

/// Collects notifications; a stub for a real observer registry.
#[derive(Debug, Clone, Default)]
pub struct NotificationCenter {
    log: Arc<Mutex<Vec<Notification>>>,
}

impl NotificationCenter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn notifications(&self) -> Vec<Notification> {
        self.log.lock().clone()
    }

    pub fn clear(&self) {
        self.log.lock().clear();
    }

    fn post(&self, phase: Phase, property: &str, put: bool) {
        self.log.lock().push(Notification {
            phase,
            property: property.to_string(),
            put,
        });
    }

    /// Observes reads and writes of `property` on `owner` (and subclasses).
    /// Call before sealing.
    pub fn observe(&self, rt: &mut Runtime, owner: ClassId, property: ClassId) -> Result<(), DefineError> {
        let k = rt.kernel().clone();
        let meta = rt
            .triple(property)
            .ok_or_else(|| DefineError::UnknownProperty(format!("{property:?}")))?
            .meta;
        let name: Arc<str> = Arc::from(property_name(rt, property));
        for (g, specs, put) in [
            (k.gget_at, vec![owner, meta], false),
            (k.gput_at, vec![owner, meta, k.object.class], true),
        ] {
            let (center, name) = (self.clone(), name.clone());
            rt.method(g, &specs).around().define(move |ctx, f| {
                center.post(Phase::Before, &name, put);
                let out = ctx.next_method(f);
                center.post(Phase::After, &name, put);
                out
            })?;
        }
        Ok(())
    }
}
