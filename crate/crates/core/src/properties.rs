//! Properties: `P_name` class-objects, class bindings realized as `ggetAt`
//! and `gputAt` specializations, key-value coding and enumeration.

use std::sync::Arc;

use crate::dispatch::Context;
use crate::error::DefineError;
use crate::exceptions::{ExKind, Exception};
use crate::id::ClassId;
use crate::object_model::ClassTriple;
use crate::runtime::Runtime;
use crate::value::{Obj, Value};

/// Boxes an attribute value (or the whole object) into an object.
pub type Getter = Arc<dyn Fn(&mut Context<'_>, Value) -> Result<Obj, Exception> + Send + Sync>;
/// Unboxes an object into an attribute value.
pub type Putter = Arc<dyn Fn(&mut Context<'_>, &Obj) -> Result<Value, Exception> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Readable,
    Writable,
}

const PREFIX: &str = "P_";

pub(crate) fn install(rt: &mut Runtime) -> Result<(), DefineError> {
    let k = rt.kernel().clone();
    let (object, mprop) = (k.object.class, k.property.meta);
    rt.method(k.gget_at, &[object, mprop]).define(|ctx, frame| {
        Err(bad_property(ctx.runtime(), frame.this(), frame.recv(1), "no such property"))
    })?;
    rt.method(k.gput_at, &[object, mprop, object]).define(|ctx, frame| {
        Err(bad_property(ctx.runtime(), frame.this(), frame.recv(1), "property is not writable"))
    })?;
    Ok(())
}

fn bad_property(rt: &Runtime, obj: &Obj, prop: &Obj, what: &str) -> Exception {
    let owner = &rt.registry().get(obj.class_id()).name;
    let name = prop
        .as_class()
        .map(|c| property_name(rt, c.class).to_string())
        .unwrap_or_default();
    Exception::builtin(ExKind::BadProperty, format!("{what}: {owner}.{name}"))
}

/// Lowercase name of a property class (`P_value` gives `value`).
pub fn property_name(rt: &Runtime, prop: ClassId) -> &str {
    let name = &rt.registry().get(prop).name;
    name.strip_prefix(PREFIX).unwrap_or(name)
}

impl Runtime {
    /// Registers the property class `P_<name>` under `Property`.
    pub fn define_property(&mut self, name: &str) -> Result<ClassTriple, DefineError> {
        if self.properties.contains_key(name) {
            return Err(DefineError::DuplicateName(name.to_string()));
        }
        let base = self.kernel().property.class;
        let t = self.define_class_object(&format!("{PREFIX}{name}"), Some(base))?;
        self.properties.insert(name.to_string(), t.class);
        Ok(t)
    }

    /// Binds `property` on `owner`. With an attribute path the getter sees
    /// the attribute's value, otherwise the whole object. Without a putter
    /// the binding is read-only.
    pub fn bind_property(
        &mut self,
        owner: ClassId,
        property: ClassId,
        attribute: Option<&str>,
        getter: Getter,
        putter: Option<Putter>,
    ) -> Result<(), DefineError> {
        let k = self.kernel().clone();
        let prop = self
            .triple(property)
            .filter(|t| self.registry().is_kind_of(t.class, k.property.class) && t.class != k.property.class)
            .ok_or_else(|| DefineError::UnknownProperty(format!("{property:?}")))?;
        let slot = attribute.map(|a| self.slot(owner, a)).transpose()?;
        if self
            .methods()
            .find(k.gget_at, &[owner, prop.meta], crate::methods::MethodKind::Primary)
            .is_some()
        {
            return Err(DefineError::RebindingConflict(
                self.registry().get(property).name.clone(),
                self.registry().get(owner).name.clone(),
            ));
        }
        if putter.is_some() && slot.is_none() {
            return Err(DefineError::UnknownAttribute("()".into()));
        }
        self.method(k.gget_at, &[owner, prop.meta]).define(move |ctx, frame| {
            let v = match slot {
                Some(s) => frame.this().get(s)?,
                None => Value::Obj(frame.this().clone()),
            };
            let out = getter(ctx, v)?;
            frame.set_ret(out);
            Ok(())
        })?;
        let put = &[owner, prop.meta, k.object.class];
        match (putter, slot) {
            (Some(putter), Some(slot)) => {
                self.method(k.gput_at, put).define(move |ctx, frame| {
                    let v = putter(ctx, frame.recv(2))?;
                    frame.this().set(slot, v)
                })?;
            }
            _ => {
                let m = self.method(k.gput_at, put).define(|ctx, frame| {
                    Err(bad_property(ctx.runtime(), frame.this(), frame.recv(1), "property is read-only"))
                })?;
                self.mark_read_only_stub(m);
            }
        }
        Ok(())
    }

    /// Properties readable (or writable) on instances of `class`,
    /// including those bound on its superclasses, in definition order.
    pub fn properties_of(&self, class: ClassId, access: Access) -> Vec<ClassId> {
        let k = self.kernel();
        let reg = self.registry();
        let methods = self.methods();
        let mut props: Vec<ClassId> = self.properties.values().copied().collect();
        props.sort_by_key(|&p| reg.get(p).seq);
        props.retain(|&p| {
            let pm = reg.get(p).property_metaclass.expect("paired class");
            let get = methods.select(reg, k.gget_at, &[class, pm]);
            let readable = get.is_some_and(|m| methods.get(m).specializers[1] != k.property.meta);
            match access {
                Access::Readable => readable,
                Access::Writable => {
                    readable
                        && methods
                            .select(reg, k.gput_at, &[class, pm, k.object.class])
                            .is_some_and(|m| {
                                let d = methods.get(m);
                                !d.read_only_stub && d.specializers[1] != k.property.meta
                            })
                }
            }
        });
        props
    }
}

impl Context<'_> {
    pub fn get_at(&mut self, obj: &Obj, property: ClassId) -> Result<Obj, Exception> {
        let rt = self.runtime();
        let g = rt.kernel().gget_at;
        let p = rt.class_object(property);
        self.send_obj(g, &[obj.clone(), p], &[])
    }

    pub fn put_at(&mut self, obj: &Obj, property: ClassId, value: &Obj) -> Result<(), Exception> {
        let rt = self.runtime();
        let g = rt.kernel().gput_at;
        let p = rt.class_object(property);
        self.send(g, &[obj.clone(), p, value.clone()], &[]).map(drop)
    }

    fn resolve_key(&self, key: &str) -> Result<ClassId, Exception> {
        self.runtime()
            .property(key)
            .ok_or_else(|| Exception::builtin(ExKind::BadProperty, format!("unknown property key `{key}`")))
    }

    /// Property access by name.
    pub fn kvc_get(&mut self, obj: &Obj, key: &str) -> Result<Obj, Exception> {
        let p = self.resolve_key(key)?;
        self.get_at(obj, p)
    }

    pub fn kvc_put(&mut self, obj: &Obj, key: &str, value: &Obj) -> Result<(), Exception> {
        let p = self.resolve_key(key)?;
        self.put_at(obj, p, value)
    }
}
