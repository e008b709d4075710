//! Object references, boxed values and instance storage.

use std::any::Any;
use std::fmt;
use std::sync::atomic::{AtomicI64, AtomicU32, AtomicU64, AtomicU8, Ordering};
use std::sync::{Arc, OnceLock};

use parking_lot::Mutex;

use crate::exceptions::{ExKind, Exception};
use crate::id::ClassId;

/// Type tags for closed parameters, return values and attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeTag {
    Int,
    Float,
    Obj,
    Str,
    Bytes(usize),
    /// Host-side payload; attributes only.
    Native,
    /// Object reference set once, then read without locking; attributes
    /// only.
    Link,
}

impl TypeTag {
    /// Storage size in bytes, used for instance sizes and argument packs.
    pub fn size(self) -> usize {
        match self {
            TypeTag::Int | TypeTag::Float | TypeTag::Obj | TypeTag::Str | TypeTag::Native | TypeTag::Link => 8,
            TypeTag::Bytes(n) => n,
        }
    }

    pub fn zero(self) -> Value {
        match self {
            TypeTag::Int => Value::Int(0),
            TypeTag::Float => Value::Float(0.0),
            TypeTag::Obj | TypeTag::Native | TypeTag::Link => Value::Void,
            TypeTag::Str => Value::Str(Arc::from("")),
            TypeTag::Bytes(n) => Value::Bytes(Arc::from(vec![0u8; n])),
        }
    }

    pub fn admits(self, value: &Value) -> bool {
        match (self, value) {
            (TypeTag::Int, Value::Int(_))
            | (TypeTag::Float, Value::Float(_))
            | (TypeTag::Obj | TypeTag::Link, Value::Obj(_))
            | (TypeTag::Str, Value::Str(_))
            | (TypeTag::Native, Value::Native(_)) => true,
            (TypeTag::Bytes(n), Value::Bytes(b)) => b.len() == n,
            _ => false,
        }
    }
}

/// A dynamically typed value: closed arguments, return slots, attributes.
#[derive(Clone, Default)]
pub enum Value {
    #[default]
    Void,
    Int(i64),
    Float(f64),
    Obj(Obj),
    Str(Arc<str>),
    Bytes(Arc<[u8]>),
    Native(Arc<dyn Any + Send + Sync>),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            Value::Float(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_obj(&self) -> Option<&Obj> {
        match self {
            Value::Obj(o) => Some(o),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_void(&self) -> bool {
        matches!(self, Value::Void)
    }

    pub fn str(s: &str) -> Value {
        Value::Str(Arc::from(s))
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Void => write!(f, "Void"),
            Value::Int(i) => write!(f, "Int({i})"),
            Value::Float(x) => write!(f, "Float({x})"),
            Value::Obj(o) => write!(f, "{o:?}"),
            Value::Str(s) => write!(f, "Str({s:?})"),
            Value::Bytes(b) => write!(f, "Bytes({b:?})"),
            Value::Native(_) => write!(f, "Native(..)"),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Void, Value::Void) => true,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a == b,
            (Value::Obj(a), Value::Obj(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Bytes(a), Value::Bytes(b)) => a == b,
            (Value::Native(a), Value::Native(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<Obj> for Value {
    fn from(v: Obj) -> Self {
        Value::Obj(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::str(v)
    }
}

/// A class used as an ordinary receiver. `dispatch` is the class of the
/// class-object: the property metaclass for ordinary classes, `MetaClass` or
/// `PropMetaClass` for metaclasses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassObject {
    pub class: ClassId,
    pub dispatch: ClassId,
}

/// Reference to an object: a heap instance or a class-object.
#[derive(Clone)]
pub enum Obj {
    Instance(Arc<Instance>),
    Class(ClassObject),
}

impl Obj {
    /// Class identity word used for dispatch. Released instances report 0.
    #[inline]
    pub fn class_word(&self) -> u32 {
        match self {
            Obj::Instance(i) => i.id.load(Ordering::Acquire),
            Obj::Class(c) => c.dispatch.word(),
        }
    }

    #[inline]
    pub fn class_id(&self) -> ClassId {
        ClassId::from_word(self.class_word())
    }

    pub fn as_instance(&self) -> Option<&Arc<Instance>> {
        match self {
            Obj::Instance(i) => Some(i),
            Obj::Class(_) => None,
        }
    }

    pub fn as_class(&self) -> Option<ClassObject> {
        match self {
            Obj::Class(c) => Some(*c),
            Obj::Instance(_) => None,
        }
    }

    pub fn is_class_object(&self) -> bool {
        matches!(self, Obj::Class(_))
    }

    pub fn ptr_eq(&self, other: &Obj) -> bool {
        match (self, other) {
            (Obj::Instance(a), Obj::Instance(b)) => Arc::ptr_eq(a, b),
            (Obj::Class(a), Obj::Class(b)) => a.class == b.class,
            _ => false,
        }
    }

    /// Ownership word; class-objects are static.
    pub fn rc(&self) -> Rc {
        match self {
            Obj::Instance(i) => i.rc(),
            Obj::Class(_) => Rc::Static,
        }
    }

    fn instance(&self) -> Result<&Instance, Exception> {
        match self {
            Obj::Instance(i) => Ok(i),
            Obj::Class(_) => Err(Exception::builtin(
                ExKind::BadType,
                "class-object has no attributes",
            )),
        }
    }

    #[inline]
    fn slot(&self, idx: SlotIndex) -> Result<&Slot, Exception> {
        let inst = self.instance()?;
        inst.slots
            .get(idx.0 as usize)
            .ok_or_else(|| Exception::builtin(ExKind::BadRange, "attribute index out of range"))
    }

    #[inline]
    pub fn get_int(&self, idx: SlotIndex) -> Result<i64, Exception> {
        match self.slot(idx)? {
            Slot::Int(v) => Ok(v.load(Ordering::Relaxed)),
            _ => Err(slot_type_error()),
        }
    }

    #[inline]
    pub fn set_int(&self, idx: SlotIndex, value: i64) -> Result<(), Exception> {
        match self.slot(idx)? {
            Slot::Int(v) => {
                v.store(value, Ordering::Relaxed);
                Ok(())
            }
            _ => Err(slot_type_error()),
        }
    }

    pub fn get_float(&self, idx: SlotIndex) -> Result<f64, Exception> {
        match self.slot(idx)? {
            Slot::Float(v) => Ok(f64::from_bits(v.load(Ordering::Relaxed))),
            _ => Err(slot_type_error()),
        }
    }

    pub fn set_float(&self, idx: SlotIndex, value: f64) -> Result<(), Exception> {
        match self.slot(idx)? {
            Slot::Float(v) => {
                v.store(value.to_bits(), Ordering::Relaxed);
                Ok(())
            }
            _ => Err(slot_type_error()),
        }
    }

    /// Reads any attribute as a [`Value`].
    pub fn get(&self, idx: SlotIndex) -> Result<Value, Exception> {
        Ok(self.slot(idx)?.load())
    }

    /// Writes an attribute; the value must match the slot's storage class.
    pub fn set(&self, idx: SlotIndex, value: Value) -> Result<(), Exception> {
        self.slot(idx)?.store(value)
    }

    pub fn get_obj(&self, idx: SlotIndex) -> Result<Obj, Exception> {
        match self.get(idx)? {
            Value::Obj(o) => Ok(o),
            _ => Err(slot_type_error()),
        }
    }

    /// Borrows a link attribute.
    #[inline]
    pub fn link(&self, idx: SlotIndex) -> Result<&Obj, Exception> {
        match self.slot(idx)? {
            Slot::Link(cell) => cell
                .get()
                .ok_or_else(|| Exception::builtin(ExKind::BadValue, "link attribute not set")),
            _ => Err(slot_type_error()),
        }
    }

    /// Runs `f` on the attribute object without cloning the reference.
    #[inline]
    pub fn with_obj<R>(&self, idx: SlotIndex, f: impl FnOnce(&Obj) -> R) -> Result<R, Exception> {
        match self.slot(idx)? {
            Slot::Ref(cell) => match &*cell.lock() {
                Value::Obj(o) => Ok(f(o)),
                _ => Err(slot_type_error()),
            },
            _ => Err(slot_type_error()),
        }
    }
}

fn slot_type_error() -> Exception {
    Exception::builtin(ExKind::BadType, "attribute type mismatch")
}

impl PartialEq for Obj {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other)
    }
}

impl fmt::Debug for Obj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obj::Instance(i) => write!(
                f,
                "Instance({:#08x}@{:p})",
                i.id.load(Ordering::Relaxed) & crate::id::IDENTITY_MASK,
                Arc::as_ptr(i)
            ),
            Obj::Class(c) => write!(f, "ClassObject({:#08x})", c.class.identity()),
        }
    }
}

/// Index of an attribute inside an instance, resolved once at setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlotIndex(pub(crate) u32);

impl SlotIndex {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Reference-count word with the AUTO and STATIC sentinels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rc {
    Counted(u32),
    Auto,
    Static,
}

pub(crate) const RC_AUTO: u32 = u32::MAX;
pub(crate) const RC_STATIC: u32 = u32::MAX - 1;

impl Rc {
    fn decode(word: u32) -> Rc {
        match word {
            RC_AUTO => Rc::Auto,
            RC_STATIC => Rc::Static,
            n => Rc::Counted(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum LifeState {
    Live = 0,
    Deallocated = 1,
    Expired = 2,
}

pub(crate) enum Slot {
    Int(AtomicI64),
    Float(AtomicU64),
    Ref(Mutex<Value>),
    Link(OnceLock<Obj>),
}

impl Slot {
    pub(crate) fn for_tag(tag: TypeTag) -> Slot {
        match tag {
            TypeTag::Int => Slot::Int(AtomicI64::new(0)),
            TypeTag::Float => Slot::Float(AtomicU64::new(0f64.to_bits())),
            TypeTag::Link => Slot::Link(OnceLock::new()),
            other => Slot::Ref(Mutex::new(other.zero())),
        }
    }

    fn load(&self) -> Value {
        match self {
            Slot::Int(v) => Value::Int(v.load(Ordering::Relaxed)),
            Slot::Float(v) => Value::Float(f64::from_bits(v.load(Ordering::Relaxed))),
            Slot::Ref(v) => v.lock().clone(),
            Slot::Link(v) => v.get().map_or(Value::Void, |o| Value::Obj(o.clone())),
        }
    }

    fn store(&self, value: Value) -> Result<(), Exception> {
        match (self, value) {
            (Slot::Int(cell), Value::Int(i)) => cell.store(i, Ordering::Relaxed),
            (Slot::Float(cell), Value::Float(x)) => cell.store(x.to_bits(), Ordering::Relaxed),
            (Slot::Ref(cell), v @ (Value::Obj(_)
            | Value::Str(_)
            | Value::Bytes(_)
            | Value::Native(_)
            | Value::Void)) => *cell.lock() = v,
            (Slot::Link(cell), Value::Obj(o)) => {
                if !cell.get().is_some_and(|held| held.ptr_eq(&o)) && cell.set(o).is_err() {
                    return Err(Exception::builtin(ExKind::BadValue, "link attribute already set"));
                }
            }
            (Slot::Link(cell), Value::Void) if cell.get().is_none() => {}
            _ => return Err(slot_type_error()),
        }
        Ok(())
    }
}

/// Heap object: header (`id`, `rc`) followed by attribute storage.
pub struct Instance {
    pub(crate) id: AtomicU32,
    pub(crate) rc: AtomicU32,
    pub(crate) size: u32,
    pub(crate) state: AtomicU8,
    pub(crate) slots: Box<[Slot]>,
}

impl Instance {
    pub(crate) fn new(class: ClassId, size: u32, tags: impl Iterator<Item = TypeTag>, rc: u32) -> Self {
        Instance {
            id: AtomicU32::new(class.word()),
            rc: AtomicU32::new(rc),
            size,
            state: AtomicU8::new(LifeState::Live as u8),
            slots: tags.map(Slot::for_tag).collect(),
        }
    }

    pub fn rc(&self) -> Rc {
        Rc::decode(self.rc.load(Ordering::Acquire))
    }

    pub fn allocated_size(&self) -> u32 {
        self.size
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn state(&self) -> LifeState {
        match self.state.load(Ordering::Acquire) {
            0 => LifeState::Live,
            1 => LifeState::Deallocated,
            _ => LifeState::Expired,
        }
    }

    pub(crate) fn copy_slots_from(&self, other: &Instance) -> Result<(), Exception> {
        for (dst, src) in self.slots.iter().zip(other.slots.iter()) {
            dst.store(src.load())?;
        }
        Ok(())
    }

    /// Marks the instance unusable; subsequent sends fail the class lookup.
    pub(crate) fn retire(&self, state: LifeState) {
        self.state.store(state as u8, Ordering::Release);
        self.id.store(0, Ordering::Release);
    }
}
