//! Class registry: class, metaclass and property-metaclass records, identity
//! lookup, subtype tests and dynamic class change.

use std::collections::HashMap;
use std::sync::atomic::Ordering;

use crate::error::{ClassChangeError, DefineError, LookupError};
use crate::id::{ClassId, IdGenerator};
use crate::value::{Obj, SlotIndex, TypeTag};

/// Bytes taken by the `id`/`rc` header of every instance.
pub const HEADER_SIZE: u32 = 8;

const INITIAL_TABLE: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    Ordinary,
    MetaClass,
    PropertyMetaClass,
    /// A class meant to be used as a receiver rather than instantiated
    /// (`Nil`, `True`, property classes, ...).
    ClassObject,
}

impl ClassKind {
    pub fn is_derivable(self) -> bool {
        matches!(self, ClassKind::Ordinary | ClassKind::ClassObject)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub tag: TypeTag,
    pub size: usize,
}

#[derive(Debug, Clone)]
pub struct ClassDescriptor {
    pub name: String,
    pub id: ClassId,
    pub superclass: Option<ClassId>,
    pub rank: u32,
    pub kind: ClassKind,
    /// Attributes declared by this class; inherited ones precede them.
    pub attributes: Vec<Attribute>,
    pub slot_base: u32,
    pub instance_size: u32,
    pub metaclass: Option<ClassId>,
    pub property_metaclass: Option<ClassId>,
    /// For metaclasses: the class they describe.
    pub owner: Option<ClassId>,
    pub seq: u32,
    pub(crate) layout: Vec<TypeTag>,
    super_index: Option<u32>,
}

impl ClassDescriptor {
    pub fn slot_count(&self) -> usize {
        self.layout.len()
    }

    pub fn layout(&self) -> &[TypeTag] {
        &self.layout
    }

    pub fn is_root(&self) -> bool {
        self.superclass.is_none()
    }
}

/// The class, its metaclass and its property metaclass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassTriple {
    pub class: ClassId,
    pub meta: ClassId,
    pub prop_meta: ClassId,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct MetaRoots {
    pub class: ClassId,
    pub metaclass: ClassId,
    pub prop_metaclass: ClassId,
}

#[derive(Debug)]
pub struct Registry {
    classes: Vec<ClassDescriptor>,
    table: Vec<u32>,
    by_name: HashMap<String, u32>,
    ids: IdGenerator,
    sealed: bool,
    pub(crate) roots: Option<MetaRoots>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::new()
    }
}

impl Registry {
    pub fn new() -> Self {
        Registry {
            classes: Vec::new(),
            table: vec![0; INITIAL_TABLE],
            by_name: HashMap::new(),
            ids: IdGenerator::default(),
            sealed: false,
            roots: None,
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn table_size(&self) -> usize {
        self.table.len()
    }

    pub fn is_sealed(&self) -> bool {
        self.sealed
    }

    pub(crate) fn seal(&mut self) {
        self.sealed = true;
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDescriptor> {
        self.classes.iter()
    }

    /// Draws the next identity from the shared class/selector stream.
    pub(crate) fn next_identity(&mut self) -> Result<u32, DefineError> {
        if self.sealed {
            return Err(DefineError::Sealed);
        }
        self.ids.next_identity()
    }

    pub fn allocate_class_id(&mut self, rank: u32) -> Result<ClassId, DefineError> {
        if self.sealed {
            return Err(DefineError::Sealed);
        }
        self.ids.allocate_class_id(rank)
    }

    fn index_of(&self, identity: u32) -> Option<u32> {
        if identity == 0 {
            return None;
        }
        let mask = self.table.len() - 1;
        let mut pos = identity as usize & mask;
        loop {
            match self.table[pos] {
                0 => return None,
                n => {
                    if self.classes[(n - 1) as usize].id.identity() == identity {
                        return Some(n - 1);
                    }
                }
            }
            pos = (pos + 1) & mask;
        }
    }

    fn place(table: &mut [u32], identity: u32, index: u32) {
        let mask = table.len() - 1;
        let mut pos = identity as usize & mask;
        while table[pos] != 0 {
            pos = (pos + 1) & mask;
        }
        table[pos] = index + 1;
    }

    fn insert(&mut self, desc: ClassDescriptor) -> ClassId {
        let id = desc.id;
        let index = self.classes.len() as u32;
        self.by_name.insert(desc.name.clone(), index);
        self.classes.push(desc);
        if (self.classes.len() * 4) > self.table.len() * 3 {
            let mut grown = vec![0u32; self.table.len() * 2];
            for (i, c) in self.classes.iter().enumerate() {
                Self::place(&mut grown, c.id.identity(), i as u32);
            }
            self.table = grown;
        } else {
            Self::place(&mut self.table, id.identity(), index);
        }
        id
    }

    /// Masked-index lookup of a class record.
    pub fn class_of(&self, id: ClassId) -> Result<&ClassDescriptor, LookupError> {
        self.index_of(id.identity())
            .map(|i| &self.classes[i as usize])
            .ok_or(LookupError(id.identity()))
    }

    /// Lookup for ids known to be registered.
    pub fn get(&self, id: ClassId) -> &ClassDescriptor {
        self.class_of(id)
            .unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn by_name(&self, name: &str) -> Option<&ClassDescriptor> {
        self.by_name.get(name).map(|&i| &self.classes[i as usize])
    }

    pub fn id(&self, name: &str) -> Option<ClassId> {
        self.by_name(name).map(|c| c.id)
    }

    /// Registers a single class record without metaclass pairing.
    pub(crate) fn define_raw(
        &mut self,
        name: &str,
        superclass: Option<ClassId>,
        attributes: &[(&str, TypeTag)],
        kind: ClassKind,
    ) -> Result<ClassId, DefineError> {
        if self.sealed {
            return Err(DefineError::Sealed);
        }
        if self.by_name.contains_key(name) {
            return Err(DefineError::DuplicateName(name.to_string()));
        }
        let (rank, slot_base, base_size, mut layout, super_index) = match superclass {
            None => (0, 0, HEADER_SIZE, Vec::new(), None),
            Some(sid) => {
                let idx = self
                    .index_of(sid.identity())
                    .ok_or_else(|| DefineError::UnknownSuperclass(name.to_string()))?;
                let sup = &self.classes[idx as usize];
                (
                    sup.rank + 1,
                    sup.layout.len() as u32,
                    sup.instance_size,
                    sup.layout.clone(),
                    Some(idx),
                )
            }
        };
        let attrs: Vec<Attribute> = attributes
            .iter()
            .map(|&(n, tag)| Attribute {
                name: n.to_string(),
                tag,
                size: tag.size(),
            })
            .collect();
        let own_size: usize = attrs.iter().map(|a| a.size).sum();
        layout.extend(attrs.iter().map(|a| a.tag));
        let id = self.ids.allocate_class_id(rank)?;
        let seq = self.classes.len() as u32;
        Ok(self.insert(ClassDescriptor {
            name: name.to_string(),
            id,
            superclass,
            rank,
            kind,
            attributes: attrs,
            slot_base,
            instance_size: base_size + own_size as u32,
            metaclass: None,
            property_metaclass: None,
            owner: None,
            seq,
            layout,
            super_index,
        }))
    }

    /// Creates `mC` and `pmC` for an already registered class.
    pub(crate) fn pair_metaclasses(&mut self, class: ClassId) -> Result<ClassTriple, DefineError> {
        let roots = self.roots.ok_or(DefineError::UnknownClass("Class".into()))?;
        let desc = self.get(class).clone();
        let meta_super = match desc.superclass {
            None => roots.class,
            Some(s) => self
                .get(s)
                .metaclass
                .ok_or_else(|| DefineError::UnknownClass(format!("m{}", self.get(s).name)))?,
        };
        let mname = format!("m{}", desc.name);
        let pmname = format!("pm{}", desc.name);
        if self.by_name.contains_key(&mname) {
            return Err(DefineError::DuplicateName(mname));
        }
        if self.by_name.contains_key(&pmname) {
            return Err(DefineError::DuplicateName(pmname));
        }
        let meta = self.define_raw(&mname, Some(meta_super), &[], ClassKind::MetaClass)?;
        let prop_meta = self.define_raw(&pmname, Some(meta), &[], ClassKind::PropertyMetaClass)?;
        for m in [meta, prop_meta] {
            let i = self.index_of(m.identity()).unwrap() as usize;
            self.classes[i].owner = Some(class);
        }
        let i = self.index_of(class.identity()).unwrap() as usize;
        self.classes[i].metaclass = Some(meta);
        self.classes[i].property_metaclass = Some(prop_meta);
        Ok(ClassTriple {
            class,
            meta,
            prop_meta,
        })
    }

    /// Defines a class with its metaclass and property metaclass.
    /// `superclass == None` declares a root class.
    pub fn define_class(
        &mut self,
        name: &str,
        superclass: Option<ClassId>,
        attributes: &[(&str, TypeTag)],
    ) -> Result<ClassTriple, DefineError> {
        self.define_class_of_kind(name, superclass, attributes, ClassKind::Ordinary)
    }

    pub fn define_class_of_kind(
        &mut self,
        name: &str,
        superclass: Option<ClassId>,
        attributes: &[(&str, TypeTag)],
        kind: ClassKind,
    ) -> Result<ClassTriple, DefineError> {
        if self.sealed {
            return Err(DefineError::Sealed);
        }
        if !kind.is_derivable() {
            return Err(DefineError::NotDerivable(name.to_string()));
        }
        for n in [name.to_string(), format!("m{name}"), format!("pm{name}")] {
            if self.by_name.contains_key(&n) {
                return Err(DefineError::DuplicateName(n));
            }
        }
        if let Some(s) = superclass {
            let sup = self
                .class_of(s)
                .map_err(|_| DefineError::UnknownSuperclass(name.to_string()))?;
            if !sup.kind.is_derivable() {
                return Err(DefineError::NotDerivable(sup.name.clone()));
            }
        }
        let class = self.define_raw(name, superclass, attributes, kind)?;
        self.pair_metaclasses(class)
    }

    /// True iff `ancestor` is on `class`'s superclass chain (inclusive).
    pub fn is_kind_of(&self, class: ClassId, ancestor: ClassId) -> bool {
        if ancestor.rank_bits() > class.rank_bits() {
            return false;
        }
        let Some(mut idx) = self.index_of(class.identity()) else {
            return false;
        };
        let target = ancestor.identity();
        loop {
            let c = &self.classes[idx as usize];
            if c.id.identity() == target {
                return true;
            }
            if c.rank < ancestor.rank_bits() {
                return false;
            }
            match c.super_index {
                Some(s) => idx = s,
                None => return false,
            }
        }
    }

    /// Superclass chain starting at `class` itself.
    pub fn ancestors(&self, class: ClassId) -> Vec<ClassId> {
        let mut out = Vec::new();
        let mut idx = self.index_of(class.identity());
        while let Some(i) = idx {
            let c = &self.classes[i as usize];
            out.push(c.id);
            idx = c.super_index;
        }
        out
    }

    /// Resolves an attribute path to its slot. A bare name refers to an
    /// attribute declared by `class` itself; inherited attributes need the
    /// explicit `Super.attribute` form.
    pub fn slot(&self, class: ClassId, path: &str) -> Result<SlotIndex, DefineError> {
        let (owner, attr) = match path.split_once('.') {
            None => (class, path),
            Some((sup, attr)) => {
                let owner = self
                    .id(sup)
                    .ok_or_else(|| DefineError::UnknownClass(sup.to_string()))?;
                if !self.is_kind_of(class, owner) {
                    return Err(DefineError::UnknownAttribute(path.to_string()));
                }
                (owner, attr)
            }
        };
        let desc = self
            .class_of(owner)
            .map_err(|_| DefineError::UnknownAttribute(path.to_string()))?;
        desc.attributes
            .iter()
            .position(|a| a.name == attr)
            .map(|p| SlotIndex(desc.slot_base + p as u32))
            .ok_or_else(|| DefineError::UnknownAttribute(path.to_string()))
    }

    /// Classes in ascending rank, stable by registration order.
    pub fn by_ascending_rank(&self) -> Vec<ClassId> {
        let mut all: Vec<&ClassDescriptor> = self.classes.iter().collect();
        all.sort_by_key(|c| (c.rank, c.seq));
        all.into_iter().map(|c| c.id).collect()
    }

    fn instance_class(&self, obj: &Obj) -> Result<ClassId, ClassChangeError> {
        match obj {
            Obj::Instance(i) => Ok(ClassId::from_word(i.id.load(Ordering::Acquire))),
            Obj::Class(_) => Err(ClassChangeError::NotAnInstance),
        }
    }

    /// Changes `obj`'s class to one of its superclasses.
    pub fn change_class(&self, obj: &Obj, class: ClassId) -> Result<(), ClassChangeError> {
        let current = self.instance_class(obj)?;
        if !self.is_kind_of(current, class) {
            return Err(ClassChangeError::NotASuperclass);
        }
        let inst = obj.as_instance().unwrap();
        inst.id.store(class.word(), Ordering::Release);
        Ok(())
    }

    /// Changes `obj`'s class to any class sharing the superclass `spr`,
    /// provided the target fits into the allocated storage.
    pub fn unsafe_change_class(
        &self,
        obj: &Obj,
        class: ClassId,
        spr: ClassId,
    ) -> Result<(), ClassChangeError> {
        let current = self.instance_class(obj)?;
        if !self.is_kind_of(current, spr) || !self.is_kind_of(class, spr) {
            return Err(ClassChangeError::NoCommonSuperclass);
        }
        let inst = obj.as_instance().unwrap();
        let target = self
            .class_of(class)
            .map_err(|_| ClassChangeError::NoCommonSuperclass)?
            .instance_size;
        if target > inst.size {
            return Err(ClassChangeError::SizeExceeded {
                target,
                allocated: inst.size,
            });
        }
        inst.id.store(class.word(), Ordering::Release);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal bootstrap: Object, Behavior, Class, MetaClass, PropMetaClass.
    pub(crate) fn bootstrap() -> Registry {
        let mut r = Registry::new();
        let object = r.define_raw("Object", None, &[], ClassKind::Ordinary).unwrap();
        let behavior = r
            .define_raw("Behavior", Some(object), &[], ClassKind::Ordinary)
            .unwrap();
        let class = r
            .define_raw("Class", Some(behavior), &[], ClassKind::Ordinary)
            .unwrap();
        let metaclass = r
            .define_raw("MetaClass", Some(class), &[], ClassKind::Ordinary)
            .unwrap();
        let prop = r
            .define_raw("PropMetaClass", Some(metaclass), &[], ClassKind::Ordinary)
            .unwrap();
        r.roots = Some(MetaRoots {
            class,
            metaclass,
            prop_metaclass: prop,
        });
        for c in [object, behavior, class, metaclass, prop] {
            r.pair_metaclasses(c).unwrap();
        }
        r
    }

    #[test]
    fn root_class_has_rank_zero_and_meta_under_class() {
        let r = bootstrap();
        let object = r.by_name("Object").unwrap();
        assert_eq!(object.rank, 0);
        assert!(object.is_root());
        let m = r.get(object.metaclass.unwrap());
        assert_eq!(m.superclass, r.id("Class"));
    }

    #[test]
    fn counter_metaclass_pairing() {
        let mut r = bootstrap();
        let object = r.id("Object").unwrap();
        let t = r.define_class("Counter", Some(object), &[("cnt", TypeTag::Int)]).unwrap();
        let counter = r.get(t.class);
        assert_eq!(counter.rank, 1);
        assert_eq!(r.get(t.meta).superclass, r.id("mObject"));
        assert_eq!(r.get(t.prop_meta).superclass, Some(t.meta));
        assert_eq!(r.get(t.meta).kind, ClassKind::MetaClass);
        assert_eq!(r.get(t.prop_meta).kind, ClassKind::PropertyMetaClass);
        assert_eq!(t.class.rank_bits(), 1);
    }

    #[test]
    fn milli_counter_layout_and_super_path() {
        let mut r = bootstrap();
        let object = r.id("Object").unwrap();
        let c = r.define_class("Counter", Some(object), &[("cnt", TypeTag::Int)]).unwrap();
        let m = r
            .define_class("MilliCounter", Some(c.class), &[("mcnt", TypeTag::Int)])
            .unwrap();
        let desc = r.get(m.class);
        assert_eq!(desc.rank, 2);
        assert_eq!(desc.layout(), &[TypeTag::Int, TypeTag::Int]);
        assert_eq!(desc.instance_size, HEADER_SIZE + 16);
        assert_eq!(r.slot(m.class, "mcnt").unwrap(), SlotIndex(1));
        assert_eq!(r.slot(m.class, "Counter.cnt").unwrap(), SlotIndex(0));
        assert!(matches!(
            r.slot(m.class, "cnt"),
            Err(DefineError::UnknownAttribute(_))
        ));
    }

    #[test]
    fn define_errors() {
        let mut r = bootstrap();
        let object = r.id("Object").unwrap();
        r.define_class("Counter", Some(object), &[]).unwrap();
        assert!(matches!(
            r.define_class("Counter", Some(object), &[]),
            Err(DefineError::DuplicateName(_))
        ));
        assert!(matches!(
            r.define_class("Orphan", Some(ClassId::new(0xABCDE, 1)), &[]),
            Err(DefineError::UnknownSuperclass(_))
        ));
        let mobj = r.id("mObject").unwrap();
        assert!(matches!(
            r.define_class("Bad", Some(mobj), &[]),
            Err(DefineError::NotDerivable(_))
        ));
        r.seal();
        assert!(matches!(
            r.define_class("Late", Some(object), &[]),
            Err(DefineError::Sealed)
        ));
    }

    #[test]
    fn class_of_round_trip_and_invalid() {
        let r = bootstrap();
        let id = r.id("Class").unwrap();
        assert_eq!(r.class_of(id).unwrap().name, "Class");
        assert!(r.class_of(ClassId::NIL).is_err());
        assert!(r.class_of(ClassId::new(0x123, 0)).is_err());
    }

    #[test]
    fn round_trip_after_table_growth() {
        let mut r = bootstrap();
        let object = r.id("Object").unwrap();
        let mut ids = Vec::new();
        for i in 0..5000 {
            ids.push(r.define_class(&format!("C{i}"), Some(object), &[]).unwrap());
        }
        assert!(r.table_size() > INITIAL_TABLE);
        for (i, t) in ids.iter().enumerate() {
            assert_eq!(r.class_of(t.class).unwrap().name, format!("C{i}"));
            assert_eq!(r.class_of(t.prop_meta).unwrap().name, format!("pmC{i}"));
        }
    }

    #[test]
    fn kind_of_is_reflexive_and_asymmetric() {
        let mut r = bootstrap();
        let object = r.id("Object").unwrap();
        let c = r.define_class("Counter", Some(object), &[]).unwrap();
        let m = r.define_class("MilliCounter", Some(c.class), &[]).unwrap();
        assert!(r.is_kind_of(m.class, c.class));
        assert!(!r.is_kind_of(c.class, m.class));
        assert!(r.is_kind_of(c.class, c.class));
        assert!(r.is_kind_of(m.prop_meta, c.meta));
        assert!(r.is_kind_of(m.prop_meta, r.id("Object").unwrap()));
    }

    #[test]
    fn ascending_rank_is_monotone() {
        let mut r = bootstrap();
        let object = r.id("Object").unwrap();
        let c = r.define_class("A", Some(object), &[]).unwrap();
        r.define_class("B", Some(c.class), &[]).unwrap();
        let order = r.by_ascending_rank();
        let ranks: Vec<u32> = order.iter().map(|&c| r.get(c).rank).collect();
        assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
    }
}
