//! The runtime: class registry, generics and method tables, kernel classes
//! and the setup-time definition API. After [`Runtime::seal`] everything is
//! read-only and may be shared by any number of [`Context`]s.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;
use smallvec::SmallVec;

use crate::dispatch::{Context, DispatchConfig, Frame};
use crate::error::DefineError;
use crate::exceptions::{ExKind, Exception};
use crate::generics::{GenericDescriptor, GenericId, Param};
use crate::id::ClassId;
use crate::methods::{Forward, MethodDescriptor, MethodId, MethodImpl, MethodKind, MethodTable, Specializers};
use crate::object_model::{ClassDescriptor, ClassKind, ClassTriple, MetaRoots, Registry};
use crate::value::{ClassObject, Instance, Obj, SlotIndex, TypeTag, Value, RC_STATIC};

/// Ids of the classes and generics every runtime starts with.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub object: ClassTriple,
    pub nil: ClassTriple,
    pub behavior: ClassTriple,
    pub class: ClassTriple,
    pub metaclass: ClassTriple,
    pub prop_metaclass: ClassTriple,
    pub property: ClassTriple,
    pub predicate: ClassTriple,
    pub true_false: ClassTriple,
    pub true_: ClassTriple,
    pub false_: ClassTriple,
    pub exception: ClassTriple,
    pub auto_release: ClassTriple,
    ex: Vec<ClassTriple>,
    pub ex_str_slot: SlotIndex,
    pub ex_obj_slot: SlotIndex,
    /// `gunrecognizedMessage1..5`.
    pub gum: [GenericId; 5],
    pub galloc: GenericId,
    pub ginit: GenericId,
    pub ginit_with: GenericId,
    pub gdeinit: GenericId,
    pub gdealloc: GenericId,
    pub gretain: GenericId,
    pub grelease: GenericId,
    pub gauto_release: GenericId,
    pub gauto_delete: GenericId,
    pub gdelete: GenericId,
    pub gclone: GenericId,
    pub gclass: GenericId,
    pub gis_kind_of: GenericId,
    pub ginitialize: GenericId,
    pub gdeinitialize: GenericId,
    pub ginvariant: GenericId,
    pub gget_at: GenericId,
    pub gput_at: GenericId,
    pub lazy: ClassTriple,
    pub var: ClassTriple,
    pub functor: ClassTriple,
    pub(crate) var_slot: SlotIndex,
    pub(crate) term_slot: SlotIndex,
    /// `geval`, `geval1` .. `geval4`.
    pub geval: [GenericId; 5],
}

impl Kernel {
    pub fn ex(&self, kind: ExKind) -> ClassId {
        self.ex[kind.index()].class
    }

    pub fn ex_triple(&self, kind: ExKind) -> ClassTriple {
        self.ex[kind.index()]
    }
}

/// Decides whether an allocation of the given class may proceed.
pub type AllocHook = Arc<dyn Fn(&ClassDescriptor) -> bool + Send + Sync>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct HeapStats {
    pub allocations: u64,
    pub deallocations: u64,
}

impl HeapStats {
    pub fn live(&self) -> u64 {
        self.allocations - self.deallocations
    }
}

#[derive(Default)]
struct HeapCounters {
    allocations: AtomicU64,
    deallocations: AtomicU64,
}

pub struct Runtime {
    registry: Registry,
    generics: Vec<GenericDescriptor>,
    generic_names: HashMap<String, GenericId>,
    methods: MethodTable,
    kernel: Option<Kernel>,
    pub(crate) properties: HashMap<String, ClassId>,
    heap: HeapCounters,
    alloc_hook: Option<AllocHook>,
    config: DispatchConfig,
    next_seq: u32,
    sealed: bool,
}

impl Default for Runtime {
    fn default() -> Self {
        Runtime::new()
    }
}

impl std::fmt::Debug for Runtime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Runtime")
            .field("classes", &self.registry.len())
            .field("generics", &self.generics.len())
            .field("methods", &self.methods.len())
            .field("sealed", &self.sealed)
            .finish()
    }
}

impl Runtime {
    /// A runtime holding the kernel classes, generics and default methods.
    pub fn new() -> Self {
        let mut rt = Runtime {
            registry: Registry::new(),
            generics: Vec::new(),
            generic_names: HashMap::new(),
            methods: MethodTable::default(),
            kernel: None,
            properties: HashMap::new(),
            heap: HeapCounters::default(),
            alloc_hook: None,
            config: DispatchConfig::default(),
            next_seq: 0,
            sealed: false,
        };
        rt.bootstrap().expect("kernel bootstrap");
        rt
    }

    fn bootstrap(&mut self) -> Result<(), DefineError> {
        let reg = &mut self.registry;
        let object = reg.define_raw("Object", None, &[], ClassKind::Ordinary)?;
        let behavior = reg.define_raw("Behavior", Some(object), &[], ClassKind::Ordinary)?;
        let class = reg.define_raw("Class", Some(behavior), &[], ClassKind::Ordinary)?;
        let metaclass = reg.define_raw("MetaClass", Some(class), &[], ClassKind::Ordinary)?;
        let prop_metaclass = reg.define_raw("PropMetaClass", Some(metaclass), &[], ClassKind::Ordinary)?;
        reg.roots = Some(MetaRoots {
            class,
            metaclass,
            prop_metaclass,
        });
        let object = reg.pair_metaclasses(object)?;
        let behavior = reg.pair_metaclasses(behavior)?;
        let class = reg.pair_metaclasses(class)?;
        let metaclass = reg.pair_metaclasses(metaclass)?;
        let prop_metaclass = reg.pair_metaclasses(prop_metaclass)?;

        let co = ClassKind::ClassObject;
        let nil = reg.define_class_of_kind("Nil", None, &[], co)?;
        let property = reg.define_class_of_kind("Property", Some(object.class), &[], co)?;
        let predicate = reg.define_class_of_kind("Predicate", Some(object.class), &[], co)?;
        let true_false = reg.define_class_of_kind("TrueFalse", Some(predicate.class), &[], co)?;
        let true_ = reg.define_class_of_kind("True", Some(true_false.class), &[], co)?;
        let false_ = reg.define_class_of_kind("False", Some(true_false.class), &[], co)?;
        let exception = reg.define_class(
            "Exception",
            Some(object.class),
            &[("str", TypeTag::Str), ("obj", TypeTag::Obj)],
        )?;
        let ex_str_slot = reg.slot(exception.class, "str")?;
        let ex_obj_slot = reg.slot(exception.class, "obj")?;
        let ex = ExKind::ALL
            .iter()
            .map(|k| reg.define_class(k.class_name(), Some(exception.class), &[]))
            .collect::<Result<Vec<_>, _>>()?;
        let auto_release = reg.define_class("AutoRelease", Some(object.class), &[])?;
        let lazy = reg.define_class("Lazy", Some(object.class), &[])?;
        let var = reg.define_class("Var", Some(lazy.class), &[("index", TypeTag::Int)])?;
        let functor = reg.define_class("Functor", Some(lazy.class), &[("term", TypeTag::Native)])?;
        let var_slot = reg.slot(var.class, "index")?;
        let term_slot = reg.slot(functor.class, "term")?;

        let obj = Some(TypeTag::Obj);
        let mut gum = [GenericId(0); 5];
        for (i, g) in gum.iter_mut().enumerate() {
            *g = self.define_generic(&format!("gunrecognizedMessage{}", i + 1), i + 1, &[], obj)?;
        }
        let mut geval = [GenericId(0); 5];
        for (i, g) in geval.iter_mut().enumerate() {
            let name = if i == 0 { "geval".to_string() } else { format!("geval{i}") };
            *g = self.define_generic(&name, i + 1, &[], obj)?;
        }
        let s = |n: &str, t| Param::new(n, t);
        let kernel = Kernel {
            object,
            nil,
            behavior,
            class,
            metaclass,
            prop_metaclass,
            property,
            predicate,
            true_false,
            true_,
            false_,
            exception,
            auto_release,
            ex,
            ex_str_slot,
            ex_obj_slot,
            gum,
            galloc: self.define_generic("galloc", 1, &[], obj)?,
            ginit: self.define_generic("ginit", 1, &[], obj)?,
            ginit_with: self.define_generic("ginitWith", 2, &[], obj)?,
            gdeinit: self.define_generic("gdeinit", 1, &[], obj)?,
            gdealloc: self.define_generic("gdealloc", 1, &[], None)?,
            gretain: self.define_generic("gretain", 1, &[], obj)?,
            grelease: self.define_generic("grelease", 1, &[], None)?,
            gauto_release: self.define_generic("gautoRelease", 1, &[], obj)?,
            gauto_delete: self.define_generic("gautoDelete", 1, &[], obj)?,
            gdelete: self.define_generic("gdelete", 1, &[], None)?,
            gclone: self.define_generic("gclone", 1, &[], obj)?,
            gclass: self.define_generic("gclass", 1, &[], obj)?,
            gis_kind_of: self.define_generic("gisKindOf", 2, &[], obj)?,
            ginitialize: self.define_generic("ginitialize", 1, &[], None)?,
            gdeinitialize: self.define_generic("gdeinitialize", 1, &[], None)?,
            ginvariant: self.define_generic(
                "ginvariant",
                1,
                &[s("func", TypeTag::Str), s("file", TypeTag::Str), s("line", TypeTag::Int)],
                None,
            )?,
            gget_at: self.define_generic("ggetAt", 2, &[], obj)?,
            gput_at: self.define_generic("gputAt", 3, &[], None)?,
            lazy,
            var,
            functor,
            var_slot,
            term_slot,
            geval,
        };
        self.kernel = Some(kernel);
        self.install_kernel_methods()?;
        crate::lifecycle::install(self)?;
        crate::properties::install(self)?;
        crate::functors::install(self)?;
        Ok(())
    }

    fn install_kernel_methods(&mut self) -> Result<(), DefineError> {
        let k = self.kernel().clone();
        let object = k.object.class;
        for rank in 1..=5 {
            let specs = vec![object; rank];
            self.method(k.gum[rank - 1], &specs).define(|ctx, frame| {
                let name = &ctx.runtime().generic(frame.sel()).name;
                Err(Exception::builtin(
                    ExKind::BadMessage,
                    format!("message {name} not understood"),
                ))
            })?;
            // Nil absorbs every message it does not understand.
            let mut specs = specs;
            specs[0] = k.nil.meta;
            self.method(k.gum[rank - 1], &specs).define(|ctx, frame| {
                let nil = ctx.runtime().nil();
                frame.set_ret(nil);
                Ok(())
            })?;
        }
        self.method(k.gclass, &[object]).define(|ctx, frame| {
            let rt = ctx.runtime();
            let cls = rt.class_object(rt.class_of(frame.this()));
            frame.set_ret(cls);
            Ok(())
        })?;
        self.method(k.gis_kind_of, &[object, k.class.class]).define(|ctx, frame| {
            let rt = ctx.runtime();
            let target = frame.recv(1).as_class().map(|c| c.class).unwrap_or(ClassId::NIL);
            let yes = rt.registry().is_kind_of(rt.class_of(frame.this()), target);
            frame.set_ret(if yes { rt.true_obj() } else { rt.false_obj() });
            Ok(())
        })?;
        self.method(k.ginitialize, &[object]).define(|_, _| Ok(()))?;
        self.method(k.gdeinitialize, &[object]).define(|_, _| Ok(()))?;
        self.method(k.ginvariant, &[object]).define(|_, _| Ok(()))?;
        Ok(())
    }

    pub fn kernel(&self) -> &Kernel {
        self.kernel.as_ref().expect("kernel")
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn methods(&self) -> &MethodTable {
        &self.methods
    }

    pub fn is_sealed(&self) -> bool {
        self.sealed
    }

    fn check_open(&self) -> Result<(), DefineError> {
        if self.sealed {
            Err(DefineError::Sealed)
        } else {
            Ok(())
        }
    }

    pub fn define_class(
        &mut self,
        name: &str,
        superclass: Option<ClassId>,
        attributes: &[(&str, TypeTag)],
    ) -> Result<ClassTriple, DefineError> {
        self.registry.define_class(name, superclass, attributes)
    }

    /// Defines a class meant to be used only as a class-object receiver.
    pub fn define_class_object(&mut self, name: &str, superclass: Option<ClassId>) -> Result<ClassTriple, DefineError> {
        self.registry
            .define_class_of_kind(name, superclass, &[], ClassKind::ClassObject)
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.registry.id(name)
    }

    /// Full triple of a registered ordinary or class-object class.
    pub fn triple(&self, class: ClassId) -> Option<ClassTriple> {
        let d = self.registry.class_of(class).ok()?;
        Some(ClassTriple {
            class,
            meta: d.metaclass?,
            prop_meta: d.property_metaclass?,
        })
    }

    pub fn define_generic(
        &mut self,
        name: &str,
        rank: usize,
        closed: &[Param],
        ret: Option<TypeTag>,
    ) -> Result<GenericId, DefineError> {
        self.check_open()?;
        if self.generic_names.contains_key(name) {
            return Err(DefineError::DuplicateName(name.to_string()));
        }
        let id = GenericId(self.generics.len() as u32);
        // Validate the rank before consuming an identity.
        GenericDescriptor::new(id, name, rank, closed.to_vec(), ret, 1)?;
        let sel_id = self.registry.next_identity()?;
        let desc = GenericDescriptor::new(id, name, rank, closed.to_vec(), ret, sel_id)?;
        self.generics.push(desc);
        self.generic_names.insert(name.to_string(), id);
        self.methods.ensure_generic(id);
        Ok(id)
    }

    #[inline]
    pub fn generic(&self, id: GenericId) -> &GenericDescriptor {
        &self.generics[id.index()]
    }

    pub fn generic_id(&self, name: &str) -> Option<GenericId> {
        self.generic_names.get(name).copied()
    }

    pub fn generics(&self) -> &[GenericDescriptor] {
        &self.generics
    }

    /// Starts a method definition for `generic` specialized on `specializers`.
    pub fn method(&mut self, generic: GenericId, specializers: &[ClassId]) -> MethodBuilder<'_> {
        MethodBuilder {
            rt: self,
            generic,
            specializers: specializers.iter().copied().collect(),
            kind: MethodKind::Primary,
            params: None,
            next_path: None,
        }
    }

    fn add_method(
        &mut self,
        generic: GenericId,
        specializers: Specializers,
        kind: MethodKind,
        params: Option<Vec<Param>>,
        next_path: Option<GenericId>,
        imp: MethodImpl,
    ) -> Result<MethodId, DefineError> {
        self.check_open()?;
        let gen = self
            .generics
            .get(generic.index())
            .ok_or_else(|| DefineError::UnknownGeneric(format!("#{}", generic.index())))?;
        if specializers.len() != gen.rank {
            return Err(DefineError::SpecializerCount {
                expected: gen.rank,
                got: specializers.len(),
            });
        }
        if let Some(p) = &params {
            gen.validate_specialization_signature(p)?;
        }
        let mut ranks = SmallVec::new();
        for &s in &specializers {
            let d = self
                .registry
                .class_of(s)
                .map_err(|_| DefineError::UnknownClass(format!("{s:?}")))?;
            ranks.push(d.rank);
        }
        if let Some(alt) = next_path {
            let a = self
                .generics
                .get(alt.index())
                .ok_or_else(|| DefineError::UnknownGeneric(format!("#{}", alt.index())))?;
            let prefix = a.closed.len() <= gen.closed.len() && gen.closed[..a.closed.len()] == a.closed[..];
            if a.rank != gen.rank || !prefix {
                return Err(DefineError::IncompatibleAlternate(a.name.clone()));
            }
        }
        if kind == MethodKind::Primary && self.methods.find(generic, &specializers, kind).is_some() {
            return Err(DefineError::DuplicateMethod(gen.name.clone()));
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        Ok(self.methods.push(MethodDescriptor {
            id: MethodId(0),
            generic,
            specializers,
            kind,
            seq,
            next_path,
            ranks,
            imp,
            next: None,
            read_only_stub: false,
            forward: None,
        }))
    }

    /// Gives `target` a method sharing the implementation of `source`'s
    /// primary method at exactly `specializers`.
    pub fn define_alias(
        &mut self,
        target: GenericId,
        source: GenericId,
        specializers: &[ClassId],
    ) -> Result<MethodId, DefineError> {
        let (t, s) = (self.generic(target), self.generic(source));
        if !t.is_signature_compatible(s) {
            return Err(DefineError::IncompatibleGenerics(t.name.clone(), s.name.clone()));
        }
        let src = self
            .methods
            .find(source, specializers, MethodKind::Primary)
            .ok_or_else(|| DefineError::SourceMethodMissing(t.name.clone()))?;
        let imp = self.methods.get(src).imp.clone();
        self.add_method(
            target,
            specializers.iter().copied().collect(),
            MethodKind::Primary,
            None,
            None,
            imp,
        )
    }

    pub(crate) fn mark_read_only_stub(&mut self, m: MethodId) {
        self.methods.set_read_only_stub(m);
    }

    /// Ends the setup phase: links next methods and freezes all tables.
    pub fn seal(&mut self) {
        if self.sealed {
            return;
        }
        self.methods.link_next(&self.registry);
        self.registry.seal();
        self.sealed = true;
    }

    /// Dispatch configuration used for new contexts.
    pub fn set_dispatch_config(&mut self, config: DispatchConfig) {
        self.config = config;
    }

    /// A new execution context. Panics if the runtime is not sealed.
    pub fn context(&self) -> Context<'_> {
        self.context_with(self.config)
    }

    pub fn context_with(&self, config: DispatchConfig) -> Context<'_> {
        assert!(self.sealed, "runtime must be sealed before creating contexts");
        Context::new(self, config)
    }

    /// Class used for dispatch on `obj`.
    #[inline]
    pub fn class_of(&self, obj: &Obj) -> ClassId {
        obj.class_id()
    }

    /// The class-object for `class`.
    pub fn class_object(&self, class: ClassId) -> Obj {
        let d = self.registry.get(class);
        let roots = self.registry.roots.expect("roots");
        let dispatch = match d.kind {
            ClassKind::MetaClass => roots.metaclass,
            ClassKind::PropertyMetaClass => roots.prop_metaclass,
            _ => d.property_metaclass.expect("paired class"),
        };
        Obj::Class(ClassObject { class, dispatch })
    }

    pub fn nil(&self) -> Obj {
        self.class_object(self.kernel().nil.class)
    }

    pub fn true_obj(&self) -> Obj {
        self.class_object(self.kernel().true_.class)
    }

    pub fn false_obj(&self) -> Obj {
        self.class_object(self.kernel().false_.class)
    }

    pub fn bool_obj(&self, b: bool) -> Obj {
        if b {
            self.true_obj()
        } else {
            self.false_obj()
        }
    }

    pub fn is_nil(&self, obj: &Obj) -> bool {
        obj.as_class().is_some_and(|c| c.class == self.kernel().nil.class)
    }

    /// True iff selection finds a method other than the unrecognized
    /// handler for these receiver classes.
    pub fn understands(&self, receivers: &[ClassId], g: GenericId) -> bool {
        receivers.len() == self.generic(g).rank && self.methods.select(&self.registry, g, receivers).is_some()
    }

    pub fn set_alloc_hook(&mut self, hook: AllocHook) {
        self.alloc_hook = Some(hook);
    }

    pub fn heap_stats(&self) -> HeapStats {
        HeapStats {
            allocations: self.heap.allocations.load(Ordering::Relaxed),
            deallocations: self.heap.deallocations.load(Ordering::Relaxed),
        }
    }

    fn build(&self, class: ClassId, rc: u32) -> Result<Obj, Exception> {
        let d = self
            .registry
            .class_of(class)
            .map_err(|e| Exception::builtin(ExKind::BadValue, e.to_string()))?;
        if d.kind != ClassKind::Ordinary {
            return Err(Exception::builtin(
                ExKind::BadType,
                format!("{} cannot be instantiated", d.name),
            ));
        }
        Ok(Obj::Instance(Arc::new(Instance::new(
            class,
            d.instance_size,
            d.layout().iter().copied(),
            rc,
        ))))
    }

    /// Counted allocation honouring the allocation hook. Failure throws
    /// the `ExBadAlloc` class-object.
    pub(crate) fn allocate(&self, class: ClassId) -> Result<Obj, Exception> {
        if let Some(hook) = &self.alloc_hook {
            let d = self.registry.get(class);
            if !hook(d) {
                let ex = self.class_object(self.kernel().ex(ExKind::BadAlloc));
                return Err(Exception::object(ex).with_message(format!("cannot allocate {}", d.name)));
            }
        }
        let obj = self.build(class, 1)?;
        self.heap.allocations.fetch_add(1, Ordering::Relaxed);
        Ok(obj)
    }

    /// Counted allocation that bypasses the hook (used for exceptions).
    pub fn instantiate(&self, class: ClassId) -> Obj {
        let obj = self.build(class, 1).expect("instantiable class");
        self.heap.allocations.fetch_add(1, Ordering::Relaxed);
        obj
    }

    /// An instance insensitive to ownership messages.
    pub fn make_static(&self, class: ClassId) -> Result<Obj, Exception> {
        self.build(class, RC_STATIC)
    }

    pub(crate) fn build_uncounted(&self, class: ClassId, rc: u32) -> Result<Obj, Exception> {
        self.build(class, rc)
    }

    pub(crate) fn note_dealloc(&self) {
        self.heap.deallocations.fetch_add(1, Ordering::Relaxed);
    }

    /// Slot of `path` in `class` (see [`Registry::slot`]).
    pub fn slot(&self, class: ClassId, path: &str) -> Result<SlotIndex, DefineError> {
        self.registry.slot(class, path)
    }

    /// Property class registered under `name`.
    pub fn property(&self, name: &str) -> Option<ClassId> {
        self.properties.get(name).copied()
    }

    /// Convenience for values returned by sends.
    pub fn value_obj(&self, v: Value) -> Obj {
        match v {
            Value::Obj(o) => o,
            _ => self.nil(),
        }
    }
}

/// Builder for one method specialization.
pub struct MethodBuilder<'a> {
    rt: &'a mut Runtime,
    generic: GenericId,
    specializers: Specializers,
    kind: MethodKind,
    params: Option<Vec<Param>>,
    next_path: Option<GenericId>,
}

impl MethodBuilder<'_> {
    /// Marks the method as an around method.
    pub fn around(mut self) -> Self {
        self.kind = MethodKind::Around;
        self
    }

    /// Declares the closed parameters; checked against the generic.
    pub fn params(mut self, params: &[Param]) -> Self {
        self.params = Some(params.to_vec());
        self
    }

    /// Alternate generic used by `next_method` (`defnext`).
    pub fn next_path(mut self, generic: GenericId) -> Self {
        self.next_path = Some(generic);
        self
    }

    pub fn define<F>(self, f: F) -> Result<MethodId, DefineError>
    where
        F: Fn(&mut Context<'_>, &mut Frame<'_>) -> Result<(), Exception> + Send + Sync + 'static,
    {
        self.define_impl(Arc::new(f))
    }

    pub fn define_impl(self, imp: MethodImpl) -> Result<MethodId, DefineError> {
        self.rt
            .add_method(self.generic, self.specializers, self.kind, self.params, self.next_path, imp)
    }

    /// Defines a method that forwards its message to the object held in
    /// the link attribute `slot` of the receiver at `position`. A returned
    /// delegate is replaced by the forwarding receiver.
    pub fn forward_to(self, position: usize, slot: SlotIndex) -> Result<MethodId, DefineError> {
        let owner = *self
            .specializers
            .get(position)
            .ok_or_else(|| DefineError::UnknownAttribute(format!("receiver {position}")))?;
        let layout = &self.rt.registry().get(owner).layout;
        if layout.get(slot.index()) != Some(&TypeTag::Link) {
            return Err(DefineError::UnknownAttribute(format!("link slot {}", slot.index())));
        }
        let rt = &mut *self.rt;
        let m = rt.add_method(
            self.generic,
            self.specializers,
            self.kind,
            self.params,
            self.next_path,
            Arc::new(move |ctx, frame| {
                let proxy = frame.recv(position);
                let delegate = proxy.link(slot)?;
                let mut rs: SmallVec<[Obj; 5]> = frame.receivers().iter().cloned().collect();
                rs[position] = delegate.clone();
                ctx.forward_message(frame, &rs)?;
                restore_proxy(frame.retval(), delegate, proxy);
                Ok(())
            }),
        )?;
        rt.methods.set_forward(m, Forward { position, slot });
        Ok(m)
    }
}

/// Replaces a returned delegate by the proxy that forwarded to it.
#[inline]
pub(crate) fn restore_proxy(ret: Option<&mut Value>, delegate: &Obj, proxy: &Obj) {
    if let Some(v @ Value::Obj(_)) = ret {
        if v.as_obj().is_some_and(|o| o.ptr_eq(delegate)) {
            *v = Value::Obj(proxy.clone());
        }
    }
}
