//! Method specializations: ordering, applicability, selection and
//! next-method resolution.
//!
//! Methods of a generic are totally ordered by a key derived from the ranks
//! of their specializers: the sum of ranks first (more derived is more
//! specific), then the rank vector compared left to right, then around
//! before primary, then later registration before earlier. The next method
//! of `m` is the greatest method below `m` whose specializers are pointwise
//! superclasses of `m`'s.

use std::cmp::Ordering;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::dispatch::{Context, Frame};
use crate::error::DefineError;
use crate::exceptions::Exception;
use crate::generics::GenericId;
use crate::id::ClassId;
use crate::object_model::Registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodId(pub(crate) u32);

impl MethodId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MethodKind {
    Primary,
    Around,
}

/// Uniform calling shape shared by every method implementation: the frame
/// carries the selector, receivers, packed closed arguments and return slot.
pub type MethodFn = dyn Fn(&mut Context<'_>, &mut Frame<'_>) -> Result<(), Exception> + Send + Sync;
pub type MethodImpl = Arc<MethodFn>;

pub type Specializers = SmallVec<[ClassId; 5]>;

#[derive(Clone)]
pub struct MethodDescriptor {
    pub id: MethodId,
    pub generic: GenericId,
    pub specializers: Specializers,
    pub kind: MethodKind,
    pub seq: u32,
    /// Alternate generic for `next_method` (the `defnext` path).
    pub next_path: Option<GenericId>,
    pub(crate) ranks: SmallVec<[u32; 5]>,
    pub(crate) imp: MethodImpl,
    pub(crate) next: Option<MethodId>,
    /// Marks accessor stubs that reject writes (read-only properties).
    pub(crate) read_only_stub: bool,
    pub(crate) forward: Option<Forward>,
}

/// A method that only re-sends its message with the receiver at
/// `position` replaced by the object held in the link attribute `slot`.
/// The dispatcher runs such methods inline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Forward {
    pub position: usize,
    pub slot: crate::value::SlotIndex,
}

impl std::fmt::Debug for MethodDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MethodDescriptor")
            .field("id", &self.id)
            .field("generic", &self.generic)
            .field("specializers", &self.specializers)
            .field("kind", &self.kind)
            .field("seq", &self.seq)
            .finish()
    }
}

impl MethodDescriptor {
    pub fn rank_sum(&self) -> u32 {
        self.ranks.iter().sum()
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn next_method(&self) -> Option<MethodId> {
        self.next
    }

    pub fn forwarding(&self) -> Option<Forward> {
        self.forward
    }

    fn key_cmp(&self, other: &MethodDescriptor) -> Ordering {
        self.rank_sum()
            .cmp(&other.rank_sum())
            .then_with(|| self.ranks.cmp(&other.ranks))
            .then_with(|| self.kind.cmp(&other.kind))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

#[derive(Default)]
pub struct MethodTable {
    methods: Vec<MethodDescriptor>,
    /// Per generic, most specific first.
    by_generic: Vec<Vec<MethodId>>,
}

impl MethodTable {
    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn get(&self, id: MethodId) -> &MethodDescriptor {
        &self.methods[id.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &MethodDescriptor> {
        self.methods.iter()
    }

    pub(crate) fn ensure_generic(&mut self, g: GenericId) {
        if self.by_generic.len() <= g.index() {
            self.by_generic.resize_with(g.index() + 1, Vec::new);
        }
    }

    /// Methods of `g`, most specific first.
    pub fn of_generic(&self, g: GenericId) -> &[MethodId] {
        self.by_generic.get(g.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn find(&self, g: GenericId, specializers: &[ClassId], kind: MethodKind) -> Option<MethodId> {
        self.of_generic(g).iter().copied().find(|&m| {
            let d = self.get(m);
            d.kind == kind && d.specializers.as_slice() == specializers
        })
    }

    pub(crate) fn push(&mut self, mut desc: MethodDescriptor) -> MethodId {
        let id = MethodId(self.methods.len() as u32);
        desc.id = id;
        let g = desc.generic;
        self.ensure_generic(g);
        self.methods.push(desc);
        let list = &mut self.by_generic[g.index()];
        let methods = &self.methods;
        let pos = list
            .iter()
            .position(|&other| methods[id.index()].key_cmp(&methods[other.index()]) == Ordering::Greater)
            .unwrap_or(list.len());
        list.insert(pos, id);
        id
    }

    pub(crate) fn set_forward(&mut self, m: MethodId, fw: Forward) {
        self.methods[m.index()].forward = Some(fw);
    }

    pub(crate) fn set_read_only_stub(&mut self, m: MethodId) {
        self.methods[m.index()].read_only_stub = true;
    }

    /// Total order on the methods of one generic.
    pub fn specialization_order(&self, a: MethodId, b: MethodId) -> Result<Ordering, DefineError> {
        let (ma, mb) = (self.get(a), self.get(b));
        if ma.generic != mb.generic {
            return Err(DefineError::DifferentGeneric);
        }
        Ok(ma.key_cmp(mb))
    }

    pub fn applicable(&self, reg: &Registry, m: MethodId, receivers: &[ClassId]) -> bool {
        let d = self.get(m);
        d.specializers.len() == receivers.len()
            && d
                .specializers
                .iter()
                .zip(receivers)
                .all(|(&spec, &recv)| reg.is_kind_of(recv, spec))
    }

    /// Most specific applicable method of `g` for the receiver classes.
    pub fn select(&self, reg: &Registry, g: GenericId, receivers: &[ClassId]) -> Option<MethodId> {
        self.of_generic(g)
            .iter()
            .copied()
            .find(|&m| self.applicable(reg, m, receivers))
    }

    fn pointwise_super(reg: &Registry, candidate: &[ClassId], anchor: &[ClassId]) -> bool {
        candidate.len() == anchor.len()
            && candidate
                .iter()
                .zip(anchor)
                .all(|(&c, &a)| reg.is_kind_of(a, c))
    }

    /// Next method below `anchor`. With an alternate generic the anchor is
    /// re-expressed as that generic specialized on the same classes, and
    /// methods on exactly those classes are skipped.
    pub fn next_method_of(
        &self,
        reg: &Registry,
        anchor: MethodId,
        alternate: Option<GenericId>,
    ) -> Option<MethodId> {
        let a = self.get(anchor);
        match alternate {
            None => self.of_generic(a.generic).iter().copied().find(|&m| {
                let d = self.get(m);
                m != anchor
                    && d.key_cmp(a) == Ordering::Less
                    && Self::pointwise_super(reg, &d.specializers, &a.specializers)
            }),
            Some(g) => self.of_generic(g).iter().copied().find(|&m| {
                let d = self.get(m);
                d.specializers != a.specializers
                    && Self::pointwise_super(reg, &d.specializers, &a.specializers)
            }),
        }
    }

    /// Precomputes every method's next link. Called when sealing.
    pub(crate) fn link_next(&mut self, reg: &Registry) {
        let links: Vec<Option<MethodId>> = (0..self.methods.len())
            .map(|i| {
                let m = MethodId(i as u32);
                self.next_method_of(reg, m, self.methods[i].next_path)
            })
            .collect();
        for (m, next) in self.methods.iter_mut().zip(links) {
            m.next = next;
        }
    }
}
