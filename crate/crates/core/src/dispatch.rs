//! The message engine: frames, argument packs, per-rank caches, sending,
//! forwarding and next-method invocation.

use serde::Serialize;
use smallvec::SmallVec;

use crate::contracts::ContractLevel;
use crate::exceptions::{ExKind, Exception};
use crate::generics::{GenericDescriptor, GenericId, ParamSlot, SignatureLayout, MAX_RANK};
use crate::id::{ClassId, IDENTITY_MASK};
use crate::lifecycle::{Pool, Scope};
use crate::methods::{Forward, MethodId};
use crate::runtime::{restore_proxy, Runtime};
use crate::value::{LifeState, Obj, TypeTag, Value};

/// Maximum entries per cache slot.
pub const CHAIN_LENGTH: usize = 3;

/// `sel_id + Σ receiver_i << (i-1)`, masked. Only identity bits take part.
#[inline]
pub fn hash_slot(sel_id: u32, receivers: &[u32], mask: u32) -> usize {
    let mut h = sel_id;
    for (i, &r) in receivers.iter().enumerate() {
        h = h.wrapping_add((r & IDENTITY_MASK) << i);
    }
    (h & mask) as usize
}

/// Selector id followed by up to five receiver class words.
pub type CacheKey = [u32; MAX_RANK + 1];

#[derive(Clone, Copy, Default)]
struct Entry {
    key: CacheKey,
    method: u32,
}

#[derive(Clone, Copy, Default)]
struct Bucket {
    entries: [Entry; CHAIN_LENGTH],
    len: u8,
}

/// Cache for the generics of one rank. Slots hold at most three entries in
/// insertion order; a fourth evicts the oldest.
pub struct RankCache {
    rank: usize,
    buckets: Vec<Bucket>,
    entries: usize,
    bound: usize,
}

impl RankCache {
    pub fn new(rank: usize, initial_slots: usize, bound: usize) -> Self {
        let initial = initial_slots.max(1).next_power_of_two();
        RankCache {
            rank,
            buckets: vec![Bucket::default(); initial],
            entries: 0,
            bound: bound.max(initial),
        }
    }

    pub fn slots(&self) -> usize {
        self.buckets.len()
    }

    pub fn len(&self) -> usize {
        self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries == 0
    }

    #[inline]
    fn mask(&self) -> u32 {
        (self.buckets.len() - 1) as u32
    }

    #[inline]
    pub fn slot_of(&self, key: &CacheKey) -> usize {
        hash_slot(key[0], &key[1..=self.rank], self.mask())
    }

    #[inline]
    pub fn lookup(&self, key: &CacheKey) -> Option<MethodId> {
        self.lookup_at(self.slot_of(key), key)
    }

    #[inline]
    fn lookup_at(&self, slot: usize, key: &CacheKey) -> Option<MethodId> {
        let b = &self.buckets[slot];
        b.entries[..b.len as usize]
            .iter()
            .find(|e| e.key == *key)
            .map(|e| MethodId(e.method))
    }

    /// Inserts an entry; returns true when the oldest entry of the slot was
    /// evicted to make room.
    pub fn insert(&mut self, key: CacheKey, method: MethodId) -> bool {
        if (self.entries + 1) * 4 > self.buckets.len() * 3 && self.buckets.len() * 2 <= self.bound {
            self.grow();
        }
        let evicted = Self::push(&mut self.buckets, self.rank, key, method.0);
        if !evicted {
            self.entries += 1;
        }
        evicted
    }

    fn push(buckets: &mut [Bucket], rank: usize, key: CacheKey, method: u32) -> bool {
        let mask = (buckets.len() - 1) as u32;
        let b = &mut buckets[hash_slot(key[0], &key[1..=rank], mask)];
        let entry = Entry { key, method };
        if (b.len as usize) < CHAIN_LENGTH {
            b.entries[b.len as usize] = entry;
            b.len += 1;
            false
        } else {
            b.entries.rotate_left(1);
            b.entries[CHAIN_LENGTH - 1] = entry;
            true
        }
    }

    fn grow(&mut self) {
        let mut grown = vec![Bucket::default(); self.buckets.len() * 2];
        let mut count = 0;
        for b in &self.buckets {
            for e in &b.entries[..b.len as usize] {
                if !Self::push(&mut grown, self.rank, e.key, e.method) {
                    count += 1;
                }
            }
        }
        self.buckets = grown;
        self.entries = count;
    }

    /// Longest slot chain currently held.
    pub fn max_chain(&self) -> usize {
        self.buckets.iter().map(|b| b.len as usize).max().unwrap_or(0)
    }

    pub fn clear(&mut self) {
        self.buckets.iter_mut().for_each(|b| b.len = 0);
        self.entries = 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DispatchConfig {
    /// Generics up to this rank without closed parameters skip frame
    /// bookkeeping.
    pub fast_message_rank: usize,
    pub initial_slots: usize,
    pub cache_slot_bound: usize,
}

impl Default for DispatchConfig {
    fn default() -> Self {
        DispatchConfig {
            fast_message_rank: 5,
            initial_slots: 1024,
            cache_slot_bound: 65536,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub substitutions: u64,
    pub evictions: u64,
    pub fast_sends: u64,
    pub framed_sends: u64,
}

/// Closed arguments packed per the generic's signature layout: scalars and
/// raw bytes inline, references as 4-byte indices into a side table.
#[derive(Clone, Default)]
pub struct ArgPack {
    bytes: SmallVec<[u8; 48]>,
    refs: SmallVec<[Value; 2]>,
}

impl ArgPack {
    pub fn new() -> Self {
        ArgPack::default()
    }

    pub fn pack(layout: &SignatureLayout, values: &[Value]) -> Result<Self, Exception> {
        if values.len() != layout.slots.len() {
            return Err(Exception::builtin(
                ExKind::BadArity,
                format!("expected {} closed arguments, got {}", layout.slots.len(), values.len()),
            ));
        }
        let mut pack = ArgPack {
            bytes: SmallVec::from_elem(0, layout.byte_len),
            refs: SmallVec::new(),
        };
        for (i, (slot, v)) in layout.slots.iter().zip(values).enumerate() {
            if !slot.tag.admits(v) {
                return Err(Exception::builtin(
                    ExKind::BadType,
                    format!("closed argument {i}: expected {:?}", slot.tag),
                ));
            }
            let dst = &mut pack.bytes[slot.offset..slot.offset + slot.size];
            match v {
                Value::Int(x) => dst.copy_from_slice(&x.to_le_bytes()),
                Value::Float(x) => dst.copy_from_slice(&x.to_bits().to_le_bytes()),
                Value::Bytes(b) => dst.copy_from_slice(b),
                other => {
                    dst.copy_from_slice(&(pack.refs.len() as u32).to_le_bytes());
                    pack.refs.push(other.clone());
                }
            }
        }
        Ok(pack)
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    #[inline]
    fn word(&self, offset: usize) -> [u8; 8] {
        self.bytes[offset..offset + 8].try_into().unwrap()
    }

    fn ref_at(&self, slot: &ParamSlot) -> &Value {
        let idx = u32::from_le_bytes(self.bytes[slot.offset..slot.offset + 4].try_into().unwrap());
        &self.refs[idx as usize]
    }

    pub fn read(&self, slot: &ParamSlot) -> Value {
        match slot.tag {
            TypeTag::Int => Value::Int(i64::from_le_bytes(self.word(slot.offset))),
            TypeTag::Float => Value::Float(f64::from_bits(u64::from_le_bytes(self.word(slot.offset)))),
            TypeTag::Bytes(n) => Value::Bytes(self.bytes[slot.offset..slot.offset + n].into()),
            _ => self.ref_at(slot).clone(),
        }
    }

    pub fn unpack(&self, layout: &SignatureLayout) -> Vec<Value> {
        layout.slots.iter().map(|s| self.read(s)).collect()
    }

    /// The leading part of the pack covering `layout`, used when a next
    /// method belongs to a generic whose parameters are a prefix.
    pub(crate) fn prefix(&self, layout: &SignatureLayout) -> ArgPack {
        ArgPack {
            bytes: SmallVec::from_slice(&self.bytes[..layout.byte_len]),
            refs: self.refs.iter().take(layout.ref_count).cloned().collect(),
        }
    }
}

const NO_HINT: (u32, u32, MethodId) = (0, 0, MethodId(u32::MAX));

static EMPTY_PACK: ArgPack = ArgPack {
    bytes: SmallVec::new_const(),
    refs: SmallVec::new_const(),
};

/// One in-flight message: selector, receivers, packed closed arguments,
/// return slot and the executing method.
pub struct Frame<'f> {
    sel: GenericId,
    receivers: &'f [Obj],
    args: &'f ArgPack,
    layout: &'f SignatureLayout,
    ret: Option<&'f mut Value>,
    mth: MethodId,
    chained: bool,
}

impl<'f> Frame<'f> {
    pub fn sel(&self) -> GenericId {
        self.sel
    }

    pub fn receivers(&self) -> &'f [Obj] {
        self.receivers
    }

    #[inline]
    pub fn recv(&self, i: usize) -> &'f Obj {
        &self.receivers[i]
    }

    /// First receiver (`self`).
    #[inline]
    pub fn this(&self) -> &'f Obj {
        &self.receivers[0]
    }

    pub fn args(&self) -> &'f ArgPack {
        self.args
    }

    pub fn layout(&self) -> &'f SignatureLayout {
        self.layout
    }

    pub fn method(&self) -> MethodId {
        self.mth
    }

    /// True when this frame was entered through `next_method`.
    pub fn is_chained(&self) -> bool {
        self.chained
    }

    /// Closed argument `i` as a [`Value`].
    pub fn arg(&self, i: usize) -> Value {
        self.args.read(&self.layout.slots[i])
    }

    #[inline]
    pub fn int(&self, i: usize) -> i64 {
        let slot = &self.layout.slots[i];
        debug_assert_eq!(slot.tag, TypeTag::Int);
        i64::from_le_bytes(self.args.word(slot.offset))
    }

    pub fn float(&self, i: usize) -> f64 {
        let slot = &self.layout.slots[i];
        debug_assert_eq!(slot.tag, TypeTag::Float);
        f64::from_bits(u64::from_le_bytes(self.args.word(slot.offset)))
    }

    pub fn str(&self, i: usize) -> &'f str {
        self.args.ref_at(&self.layout.slots[i]).as_str().unwrap_or("")
    }

    pub fn obj(&self, i: usize) -> Option<&'f Obj> {
        self.args.ref_at(&self.layout.slots[i]).as_obj()
    }

    /// The return slot (`RETVAL`); absent for void generics.
    pub fn retval(&mut self) -> Option<&mut Value> {
        self.ret.as_deref_mut()
    }

    pub fn ret(&self) -> Option<&Value> {
        self.ret.as_deref()
    }

    #[inline]
    pub fn set_ret(&mut self, v: impl Into<Value>) {
        if let Some(r) = self.ret.as_deref_mut() {
            *r = v.into();
        }
    }
}

/// Per-execution-context state: dispatch caches, statistics, contract
/// level, autorelease pools and automatic-object scopes.
pub struct Context<'rt> {
    pub(crate) rt: &'rt Runtime,
    caches: Vec<RankCache>,
    config: DispatchConfig,
    stats: CacheStats,
    cache_enabled: bool,
    /// Last delegate resolution of a rank-1 forward: selector id, delegate
    /// class word and method.
    forward_hint: (u32, u32, MethodId),
    pub(crate) contract_level: ContractLevel,
    pub(crate) pools: Vec<Pool>,
    pub(crate) scopes: Vec<Scope>,
    pub(crate) next_scope: u64,
    terminated: bool,
}

impl<'rt> Context<'rt> {
    pub(crate) fn new(rt: &'rt Runtime, config: DispatchConfig) -> Self {
        let caches = (1..=MAX_RANK)
            .map(|r| RankCache::new(r, config.initial_slots, config.cache_slot_bound))
            .collect();
        Context {
            rt,
            caches,
            config,
            stats: CacheStats::default(),
            cache_enabled: true,
            forward_hint: NO_HINT,
            contract_level: ContractLevel::default(),
            pools: vec![Pool::root()],
            scopes: Vec::new(),
            next_scope: 1,
            terminated: false,
        }
    }

    #[inline]
    pub fn runtime(&self) -> &'rt Runtime {
        self.rt
    }

    pub fn config(&self) -> DispatchConfig {
        self.config
    }

    pub fn cache_stats(&self) -> CacheStats {
        self.stats
    }

    pub fn cache(&self, rank: usize) -> &RankCache {
        &self.caches[rank - 1]
    }

    pub fn set_cache_enabled(&mut self, enabled: bool) {
        self.cache_enabled = enabled;
        self.forward_hint = NO_HINT;
    }

    pub fn cache_enabled(&self) -> bool {
        self.cache_enabled
    }

    pub fn invalidate_caches(&mut self) {
        self.caches.iter_mut().for_each(RankCache::clear);
        self.forward_hint = NO_HINT;
    }

    pub fn contract_level(&self) -> ContractLevel {
        self.contract_level
    }

    pub fn set_contract_level(&mut self, level: ContractLevel) {
        self.contract_level = level;
    }

    pub fn set_fast_message_rank(&mut self, rank: usize) {
        self.config.fast_message_rank = rank.min(MAX_RANK);
    }

    /// Finds the method for `g` on `receivers`, substituting the
    /// unrecognized-message handler of the same rank when none applies.
    #[inline(always)]
    fn resolve(&mut self, g: GenericId, sel_id: u32, receivers: &[Obj]) -> Result<MethodId, Exception> {
        let rank = receivers.len();
        let mut key: CacheKey = [0; MAX_RANK + 1];
        key[0] = sel_id;
        let mut h = sel_id;
        for (i, r) in receivers.iter().take(MAX_RANK).enumerate() {
            let w = r.class_word();
            if w & IDENTITY_MASK == 0 {
                return Err(dangling(r));
            }
            key[i + 1] = w;
            h = h.wrapping_add((w & IDENTITY_MASK) << i);
        }
        let cache = &mut self.caches[rank - 1];
        if self.cache_enabled {
            let slot = (h & cache.mask()) as usize;
            if let Some(m) = cache.lookup_at(slot, &key) {
                self.stats.hits += 1;
                return Ok(m);
            }
        }
        self.stats.misses += 1;
        let m = self.select_uncached(g, &key[1..=rank]);
        if self.cache_enabled && self.caches[rank - 1].insert(key, m) {
            self.stats.evictions += 1;
        }
        Ok(m)
    }

    #[cold]
    fn select_uncached(&mut self, g: GenericId, words: &[u32]) -> MethodId {
        let rt = self.rt;
        let classes: SmallVec<[ClassId; MAX_RANK]> = words.iter().map(|&w| ClassId::from_word(w)).collect();
        match rt.methods().select(rt.registry(), g, &classes) {
            Some(m) => m,
            None => {
                self.stats.substitutions += 1;
                let gum = rt.kernel().gum[classes.len() - 1];
                rt.methods()
                    .select(rt.registry(), gum, &classes)
                    .expect("unrecognized-message handler on Object")
            }
        }
    }

    #[inline]
    fn invoke(&mut self, frame: &mut Frame<'_>) -> Result<(), Exception> {
        let rt = self.rt;
        (rt.methods().get(frame.mth).imp)(self, frame)
    }

    fn check_rank(gen: &GenericDescriptor, receivers: &[Obj]) -> Result<(), Exception> {
        if receivers.len() != gen.rank {
            return Err(Exception::builtin(
                ExKind::BadArity,
                format!("{} expects {} receivers, got {}", gen.name, gen.rank, receivers.len()),
            ));
        }
        Ok(())
    }

    /// Sends `g` to `receivers` with closed arguments given as values.
    pub fn send(&mut self, g: GenericId, receivers: &[Obj], args: &[Value]) -> Result<Value, Exception> {
        let gen = self.rt.generic(g);
        if gen.closed.is_empty() && args.is_empty() {
            return self.send_packed(g, receivers, &EMPTY_PACK);
        }
        let pack = ArgPack::pack(&gen.layout, args)?;
        self.send_packed(g, receivers, &pack)
    }

    /// Sends `g` with an already packed argument buffer.
    #[inline]
    pub fn send_packed(&mut self, g: GenericId, receivers: &[Obj], args: &ArgPack) -> Result<Value, Exception> {
        let rt = self.rt;
        let gen = rt.generic(g);
        Self::check_rank(gen, receivers)?;
        if gen.rank <= self.config.fast_message_rank && gen.closed.is_empty() {
            self.stats.fast_sends += 1;
        } else {
            self.stats.framed_sends += 1;
            if args.bytes.len() != gen.layout.byte_len {
                return Err(Exception::builtin(ExKind::BadArity, "argument pack does not match signature"));
            }
        }
        let mth = self.resolve(g, gen.sel_id, receivers)?;
        if let Some(fw) = rt.methods().get(mth).forward {
            return self.send_forwarded(g, gen, receivers, args, fw);
        }
        let mut ret = Value::Void;
        {
            let mut frame = Frame {
                sel: g,
                receivers,
                args,
                layout: &gen.layout,
                ret: if gen.ret.is_some() { Some(&mut ret) } else { None },
                mth,
                chained: false,
            };
            self.invoke(&mut frame)?;
        }
        Ok(ret)
    }

    /// Runs a forwarding method inline: one more lookup for the delegate,
    /// no intermediate frame.
    #[inline(never)]
    fn send_forwarded(
        &mut self,
        g: GenericId,
        gen: &GenericDescriptor,
        receivers: &[Obj],
        args: &ArgPack,
        fw: Forward,
    ) -> Result<Value, Exception> {
        let proxy = &receivers[fw.position];
        let delegate = proxy.link(fw.slot)?;
        if receivers.len() == 1 {
            let w = delegate.class_word();
            let (sel, word, m) = self.forward_hint;
            let mth = if sel == gen.sel_id && word == w {
                self.stats.hits += 1;
                m
            } else {
                let m = self.resolve(g, gen.sel_id, std::slice::from_ref(delegate))?;
                if self.cache_enabled {
                    self.forward_hint = (gen.sel_id, w, m);
                }
                m
            };
            return self.resend(g, gen, mth, std::slice::from_ref(delegate), args, delegate, proxy);
        }
        self.send_forwarded_n(g, gen, receivers, args, fw, delegate)
    }

    #[inline(never)]
    fn send_forwarded_n(
        &mut self,
        g: GenericId,
        gen: &GenericDescriptor,
        receivers: &[Obj],
        args: &ArgPack,
        fw: Forward,
        delegate: &Obj,
    ) -> Result<Value, Exception> {
        let proxy = &receivers[fw.position];
        let rs: SmallVec<[Obj; MAX_RANK]> = receivers
            .iter()
            .enumerate()
            .map(|(i, r)| if i == fw.position { delegate.clone() } else { r.clone() })
            .collect();
        let mth = self.resolve(g, gen.sel_id, &rs)?;
        self.resend(g, gen, mth, &rs, args, delegate, proxy)
    }

    #[inline(always)]
    #[allow(clippy::too_many_arguments)]
    fn resend(
        &mut self,
        g: GenericId,
        gen: &GenericDescriptor,
        mth: MethodId,
        receivers: &[Obj],
        args: &ArgPack,
        delegate: &Obj,
        proxy: &Obj,
    ) -> Result<Value, Exception> {
        let mut ret = Value::Void;
        {
            let mut frame = Frame {
                sel: g,
                receivers,
                args,
                layout: &gen.layout,
                ret: if gen.ret.is_some() { Some(&mut ret) } else { None },
                mth,
                chained: false,
            };
            self.invoke(&mut frame)?;
        }
        restore_proxy(Some(&mut ret), delegate, proxy);
        Ok(ret)
    }

    /// Rank-1 send without closed arguments.
    #[inline]
    pub fn send1(&mut self, g: GenericId, recv: &Obj) -> Result<Value, Exception> {
        self.send_packed(g, std::slice::from_ref(recv), &EMPTY_PACK)
    }

    /// Sends and expects an object result.
    pub fn send_obj(&mut self, g: GenericId, receivers: &[Obj], args: &[Value]) -> Result<Obj, Exception> {
        match self.send(g, receivers, args)? {
            Value::Obj(o) => Ok(o),
            other => Err(Exception::builtin(
                ExKind::BadType,
                format!("{} returned {other:?}, expected an object", self.rt.generic(g).name),
            )),
        }
    }

    /// Re-dispatches the frame's message to other receivers, sharing its
    /// closed arguments and return slot.
    #[inline]
    pub fn forward_message(&mut self, frame: &mut Frame<'_>, receivers: &[Obj]) -> Result<(), Exception> {
        let gen = self.rt.generic(frame.sel);
        if receivers.len() != frame.receivers.len() {
            Self::check_rank(gen, receivers)?;
        }
        let mth = self.resolve(frame.sel, gen.sel_id, receivers)?;
        let mut fwd = Frame {
            sel: frame.sel,
            receivers,
            args: frame.args,
            layout: frame.layout,
            ret: frame.ret.as_deref_mut(),
            mth,
            chained: false,
        };
        self.invoke(&mut fwd)
    }

    /// True when the executing method has a next method.
    pub fn next_method_p(&self, frame: &Frame<'_>) -> bool {
        self.rt.methods().get(frame.mth).next.is_some()
    }

    /// Invokes the next method with the frame's receivers, arguments and
    /// return slot. Does nothing when there is no next method.
    pub fn next_method(&mut self, frame: &mut Frame<'_>) -> Result<(), Exception> {
        let rt = self.rt;
        let desc = rt.methods().get(frame.mth);
        let Some(next) = desc.next else {
            return Ok(());
        };
        let target = rt.methods().get(next).generic;
        if target == frame.sel || target == desc.generic {
            let mut f = Frame {
                sel: frame.sel,
                receivers: frame.receivers,
                args: frame.args,
                layout: frame.layout,
                ret: frame.ret.as_deref_mut(),
                mth: next,
                chained: true,
            };
            return self.invoke(&mut f);
        }
        let gen = rt.generic(target);
        let pack = frame.args.prefix(&gen.layout);
        let mut f = Frame {
            sel: target,
            receivers: frame.receivers,
            args: &pack,
            layout: &gen.layout,
            ret: if gen.ret.is_some() { frame.ret.as_deref_mut() } else { None },
            mth: next,
            chained: true,
        };
        self.invoke(&mut f)
    }

    /// Invokes the next method with explicit closed arguments, packed for
    /// the next method's generic.
    pub fn next_method_with(&mut self, frame: &mut Frame<'_>, args: &[Value]) -> Result<(), Exception> {
        let rt = self.rt;
        let Some(next) = rt.methods().get(frame.mth).next else {
            return Ok(());
        };
        let gen = rt.generic(rt.methods().get(next).generic);
        let pack = ArgPack::pack(&gen.layout, args)?;
        let mut f = Frame {
            sel: gen.id,
            receivers: frame.receivers,
            args: &pack,
            layout: &gen.layout,
            ret: if gen.ret.is_some() { frame.ret.as_deref_mut() } else { None },
            mth: next,
            chained: true,
        };
        self.invoke(&mut f)
    }

    /// The `True` class-object iff a specialization other than the
    /// unrecognized-message handler would be selected. Leaves caches and
    /// counters untouched.
    pub fn understands_message(&self, receivers: &[ClassId], g: GenericId) -> Obj {
        let rt = self.rt;
        if rt.understands(receivers, g) {
            rt.true_obj()
        } else {
            rt.false_obj()
        }
    }

    /// Runs `body` as the outermost protected region. An escaping exception
    /// terminates the context and is reported as a diagnostic.
    pub fn toplevel<T>(
        &mut self,
        body: impl FnOnce(&mut Context<'rt>) -> Result<T, Exception>,
    ) -> Result<T, Uncaught> {
        if self.terminated {
            return Err(Uncaught {
                diagnostic: "context already terminated".into(),
            });
        }
        body(self).map_err(|ex| {
            self.terminated = true;
            let diagnostic = format!("uncaught exception: {ex}");
            log::error!("{diagnostic}");
            Uncaught { diagnostic }
        })
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }
}

/// An exception that escaped [`Context::toplevel`].
#[derive(Debug, Clone, thiserror::Error)]
#[error("{diagnostic}")]
pub struct Uncaught {
    pub diagnostic: String,
}

fn dangling(obj: &Obj) -> Exception {
    let state = obj.as_instance().map(|i| i.state());
    let msg = match state {
        Some(LifeState::Expired) => "automatic object used after its scope closed",
        Some(LifeState::Deallocated) => "message sent to a deallocated object",
        _ => "invalid receiver",
    };
    Exception::builtin(ExKind::BadValue, msg)
}
