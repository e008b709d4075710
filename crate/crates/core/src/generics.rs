//! Generic functions: rank, closed-parameter signatures and selectors.

use crate::error::DefineError;
use crate::value::TypeTag;

pub const MAX_RANK: usize = 5;

/// Index of a generic in the runtime; doubles as the selector handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenericId(pub(crate) u32);

impl GenericId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub tag: TypeTag,
}

impl Param {
    pub fn new(name: &str, tag: TypeTag) -> Self {
        Param {
            name: name.to_string(),
            tag,
        }
    }
}

/// Where each closed argument lives inside the packed argument buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSlot {
    pub offset: usize,
    pub size: usize,
    pub tag: TypeTag,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignatureLayout {
    pub slots: Vec<ParamSlot>,
    pub byte_len: usize,
    /// Number of reference-typed (object/string) parameters.
    pub ref_count: usize,
}

impl SignatureLayout {
    /// Scalars are stored inline (8-byte aligned); objects and strings are
    /// stored as a 4-byte index into the pack's reference table.
    pub fn compute(params: &[Param]) -> Self {
        let mut offset = 0usize;
        let mut ref_count = 0usize;
        let mut slots = Vec::with_capacity(params.len());
        for p in params {
            let (size, align) = match p.tag {
                TypeTag::Int | TypeTag::Float => (8, 8),
                TypeTag::Obj | TypeTag::Str | TypeTag::Native | TypeTag::Link => {
                    ref_count += 1;
                    (4, 4)
                }
                TypeTag::Bytes(n) => (n, 1),
            };
            offset = offset.div_ceil(align) * align;
            slots.push(ParamSlot {
                offset,
                size,
                tag: p.tag,
            });
            offset += size;
        }
        SignatureLayout {
            slots,
            byte_len: offset,
            ref_count,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenericDescriptor {
    pub name: String,
    pub id: GenericId,
    pub rank: usize,
    pub closed: Vec<Param>,
    pub ret: Option<TypeTag>,
    pub sel_id: u32,
    pub layout: SignatureLayout,
}

impl GenericDescriptor {
    pub(crate) fn new(
        id: GenericId,
        name: &str,
        rank: usize,
        closed: Vec<Param>,
        ret: Option<TypeTag>,
        sel_id: u32,
    ) -> Result<Self, DefineError> {
        if !(1..=MAX_RANK).contains(&rank) {
            return Err(DefineError::RankOutOfRange(rank));
        }
        let layout = SignatureLayout::compute(&closed);
        Ok(GenericDescriptor {
            name: name.to_string(),
            id,
            rank,
            closed,
            ret,
            sel_id,
            layout,
        })
    }

    /// Closed parameters of a specialization must match the generic's
    /// names and types positionally.
    pub fn validate_specialization_signature(&self, params: &[Param]) -> Result<(), DefineError> {
        for (position, (want, got)) in self.closed.iter().zip(params).enumerate() {
            if want.name != got.name {
                return Err(DefineError::SignatureMismatch {
                    position,
                    reason: format!("name `{}` vs `{}`", got.name, want.name),
                });
            }
            if want.tag != got.tag {
                return Err(DefineError::SignatureMismatch {
                    position,
                    reason: format!("type {:?} vs {:?}", got.tag, want.tag),
                });
            }
        }
        if self.closed.len() != params.len() {
            return Err(DefineError::SignatureMismatch {
                position: self.closed.len().min(params.len()),
                reason: format!("{} parameters vs {}", params.len(), self.closed.len()),
            });
        }
        Ok(())
    }

    pub fn is_signature_compatible(&self, other: &GenericDescriptor) -> bool {
        self.rank == other.rank && self.closed == other.closed && self.ret == other.ret
    }
}
