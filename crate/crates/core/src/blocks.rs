//! Finite blocks `B ⊆ [k₁] × ⋯ × [kₙ]` and their fibers.
//!
//! Indices are zero-based: slot `i` ranges over `0..bounds[i]`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum BlockKind {
    /// `{(j, …, j)}`.
    Diagonal,
    /// The whole grid.
    Full,
    /// Tuples whose entries in slots `a` and `b` agree.
    Equality { a: usize, b: usize },
    /// A caller-supplied member set.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    kind: BlockKind,
    bounds: Vec<usize>,
    members: BTreeSet<Vec<usize>>,
}

impl Block {
    /// Materializes one of the generated kinds. Use [`Block::explicit`] for
    /// caller-supplied member sets.
    pub fn new(kind: BlockKind, bounds: &[usize]) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Precondition("a block needs arity at least 1".into()));
        }
        let members: BTreeSet<Vec<usize>> = match kind {
            BlockKind::Diagonal => {
                let m = *bounds.iter().min().unwrap();
                (0..m).map(|j| vec![j; bounds.len()]).collect()
            }
            BlockKind::Full => grid(bounds).collect(),
            BlockKind::Equality { a, b } => {
                if a >= bounds.len() || b >= bounds.len() {
                    return Err(Error::Precondition(format!(
                        "equality slots ({a}, {b}) out of range for arity {}",
                        bounds.len()
                    )));
                }
                grid(bounds).filter(|t| t[a] == t[b]).collect()
            }
            BlockKind::Explicit => {
                return Err(Error::Precondition("explicit blocks need a member list".into()))
            }
        };
        if members.is_empty() {
            return Err(Error::NonvoidViolation);
        }
        Ok(Self { kind, bounds: bounds.to_vec(), members })
    }

    pub fn diagonal(bounds: &[usize]) -> Result<Self> {
        Self::new(BlockKind::Diagonal, bounds)
    }

    pub fn full(bounds: &[usize]) -> Result<Self> {
        Self::new(BlockKind::Full, bounds)
    }

    pub fn equality(a: usize, b: usize, bounds: &[usize]) -> Result<Self> {
        Self::new(BlockKind::Equality { a, b }, bounds)
    }

    pub fn explicit(bounds: &[usize], tuples: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Precondition("a block needs arity at least 1".into()));
        }
        let mut members = BTreeSet::new();
        for t in tuples {
            if t.len() != bounds.len() || t.iter().zip(bounds).any(|(j, k)| j >= k) {
                return Err(Error::OutOfBounds { tuple: t, bounds: bounds.to_vec() });
            }
            members.insert(t);
        }
        if members.is_empty() {
            return Err(Error::NonvoidViolation);
        }
        Ok(Self { kind: BlockKind::Explicit, bounds: bounds.to_vec(), members })
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn arity(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    pub fn members(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.members.contains(tuple)
    }

    /// `B^{j₁,…,j_{n-1}}`: the last indices completing `prefix` to a member,
    /// in increasing order. For arity one the empty prefix yields `B` itself.
    pub fn fiber(&self, prefix: &[usize]) -> Result<Vec<usize>> {
        let n = self.arity();
        if prefix.len() + 1 != n || prefix.iter().zip(&self.bounds).any(|(j, k)| j >= k) {
            return Err(Error::OutOfBounds { tuple: prefix.to_vec(), bounds: self.bounds[..n - 1].to_vec() });
        }
        let mut lo = prefix.to_vec();
        lo.push(0);
        let mut hi = prefix.to_vec();
        hi.push(usize::MAX);
        Ok(self.members.range(lo..=hi).map(|t| t[n - 1]).collect())
    }

    /// The same member set restricted to `[0, lens[i])` in every slot, or
    /// `None` when nothing survives.
    pub fn truncated(&self, lens: &[usize]) -> Option<Block> {
        let bounds: Vec<usize> = self.bounds.iter().zip(lens).map(|(k, l)| (*k).min(*l)).collect();
        let members: BTreeSet<Vec<usize>> = self
            .members
            .iter()
            .filter(|t| t.iter().zip(&bounds).all(|(j, k)| j < k))
            .cloned()
            .collect();
        if members.is_empty() {
            None
        } else {
            Some(Block { kind: self.kind, bounds, members })
        }
    }
}

/// All tuples of `[b₀] × ⋯ × [b_{n-1}]` in lexicographic order.
pub fn grid(bounds: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = bounds.iter().product();
    (0..total).map(move |mut flat| {
        let mut t = vec![0; bounds.len()];
        for (slot, b) in bounds.iter().enumerate().rev() {
            t[slot] = flat % b;
            flat /= b;
        }
        t
    })
}
