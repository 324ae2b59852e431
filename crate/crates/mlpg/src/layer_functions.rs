//! Append, Insert, Delete and Copy on invisible layers.
//!
//! Application is split in two phases. `resolve` works only on the label
//! registry and on the per-label letter counts of the word, so a whole chain
//! can be validated before any letter moves; `commit` then edits the letters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::labels::{LabelError, LabelId, LabelRegistry};
use crate::layered_words::{LayeredLetter, LayeredWord, Sym, Uid, UidGen};

/// Which child of the anchor label a layer function addresses.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ChildSel {
    /// A fresh child (Append only).
    New,
    /// The k-th child present in the word, 1-based, in creation order.
    /// Append allocates it when exactly k-1 children are present.
    Nth(usize),
    /// The unique child present in the word. Append allocates one if none.
    Only,
}

impl fmt::Display for ChildSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChildSel::New => write!(f, "child_new"),
            ChildSel::Nth(k) => write!(f, "child#{k}"),
            ChildSel::Only => write!(f, "child"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LayerFn {
    App { target: ChildSel, payload: Vec<Sym> },
    Ins { target: ChildSel, payload: Vec<Sym> },
    Del { target: ChildSel },
    Copy { target: ChildSel },
}

impl LayerFn {
    pub fn payload_len(&self) -> usize {
        match self {
            LayerFn::App { payload, .. } | LayerFn::Ins { payload, .. } => payload.len(),
            _ => 0,
        }
    }

    pub fn target(&self) -> &ChildSel {
        match self {
            LayerFn::App { target, .. }
            | LayerFn::Ins { target, .. }
            | LayerFn::Del { target }
            | LayerFn::Copy { target } => target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LayerError {
    #[error("no child {sel} of label {anchor} labels a letter of the layer")]
    MissingChild { anchor: LabelId, sel: ChildSel },
    #[error("child selector {sel} of label {anchor} is ambiguous ({count} children)")]
    Ambiguous { anchor: LabelId, sel: ChildSel, count: usize },
    #[error("payload of length {len} exceeds the bound {bound}")]
    PayloadTooLong { len: usize, bound: usize },
    #[error("chain of length {len} exceeds the bound {bound}")]
    ChainTooLong { len: usize, bound: usize },
    #[error(transparent)]
    Label(#[from] LabelError),
}

/// A layer function with every label decided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolvedOp {
    Append { label: LabelId, payload: Vec<Sym> },
    Delete { labels: BTreeSet<LabelId> },
    /// Pairs (original, copy) listed parents first.
    Copy { mapping: Vec<(LabelId, LabelId)> },
}

pub type LabelCounts = BTreeMap<LabelId, usize>;

pub fn label_counts(w: &LayeredWord) -> LabelCounts {
    let mut m = LabelCounts::new();
    for l in w.iter() {
        *m.entry(l.label).or_insert(0) += 1;
    }
    m
}

fn existing_child(
    reg: &LabelRegistry,
    counts: &LabelCounts,
    anchor: LabelId,
    sel: &ChildSel,
) -> Result<LabelId, LayerError> {
    let kids = reg.children_within(anchor, counts.keys().copied());
    let missing = || LayerError::MissingChild { anchor, sel: sel.clone() };
    match sel {
        ChildSel::New => Err(missing()),
        ChildSel::Nth(k) => kids.get(k.wrapping_sub(1)).copied().ok_or_else(missing),
        ChildSel::Only => match kids.len() {
            0 => Err(missing()),
            1 => Ok(kids[0]),
            n => Err(LayerError::Ambiguous { anchor, sel: sel.clone(), count: n }),
        },
    }
}

fn append_target(
    reg: &mut LabelRegistry,
    counts: &LabelCounts,
    anchor: LabelId,
    sel: &ChildSel,
) -> Result<LabelId, LayerError> {
    let kids = reg.children_within(anchor, counts.keys().copied());
    match sel {
        ChildSel::New => Ok(reg.new_child(anchor)?),
        ChildSel::Nth(k) if *k >= 1 && *k <= kids.len() => Ok(kids[k - 1]),
        ChildSel::Nth(k) if *k == kids.len() + 1 => Ok(reg.new_child(anchor)?),
        ChildSel::Nth(_) => Err(LayerError::MissingChild { anchor, sel: sel.clone() }),
        ChildSel::Only => match kids.len() {
            0 => Ok(reg.new_child(anchor)?),
            1 => Ok(kids[0]),
            n => Err(LayerError::Ambiguous { anchor, sel: sel.clone(), count: n }),
        },
    }
}

fn subtree(reg: &LabelRegistry, counts: &LabelCounts, root: LabelId) -> Vec<LabelId> {
    let mut v: Vec<LabelId> = counts.keys().copied().filter(|&t| reg.precedes_eq(root, t)).collect();
    v.sort_by_key(|&t| (reg.depth(t), t));
    v
}

/// Decides the labels for one layer function and updates `counts` to the
/// letter counts of the result.
pub fn resolve(
    reg: &mut LabelRegistry,
    counts: &mut LabelCounts,
    f: &LayerFn,
    anchor: LabelId,
    max_payload: Option<usize>,
) -> Result<ResolvedOp, LayerError> {
    if let Some(bound) = max_payload {
        if f.payload_len() > bound {
            return Err(LayerError::PayloadTooLong { len: f.payload_len(), bound });
        }
    }
    match f {
        LayerFn::App { target, payload } => {
            let label = append_target(reg, counts, anchor, target)?;
            if !payload.is_empty() {
                *counts.entry(label).or_insert(0) += payload.len();
            }
            Ok(ResolvedOp::Append { label, payload: payload.clone() })
        }
        LayerFn::Ins { target, payload } => {
            let sj = existing_child(reg, counts, anchor, target)?;
            let m = if reg.parent(sj) == Some(anchor) {
                reg.insert_between(anchor, sj)?
            } else {
                reg.insert_above(sj)?
            };
            if !payload.is_empty() {
                *counts.entry(m).or_insert(0) += payload.len();
            }
            Ok(ResolvedOp::Append { label: m, payload: payload.clone() })
        }
        LayerFn::Del { target } => {
            let sj = existing_child(reg, counts, anchor, target)?;
            let labels: BTreeSet<LabelId> = subtree(reg, counts, sj).into_iter().collect();
            for l in &labels {
                counts.remove(l);
            }
            Ok(ResolvedOp::Delete { labels })
        }
        LayerFn::Copy { target } => {
            let sj = existing_child(reg, counts, anchor, target)?;
            let sub = subtree(reg, counts, sj);
            let mut mapping: Vec<(LabelId, LabelId)> = Vec::with_capacity(sub.len());
            for &t in &sub {
                let new_parent = if t == sj {
                    anchor
                } else {
                    let mut p = reg.parent(t).expect("below sj");
                    loop {
                        if let Some(&(_, np)) = mapping.iter().find(|(o, _)| *o == p) {
                            break np;
                        }
                        p = reg.parent(p).expect("below sj");
                    }
                };
                mapping.push((t, reg.new_child(new_parent)?));
            }
            for &(o, n) in &mapping {
                let c = counts[&o];
                counts.insert(n, c);
            }
            Ok(ResolvedOp::Copy { mapping })
        }
    }
}

/// A letter created by `commit`, with the occurrence it was copied from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Created {
    pub uid: Uid,
    pub copied_from: Option<Uid>,
}

pub fn commit(letters: &mut Vec<LayeredLetter>, op: &ResolvedOp, uids: &mut UidGen) -> Vec<Created> {
    let mut created = Vec::new();
    match op {
        ResolvedOp::Append { label, payload } => {
            for s in payload {
                let u = uids.fresh();
                letters.push(LayeredLetter::new(s.clone(), *label, u));
                created.push(Created { uid: u, copied_from: None });
            }
        }
        ResolvedOp::Delete { labels } => letters.retain(|l| !labels.contains(&l.label)),
        ResolvedOp::Copy { mapping } => {
            let n = letters.len();
            for &(old, new) in mapping {
                for i in 0..n {
                    if letters[i].label == old {
                        let u = uids.fresh();
                        let src = letters[i].uid;
                        let letter = letters[i].letter.clone();
                        letters.push(LayeredLetter::new(letter, new, u));
                        created.push(Created { uid: u, copied_from: Some(src) });
                    }
                }
            }
        }
    }
    created
}

pub fn apply_layer_fn(
    reg: &mut LabelRegistry,
    phi: &LayeredWord,
    f: &LayerFn,
    s_i: LabelId,
    uids: &mut UidGen,
) -> Result<LayeredWord, LayerError> {
    let mut counts = label_counts(phi);
    let op = resolve(reg, &mut counts, f, s_i, None)?;
    let mut letters = phi.0.clone();
    commit(&mut letters, &op, uids);
    Ok(LayeredWord(letters))
}

/// Left-to-right composition. The registry is only updated when every step
/// succeeds.
pub fn apply_chain(
    reg: &mut LabelRegistry,
    phi: &LayeredWord,
    chain: &[LayerFn],
    s_i: LabelId,
    bounds: Option<(usize, usize)>,
    uids: &mut UidGen,
) -> Result<LayeredWord, LayerError> {
    if let Some((k1, _)) = bounds {
        if chain.len() > k1 {
            return Err(LayerError::ChainTooLong { len: chain.len(), bound: k1 });
        }
    }
    let mut shadow = reg.clone();
    let mut counts = label_counts(phi);
    let mut ops = Vec::with_capacity(chain.len());
    for f in chain {
        ops.push(resolve(&mut shadow, &mut counts, f, s_i, bounds.map(|b| b.1))?);
    }
    *reg = shadow;
    let mut letters = phi.0.clone();
    for op in &ops {
        commit(&mut letters, op, uids);
    }
    Ok(LayeredWord(letters))
}
