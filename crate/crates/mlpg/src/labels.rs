//! The label set and its strict partial order.
//!
//! Labels are nodes of a forest; `a ◁ b` holds when `a` is a strict
//! ancestor of `b`. Every allocation returns a never-seen id, so a new
//! label is fresh with respect to any set of labels already in use.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub u32);

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("unknown label {0}")]
    Unknown(LabelId),
    #[error("label {anc} is not an ancestor of {desc}")]
    NotAncestor { anc: LabelId, desc: LabelId },
    #[error("label {desc} is not a child of {anc}")]
    NotChild { anc: LabelId, desc: LabelId },
    #[error("label {0} is not a member of the subset")]
    NotInSubset(LabelId),
    #[error("label {0} is a root and has no parent to insert under")]
    IsRoot(LabelId),
}

#[derive(Clone, Debug, Default)]
struct Node {
    parent: Option<LabelId>,
    ordinal: u32,
    next_ordinal: u32,
    children: Vec<LabelId>,
}

/// Registry of labels with parent links.
#[derive(Clone, Debug, Default)]
pub struct LabelRegistry {
    nodes: Vec<Node>,
    roots: Vec<LabelId>,
}

impl LabelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, l: LabelId) -> bool {
        (l.0 as usize) < self.nodes.len()
    }

    fn check(&self, l: LabelId) -> Result<(), LabelError> {
        if self.contains(l) {
            Ok(())
        } else {
            Err(LabelError::Unknown(l))
        }
    }

    fn push(&mut self, parent: Option<LabelId>, ordinal: u32) -> LabelId {
        let id = LabelId(self.nodes.len() as u32);
        self.nodes.push(Node { parent, ordinal, next_ordinal: 1, children: Vec::new() });
        id
    }

    pub fn new_root(&mut self) -> LabelId {
        let id = self.push(None, self.roots.len() as u32);
        self.roots.push(id);
        id
    }

    pub fn new_child(&mut self, parent: LabelId) -> Result<LabelId, LabelError> {
        self.check(parent)?;
        let p = &mut self.nodes[parent.0 as usize];
        let ord = p.next_ordinal;
        p.next_ordinal += 1;
        let id = self.push(Some(parent), ord);
        self.nodes[parent.0 as usize].children.push(id);
        Ok(id)
    }

    /// Creates `m` with `anc ◁ m ◁ desc`; `desc` must be a direct child of `anc`.
    pub fn insert_between(&mut self, anc: LabelId, desc: LabelId) -> Result<LabelId, LabelError> {
        self.check(anc)?;
        self.check(desc)?;
        if !self.precedes(anc, desc) {
            return Err(LabelError::NotAncestor { anc, desc });
        }
        if self.parent(desc) != Some(anc) {
            return Err(LabelError::NotChild { anc, desc });
        }
        Ok(self.splice_above(desc))
    }

    /// Creates `m` between `desc` and its current parent.
    pub fn insert_above(&mut self, desc: LabelId) -> Result<LabelId, LabelError> {
        self.check(desc)?;
        if self.parent(desc).is_none() {
            return Err(LabelError::IsRoot(desc));
        }
        Ok(self.splice_above(desc))
    }

    fn splice_above(&mut self, desc: LabelId) -> LabelId {
        let anc = self.nodes[desc.0 as usize].parent.expect("non-root");
        let m = self.new_child(anc).expect("known parent");
        let a = &mut self.nodes[anc.0 as usize];
        a.children.retain(|c| *c != desc);
        let d = &mut self.nodes[desc.0 as usize];
        d.parent = Some(m);
        d.ordinal = 1;
        let mn = &mut self.nodes[m.0 as usize];
        mn.children.push(desc);
        mn.next_ordinal = 2;
        m
    }

    pub fn parent(&self, l: LabelId) -> Option<LabelId> {
        self.nodes.get(l.0 as usize).and_then(|n| n.parent)
    }

    pub fn children(&self, l: LabelId) -> &[LabelId] {
        &self.nodes[l.0 as usize].children
    }

    pub fn roots(&self) -> &[LabelId] {
        &self.roots
    }

    /// `a ◁ b`: `a` is a strict ancestor of `b`.
    pub fn precedes(&self, a: LabelId, b: LabelId) -> bool {
        let mut cur = self.parent(b);
        while let Some(p) = cur {
            if p == a {
                return true;
            }
            cur = self.parent(p);
        }
        false
    }

    /// `a ⊴ b`.
    pub fn precedes_eq(&self, a: LabelId, b: LabelId) -> bool {
        a == b || self.precedes(a, b)
    }

    pub fn comparable(&self, a: LabelId, b: LabelId) -> bool {
        self.precedes_eq(a, b) || self.precedes(b, a)
    }

    pub fn depth(&self, l: LabelId) -> usize {
        let mut d = 0;
        let mut cur = self.parent(l);
        while let Some(p) = cur {
            d += 1;
            cur = self.parent(p);
        }
        d
    }

    /// Children of `s0` with respect to `subset`, which must contain `s0`.
    pub fn child_of(
        &self,
        s0: LabelId,
        subset: &BTreeSet<LabelId>,
    ) -> Result<BTreeSet<LabelId>, LabelError> {
        if !subset.contains(&s0) {
            return Err(LabelError::NotInSubset(s0));
        }
        Ok(self.children_within(s0, subset.iter().copied()).into_iter().collect())
    }

    /// Labels `t` of `labels` with `s0 ◁ t` and nothing of `labels` strictly
    /// between. `s0` itself need not be among `labels`. Sorted by id.
    pub fn children_within<I: IntoIterator<Item = LabelId>>(&self, s0: LabelId, labels: I) -> Vec<LabelId> {
        let set: BTreeSet<LabelId> = labels.into_iter().collect();
        let mut out = Vec::new();
        'outer: for &t in &set {
            let mut cur = self.parent(t);
            while let Some(p) = cur {
                if p == s0 {
                    out.push(t);
                    continue 'outer;
                }
                if set.contains(&p) {
                    continue 'outer;
                }
                cur = self.parent(p);
            }
        }
        out
    }

    /// Allocation ordinals from the root down to `l`.
    pub fn path(&self, l: LabelId) -> Vec<u32> {
        let mut out = Vec::new();
        let mut cur = Some(l);
        while let Some(c) = cur {
            out.push(self.nodes[c.0 as usize].ordinal);
            cur = self.parent(c);
        }
        out.reverse();
        out
    }

    pub fn path_string(&self, l: LabelId) -> String {
        let parts: Vec<String> = self.path(l).iter().map(|o| o.to_string()).collect();
        parts.join(".")
    }

    /// Finds the label with the given path, creating missing labels on the way.
    pub fn ensure_path(&mut self, path: &[u32]) -> LabelId {
        assert!(!path.is_empty(), "label path must not be empty");
        let r = path[0] as usize;
        while self.roots.len() <= r {
            self.new_root();
        }
        let mut cur = self.roots[r];
        for &ord in &path[1..] {
            let found = self.nodes[cur.0 as usize]
                .children
                .iter()
                .copied()
                .find(|c| self.nodes[c.0 as usize].ordinal == ord);
            cur = match found {
                Some(c) => c,
                None => {
                    let id = self.push(Some(cur), ord);
                    let p = &mut self.nodes[cur.0 as usize];
                    p.children.push(id);
                    p.next_ordinal = p.next_ordinal.max(ord + 1);
                    id
                }
            };
        }
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_follow_allocation() {
        let mut r = LabelRegistry::new();
        let s0 = r.new_root();
        let a = r.new_child(s0).unwrap();
        let b = r.new_child(a).unwrap();
        assert_eq!(r.path_string(s0), "0");
        assert_eq!(r.path_string(a), "0.1");
        assert_eq!(r.path_string(b), "0.1.1");
        let m = r.insert_between(s0, a).unwrap();
        assert_eq!(r.path_string(m), "0.2");
        assert_eq!(r.path_string(a), "0.2.1");
        assert_eq!(r.path_string(b), "0.2.1.1");
    }

    #[test]
    fn ensure_path_continues_ordinals() {
        let mut r = LabelRegistry::new();
        let l = r.ensure_path(&[0, 1]);
        let root = r.parent(l).unwrap();
        let next = r.new_child(root).unwrap();
        assert_eq!(r.path_string(next), "0.2");
        assert_eq!(r.ensure_path(&[0, 1]), l);
    }

    #[test]
    fn insert_between_requires_child() {
        let mut r = LabelRegistry::new();
        let s0 = r.new_root();
        let s1 = r.new_child(s0).unwrap();
        let s2 = r.new_child(s1).unwrap();
        assert!(matches!(r.insert_between(s0, s2), Err(LabelError::NotChild { .. })));
        assert!(matches!(r.insert_between(s2, s0), Err(LabelError::NotAncestor { .. })));
        let m = r.insert_above(s2).unwrap();
        assert!(r.precedes(s1, m) && r.precedes(m, s2));
    }
}
