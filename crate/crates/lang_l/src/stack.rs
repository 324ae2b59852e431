//! Stack words of configurations. The active chain of calls becomes the
//! visible layer (innermost first); every other call goes to the invisible
//! layer. Labels persist along a driving path so that letters can be
//! compared between configurations.

use std::collections::{BTreeMap, BTreeSet};

use mlpg::{GWord, LabelId, LabelRegistry, LayeredLetter, LayeredWord, Uid};

use crate::drive::StepInfo;
use crate::matching::{active_chain, mark_calls};
use crate::program::Program;
use crate::term::{Path, Term};

#[derive(Debug, Clone, Default)]
pub struct StackTracker {
    pub reg: LabelRegistry,
    labels: BTreeMap<Uid, LabelId>,
}

impl StackTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn label_of(&self, u: Uid) -> Option<LabelId> {
        self.labels.get(&u).copied()
    }

    /// The stack word of `t`. `step` describes the driving step that produced
    /// `t` from the previously extracted configuration, if any.
    ///
    /// New calls are labelled as follows: a body root on the active chain
    /// takes the label of the rewritten call and other body roots get a fresh
    /// child of it; a call its unready parent waits on shares the parent's
    /// label; any other call gets a fresh child of its parent's label, or a
    /// fresh root at top level. Calls seen before keep their labels.
    pub fn extract(&mut self, prog: &Program, t: &Term, step: Option<&StepInfo>) -> GWord {
        let marks = mark_calls(prog, t);
        let chain: Vec<Path> = active_chain(prog, t);
        let on_chain: BTreeSet<&Path> = chain.iter().collect();
        let head_label = step.and_then(|s| self.labels.get(&s.head).copied());
        let roots: BTreeSet<Uid> = step.map(|s| s.roots.iter().copied().collect()).unwrap_or_default();
        let by_path: BTreeMap<&Path, usize> = marks.iter().enumerate().map(|(k, m)| (&m.path, k)).collect();
        let mut label_at: BTreeMap<Path, LabelId> = BTreeMap::new();
        for m in &marks {
            let parent = (0..m.path.len()).rev().map(|n| &m.path[..n]).find_map(|q| by_path.get(&q.to_vec()).map(|&k| &marks[k]));
            let l = if let Some(&l) = self.labels.get(&m.uid) {
                l
            } else if let (true, Some(h)) = (roots.contains(&m.uid), head_label) {
                if on_chain.contains(&m.path) {
                    h
                } else {
                    self.reg.new_child(h).expect("label exists")
                }
            } else if let Some(par) = parent {
                let pl = label_at[&par.path];
                if par.needs.as_ref() == Some(&m.path) {
                    pl
                } else {
                    self.reg.new_child(pl).expect("label exists")
                }
            } else {
                self.reg.new_root()
            };
            label_at.insert(m.path.clone(), l);
        }
        let present: BTreeSet<Uid> = marks.iter().map(|m| m.uid).collect();
        self.labels.retain(|u, _| present.contains(u));
        for m in &marks {
            self.labels.insert(m.uid, label_at[&m.path]);
        }
        let letter = |p: &Path| {
            let m = &marks[by_path[p]];
            LayeredLetter::new(mlpg::sym(&m.name), label_at[p], m.uid)
        };
        let visible: Vec<LayeredLetter> = chain.iter().rev().map(letter).collect();
        let mut groups: BTreeMap<Vec<u32>, Vec<&Path>> = BTreeMap::new();
        for m in &marks {
            if !on_chain.contains(&m.path) {
                groups.entry(self.reg.path(label_at[&m.path])).or_default().push(&m.path);
            }
        }
        let invisible: Vec<LayeredLetter> =
            groups.into_values().flat_map(|g| g.into_iter().rev().map(letter).collect::<Vec<_>>()).collect();
        GWord::new(LayeredWord(visible), LayeredWord(invisible))
    }
}

/// The stack word of a single configuration with fresh labels.
pub fn extract_stack_word(reg: &mut LabelRegistry, prog: &Program, t: &Term) -> GWord {
    let mut tr = StackTracker { reg: std::mem::take(reg), labels: BTreeMap::new() };
    let w = tr.extract(prog, t, None);
    *reg = tr.reg;
    w
}
