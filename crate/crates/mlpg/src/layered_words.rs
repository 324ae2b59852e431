//! Layered words: sequences of letter/label pairs, each occurrence tagged with
//! a uid so that "the same occurrence" can be followed along a trace.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::labels::{LabelError, LabelId, LabelRegistry};

pub type Sym = Arc<str>;
pub type Uid = u64;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

#[derive(Clone, Debug, Default)]
pub struct UidGen {
    next: Uid,
}

impl UidGen {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(next: Uid) -> Self {
        Self { next }
    }

    pub fn fresh(&mut self) -> Uid {
        let u = self.next;
        self.next += 1;
        u
    }

    pub fn peek(&self) -> Uid {
        self.next
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LayeredLetter {
    pub letter: Sym,
    pub label: LabelId,
    pub uid: Uid,
}

impl LayeredLetter {
    pub fn new(letter: Sym, label: LabelId, uid: Uid) -> Self {
        Self { letter, label, uid }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LayeredWord(pub Vec<LayeredLetter>);

impl LayeredWord {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Φ[i]`, 1-based.
    pub fn at(&self, i: usize) -> Option<&LayeredLetter> {
        if i == 0 {
            None
        } else {
            self.0.get(i - 1)
        }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LayeredLetter> {
        self.0.iter()
    }

    pub fn project(&self, s: LabelId) -> LayeredWord {
        LayeredWord(self.0.iter().filter(|l| l.label == s).cloned().collect())
    }

    pub fn coproject(&self, s: LabelId) -> LayeredWord {
        LayeredWord(self.0.iter().filter(|l| l.label != s).cloned().collect())
    }

    pub fn plain(&self) -> Vec<Sym> {
        self.0.iter().map(|l| l.letter.clone()).collect()
    }

    pub fn plain_string(&self) -> String {
        self.0.iter().map(|l| &*l.letter).collect()
    }

    pub fn uids(&self) -> Vec<Uid> {
        self.0.iter().map(|l| l.uid).collect()
    }

    pub fn labels_of(&self) -> BTreeSet<LabelId> {
        self.0.iter().map(|l| l.label).collect()
    }

    pub fn tree_view(&self, reg: &LabelRegistry) -> Result<TreeView, LabelError> {
        let labels = self.labels_of();
        for &l in &labels {
            if !reg.contains(l) {
                return Err(LabelError::Unknown(l));
            }
        }
        let roots: Vec<LabelId> = labels
            .iter()
            .copied()
            .filter(|&t| !labels.iter().any(|&u| reg.precedes(u, t)))
            .collect();
        let build = |l: LabelId| self.tree_node(reg, &labels, l);
        Ok(TreeView { roots: roots.into_iter().map(build).collect() })
    }

    fn tree_node(&self, reg: &LabelRegistry, labels: &BTreeSet<LabelId>, l: LabelId) -> TreeNode {
        let children = reg
            .children_within(l, labels.iter().copied())
            .into_iter()
            .map(|c| self.tree_node(reg, labels, c))
            .collect();
        TreeNode {
            label: l,
            path: reg.path_string(l),
            letters: self.project(l).plain(),
            children,
        }
    }

    /// One bracket per letter: `[h@0][f@0]`.
    pub fn render(&self, reg: &LabelRegistry) -> String {
        if self.is_empty() {
            return "Λ".to_string();
        }
        self.0
            .iter()
            .map(|l| format!("[{}@{}]", l.letter, reg.path_string(l.label)))
            .collect()
    }

    /// Runs of equally labelled letters grouped: `<hf,0><g,0.1>`.
    pub fn render_grouped(&self, reg: &LabelRegistry) -> String {
        if self.is_empty() {
            return "Λ".to_string();
        }
        let mut out = String::new();
        let mut i = 0;
        while i < self.0.len() {
            let lab = self.0[i].label;
            let mut j = i;
            let mut run = String::new();
            while j < self.0.len() && self.0[j].label == lab {
                run.push_str(&self.0[j].letter);
                j += 1;
            }
            out.push_str(&format!("<{},{}>", run, reg.path_string(lab)));
            i = j;
        }
        out
    }
}

impl FromIterator<LayeredLetter> for LayeredWord {
    fn from_iter<T: IntoIterator<Item = LayeredLetter>>(iter: T) -> Self {
        LayeredWord(iter.into_iter().collect())
    }
}

/// Visible layer `Γ` and invisible layer `Δ`, written `Γ$Δ`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GWord {
    pub visible: LayeredWord,
    pub invisible: LayeredWord,
}

impl GWord {
    pub fn new(visible: LayeredWord, invisible: LayeredWord) -> Self {
        Self { visible, invisible }
    }

    pub fn render(&self, reg: &LabelRegistry) -> String {
        format!("{} $ {}", self.visible.render(reg), self.invisible.render(reg))
    }

    pub fn render_grouped(&self, reg: &LabelRegistry) -> String {
        format!("{} $ {}", self.visible.render_grouped(reg), self.invisible.render_grouped(reg))
    }

    pub fn contains_uid(&self, u: Uid) -> bool {
        self.visible.iter().chain(self.invisible.iter()).any(|l| l.uid == u)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub label: LabelId,
    pub path: String,
    pub letters: Vec<Sym>,
    pub children: Vec<TreeNode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeView {
    pub roots: Vec<TreeNode>,
}

impl fmt::Display for TreeView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(n: &TreeNode, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let letters: String = n.letters.iter().map(|s| &**s).collect();
            writeln!(f, "{}{}: {}", "  ".repeat(depth), n.path, letters)?;
            for c in &n.children {
                go(c, depth + 1, f)?;
            }
            Ok(())
        }
        for r in &self.roots {
            go(r, 0, f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad layered word at offset {offset}: {msg}")]
pub struct WordParseError {
    pub offset: usize,
    pub msg: String,
}

/// Parses `[h@0][f@0] $ [g@0.1]`; `Λ` or nothing denotes an empty layer.
pub fn parse_gword(text: &str, reg: &mut LabelRegistry, uids: &mut UidGen) -> Result<GWord, WordParseError> {
    let (vis, inv) = match text.find('$') {
        Some(p) => (&text[..p], &text[p + 1..]),
        None => (text, ""),
    };
    let visible = parse_layer(vis, 0, reg, uids)?;
    let invisible = parse_layer(inv, vis.len() + 1, reg, uids)?;
    Ok(GWord { visible, invisible })
}

pub fn parse_layer(
    text: &str,
    base: usize,
    reg: &mut LabelRegistry,
    uids: &mut UidGen,
) -> Result<LayeredWord, WordParseError> {
    let err = |offset: usize, msg: &str| WordParseError { offset: base + offset, msg: msg.to_string() };
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < text.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if text[i..].starts_with('Λ') {
            i += 'Λ'.len_utf8();
            continue;
        }
        if c != b'[' {
            return Err(err(i, "expected '['"));
        }
        let close = text[i..].find(']').ok_or_else(|| err(i, "unterminated '['"))? + i;
        let inner = &text[i + 1..close];
        let (letter, path) = inner.rsplit_once('@').ok_or_else(|| err(i, "expected letter@label"))?;
        let letter = letter.trim();
        if letter.is_empty() {
            return Err(err(i, "empty letter"));
        }
        let path: Result<Vec<u32>, _> = path.trim().split('.').map(|p| p.parse::<u32>()).collect();
        let path = path.map_err(|_| err(i, "bad label path"))?;
        let label = reg.ensure_path(&path);
        out.push(LayeredLetter::new(sym(letter), label, uids.fresh()));
        i = close + 1;
    }
    Ok(LayeredWord(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render_round_trip() {
        let mut reg = LabelRegistry::new();
        let mut u = UidGen::new();
        let w = parse_gword("[h@0][f@0] $ [g@0.1]", &mut reg, &mut u).unwrap();
        assert_eq!(w.visible.plain_string(), "hf");
        assert_eq!(w.render(&reg), "[h@0][f@0] $ [g@0.1]");
        assert_eq!(w.render_grouped(&reg), "<hf,0> $ <g,0.1>");
        let e = parse_gword("[a@0] $ Λ", &mut reg, &mut u).unwrap();
        assert!(e.invisible.is_empty());
        assert!(parse_gword("[a@x]", &mut reg, &mut u).is_err());
    }

    #[test]
    fn at_is_one_based() {
        let mut reg = LabelRegistry::new();
        let mut u = UidGen::new();
        let w = parse_gword("[a@0][b@0]", &mut reg, &mut u).unwrap();
        assert_eq!(&*w.visible.at(1).unwrap().letter, "a");
        assert!(w.visible.at(0).is_none());
        assert!(w.visible.at(3).is_none());
    }
}
