//! Plain prefix grammars: one layer, rules `lhs -> rhs` applied to prefixes.

use std::collections::HashSet;

use crate::layered_words::{sym, Sym, Uid, UidGen};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixRule {
    pub lhs: Vec<Sym>,
    pub rhs: Vec<Sym>,
}

impl PrefixRule {
    pub fn new(lhs: &[&str], rhs: &[&str]) -> Self {
        Self { lhs: lhs.iter().map(|s| sym(s)).collect(), rhs: rhs.iter().map(|s| sym(s)).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PrefixGrammar {
    pub rules: Vec<PrefixRule>,
    pub init: Vec<Sym>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlainLetter {
    pub letter: Sym,
    pub uid: Uid,
}

pub type PlainWord = Vec<PlainLetter>;

pub fn plain_string(w: &[PlainLetter]) -> String {
    w.iter().map(|l| &*l.letter).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainStep {
    pub rule: usize,
    pub consumed: Vec<Uid>,
    pub produced: Vec<Uid>,
}

#[derive(Clone, Debug, Default)]
pub struct PlainTrace {
    pub words: Vec<PlainWord>,
    pub steps: Vec<PlainStep>,
    pub uids: UidGen,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PgError {
    #[error("rule left-hand side is not a prefix of the word")]
    NotAPrefix,
    #[error("invalid trace segment [{i}, {j}] for a trace of {len} words")]
    BadSegment { i: usize, j: usize, len: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Rewrites the prefix `lhs` to `rhs`; the suffix keeps its uids.
pub fn pg_step(word: &[PlainLetter], rule: &PrefixRule, uids: &mut UidGen) -> Result<(PlainWord, PlainStep), PgError> {
    if rule.lhs.len() > word.len() || rule.lhs.iter().zip(word).any(|(a, b)| *a != b.letter) {
        return Err(PgError::NotAPrefix);
    }
    let consumed: Vec<Uid> = word[..rule.lhs.len()].iter().map(|l| l.uid).collect();
    let mut out: PlainWord = rule.rhs.iter().map(|s| PlainLetter { letter: s.clone(), uid: uids.fresh() }).collect();
    let produced = out.iter().map(|l| l.uid).collect();
    out.extend_from_slice(&word[rule.lhs.len()..]);
    Ok((out, PlainStep { rule: usize::MAX, consumed, produced }))
}

pub fn is_alphabetic_pg(g: &PrefixGrammar) -> bool {
    g.rules.iter().all(|r| r.lhs.len() == 1)
}

impl PlainTrace {
    pub fn start(init: &[Sym]) -> Self {
        let mut uids = UidGen::new();
        let w = init.iter().map(|s| PlainLetter { letter: s.clone(), uid: uids.fresh() }).collect();
        Self { words: vec![w], steps: Vec::new(), uids }
    }

    pub fn last(&self) -> &PlainWord {
        self.words.last().expect("non-empty trace")
    }

    pub fn apply(&mut self, g: &PrefixGrammar, rule: usize) -> Result<(), PgError> {
        let last = self.words.last().expect("non-empty trace");
        let (w, mut st) = pg_step(last, &g.rules[rule], &mut self.uids)?;
        st.rule = rule;
        self.words.push(w);
        self.steps.push(st);
        Ok(())
    }

    pub fn applicable(&self, g: &PrefixGrammar) -> Vec<usize> {
        let w = self.last();
        (0..g.rules.len())
            .filter(|&r| {
                let l = &g.rules[r].lhs;
                l.len() <= w.len() && l.iter().zip(w).all(|(a, b)| *a == b.letter)
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self.words.iter().map(|w| render_word(w)).collect();
        parts.join(" -> ")
    }
}

fn render_word(w: &[PlainLetter]) -> String {
    if w.is_empty() {
        "Λ".to_string()
    } else {
        plain_string(w)
    }
}

/// Applies the first applicable rule (in grammar order) until `max_words`
/// words exist or no rule applies.
pub fn run_ordered(g: &PrefixGrammar, max_words: usize) -> PlainTrace {
    let mut t = PlainTrace::start(&g.init);
    while t.words.len() < max_words {
        match t.applicable(g).first() {
            Some(&r) => t.apply(g, r).expect("applicable"),
            None => break,
        }
    }
    t
}

/// One node of the nondeterministic derivation tree.
#[derive(Clone, Debug)]
pub struct PgTreeNode {
    pub word: PlainWord,
    pub parent: Option<usize>,
    pub rule: Option<usize>,
    pub depth: usize,
}

/// Breadth-first enumeration of all derivations up to `depth` steps.
pub fn explore_all(g: &PrefixGrammar, depth: usize) -> Vec<PgTreeNode> {
    let root = PlainTrace::start(&g.init);
    let mut uids = root.uids.clone();
    let mut nodes = vec![PgTreeNode { word: root.words[0].clone(), parent: None, rule: None, depth: 0 }];
    let mut k = 0;
    while k < nodes.len() {
        if nodes[k].depth < depth {
            for (r, rule) in g.rules.iter().enumerate() {
                if let Ok((w, _)) = pg_step(&nodes[k].word, rule, &mut uids) {
                    let d = nodes[k].depth + 1;
                    nodes.push(PgTreeNode { word: w, parent: Some(k), rule: Some(r), depth: d });
                }
            }
        }
        k += 1;
    }
    nodes
}

fn check_segment(trace: &PlainTrace, i: usize, j: usize) -> Result<(), PgError> {
    if i >= j || j >= trace.words.len() {
        return Err(PgError::BadSegment { i, j, len: trace.words.len() });
    }
    Ok(())
}

/// Whether the occurrence `uid` is rewritten by some step in `[i, j)`.
pub fn changed_in_segment(trace: &PlainTrace, uid: Uid, i: usize, j: usize) -> Result<bool, PgError> {
    check_segment(trace, i, j)?;
    Ok(trace.steps[i..j].iter().any(|s| s.consumed.contains(&uid)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainVerdict {
    pub i: usize,
    pub j: usize,
    pub phi: Vec<Sym>,
    pub psi: Vec<Sym>,
    pub theta: Vec<Sym>,
}

/// `Γ_i = ΦΘ₀`, `Γ_j = ΦΨΘ₀` with `Θ₀` unchanged over the segment; the split
/// with the longest `Θ₀` is returned.
pub fn turchin_pair_plain(trace: &PlainTrace, i: usize, j: usize) -> Option<PlainVerdict> {
    check_segment(trace, i, j).ok()?;
    let gi = &trace.words[i];
    let gj = &trace.words[j];
    let consumed: HashSet<Uid> = trace.steps[i..j].iter().flat_map(|s| s.consumed.iter().copied()).collect();
    let mut stable = 0;
    while stable < gi.len() && stable < gj.len() {
        let a = &gi[gi.len() - 1 - stable];
        let b = &gj[gj.len() - 1 - stable];
        if a.uid != b.uid || consumed.contains(&a.uid) {
            break;
        }
        stable += 1;
    }
    for l in (0..=stable).rev() {
        let p = gi.len() - l;
        if gj.len() < p + l {
            continue;
        }
        if gi[..p].iter().zip(&gj[..p]).all(|(a, b)| a.letter == b.letter) {
            return Some(PlainVerdict {
                i,
                j,
                phi: gi[..p].iter().map(|l| l.letter.clone()).collect(),
                psi: gj[p..gj.len() - l].iter().map(|l| l.letter.clone()).collect(),
                theta: gi[p..].iter().map(|l| l.letter.clone()).collect(),
            });
        }
    }
    None
}

fn words_of(s: &str) -> Vec<Sym> {
    s.split_whitespace().map(sym).collect()
}

/// Rules `f -> g f;` (several per line allowed) and `init: h f`. `#` starts a
/// comment.
pub fn parse_pg(text: &str) -> Result<PrefixGrammar, PgError> {
    let mut g = PrefixGrammar::default();
    let mut saw_init = false;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| PgError::Parse { line: n + 1, msg: msg.to_string() };
        if let Some(rest) = line.strip_prefix("init:") {
            g.init = words_of(rest.trim_end_matches(';'));
            saw_init = true;
            continue;
        }
        if !line.ends_with(';') {
            return Err(err("rule must end with ';'"));
        }
        for piece in line.split(';') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            let (l, r) = piece.split_once("->").ok_or_else(|| err("expected '->'"))?;
            let lhs = words_of(l);
            if lhs.is_empty() {
                return Err(err("empty left-hand side"));
            }
            g.rules.push(PrefixRule { lhs, rhs: words_of(r) });
        }
    }
    if !saw_init {
        return Err(PgError::Parse { line: 0, msg: "missing 'init:' line".into() });
    }
    Ok(g)
}
