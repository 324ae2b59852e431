//! Termination checks on traces of stack words: permanently stable suffixes,
//! Turchin pairs, homeomorphic embedding of terms and their composition.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use lang_l::Term;
use mlpg::{GWord, Mlpg, Sym, TraceSession, Uid};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WhistleError {
    BadSegment { i: usize, j: usize, len: usize },
}

impl fmt::Display for WhistleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WhistleError::BadSegment { i, j, len } => write!(f, "segment [{i},{j}] invalid for a trace of {len} words"),
        }
    }
}

impl std::error::Error for WhistleError {}

/// A sequence of stack words with the uids each step consumed. `n` bounds the
/// number of letters a step rewrites.
#[derive(Debug, Clone, Default)]
pub struct StackTrace {
    pub words: Vec<GWord>,
    pub consumed: Vec<BTreeSet<Uid>>,
    pub n: usize,
}

impl StackTrace {
    pub fn new(n: usize) -> Self {
        StackTrace { words: vec![], consumed: vec![], n }
    }

    pub fn from_session(s: &TraceSession, g: &Mlpg) -> Self {
        StackTrace {
            words: s.words.clone(),
            consumed: s.log.iter().map(|l| l.consumed.iter().copied().collect()).collect(),
            n: g.max_head().max(1),
        }
    }

    /// A trace whose steps consume the uids of a word that are absent from
    /// the next one.
    pub fn from_words(words: Vec<GWord>, n: usize) -> Self {
        let mut t = StackTrace::new(n);
        for w in words {
            t.push_word(w);
        }
        t
    }

    pub fn push_word(&mut self, w: GWord) {
        if let Some(prev) = self.words.last() {
            let gone = all_uids(prev).filter(|u| !w.contains_uid(*u)).collect();
            self.consumed.push(gone);
        }
        self.words.push(w);
    }

    pub fn push(&mut self, w: GWord, consumed: BTreeSet<Uid>) {
        if !self.words.is_empty() {
            self.consumed.push(consumed);
        }
        self.words.push(w);
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    fn check(&self, i: usize, j: usize) -> Result<(), WhistleError> {
        if i < j && j < self.words.len() {
            Ok(())
        } else {
            Err(WhistleError::BadSegment { i, j, len: self.words.len() })
        }
    }

    fn vis_uids(&self, k: usize) -> Vec<Uid> {
        self.words[k].visible.uids()
    }
}

fn all_uids(w: &GWord) -> impl Iterator<Item = Uid> + '_ {
    w.visible.iter().chain(w.invisible.iter()).map(|l| l.uid)
}

/// Length of the longest suffix of `Γ_i` whose letters stay the visible
/// suffix of every word up to `Γ_j`, none consumed, with at least `n` letters
/// before it in every word `Γ_k`, `i ≤ k < j`.
pub fn stable_suffix_len(t: &StackTrace, i: usize, j: usize) -> Result<usize, WhistleError> {
    t.check(i, j)?;
    let gi = t.vis_uids(i);
    let mut l = gi.len();
    for k in i..=j {
        let gk = t.vis_uids(k);
        if k < j {
            l = l.min(gk.len().saturating_sub(t.n));
        }
        l = extend_common(&gi, &gk, l, if k < j { Some(&t.consumed[k]) } else { None });
    }
    Ok(l)
}

/// Largest `m ≤ l` such that the last `m` uids of `a` and `b` agree and none
/// is in `consumed`.
fn extend_common(a: &[Uid], b: &[Uid], l: usize, consumed: Option<&BTreeSet<Uid>>) -> usize {
    let mut m = 0;
    while m < l && m < a.len() && m < b.len() {
        let u = a[a.len() - 1 - m];
        if u != b[b.len() - 1 - m] || consumed.is_some_and(|c| c.contains(&u)) {
            break;
        }
        m += 1;
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurchinVerdict {
    pub i: usize,
    pub j: usize,
    pub theta_len: usize,
    /// `Φ`, the prefix of `Γ_i` before the stable suffix.
    pub top: Vec<Sym>,
    /// `Ψ`, the letters of `Γ_j` between the copy of `Φ` and the suffix.
    pub mid: Vec<Sym>,
    /// `Θ₀`.
    pub ctx: Vec<Sym>,
}

fn join(w: &[Sym]) -> String {
    if w.is_empty() {
        "Λ".into()
    } else {
        w.iter().map(|s| s.as_ref()).collect()
    }
}

impl fmt::Display for TurchinVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TURCHIN i={} j={} top={} mid={} ctx={}", self.i, self.j, join(&self.top), join(&self.mid), join(&self.ctx))
    }
}

fn verdict_with(t: &StackTrace, i: usize, j: usize, stable: usize) -> Option<TurchinVerdict> {
    let gi = t.words[i].visible.plain();
    let gj = t.words[j].visible.plain();
    (0..=stable).rev().find_map(|l| {
        let p = gi.len() - l;
        (gj.len() >= p + l && gi[..p] == gj[..p]).then(|| TurchinVerdict {
            i,
            j,
            theta_len: l,
            top: gi[..p].to_vec(),
            mid: gj[p..gj.len() - l].to_vec(),
            ctx: gi[p..].to_vec(),
        })
    })
}

/// `Γ_i = ΦΘ₀` and `Γ_j = Φ′ΨΘ₀` with `Φ` and `Φ′` equal as plain words and
/// `Θ₀` permanently stable over `[i,j]`; the longest such `Θ₀` wins.
pub fn turchin_pair_mlpg(t: &StackTrace, i: usize, j: usize) -> Option<TurchinVerdict> {
    let stable = stable_suffix_len(t, i, j).ok()?;
    verdict_with(t, i, j, stable)
}

/// Homeomorphic embedding `a ⊴ b`: variables embed in variables, `a` may
/// embed in an argument of `b`, or both share a head and embed argumentwise.
pub fn hve(a: &Term, b: &Term) -> bool {
    let mut memo = HashMap::new();
    hve_memo(a, b, &mut memo)
}

fn hve_memo(a: &Term, b: &Term, memo: &mut HashMap<(*const Term, *const Term), bool>) -> bool {
    let key = (a as *const Term, b as *const Term);
    if let Some(&r) = memo.get(&key) {
        return r;
    }
    let r = match (a, b) {
        (Term::Var(_), Term::Var(_)) => true,
        _ => {
            b.args().iter().any(|x| hve_memo(a, x, memo))
                || (!matches!(a, Term::Var(_))
                    && a.head() == b.head()
                    && a.is_call() == b.is_call()
                    && a.args().len() == b.args().len()
                    && a.args().iter().zip(b.args()).all(|(x, y)| hve_memo(x, y, memo)))
        }
    };
    memo.insert(key, r);
    r
}

pub fn composite(t: &StackTrace, configs: &[Term], i: usize, j: usize) -> bool {
    turchin_pair_mlpg(t, i, j).is_some() && hve(&configs[i], &configs[j])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Turchin,
    Hve,
    Composite,
}

impl std::str::FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "turchin" => Ok(Relation::Turchin),
            "hve" => Ok(Relation::Hve),
            "composite" => Ok(Relation::Composite),
            _ => Err(format!("unknown whistle {s}")),
        }
    }
}

/// Incremental search for the first related pair: each new word `j` is tested
/// against `i = 0..j` in ascending order. Stable suffix lengths only shrink
/// as `j` grows, so they are kept per `i`.
#[derive(Debug, Clone)]
pub struct PairFinder {
    pub relation: Relation,
    pub trace: StackTrace,
    pub configs: Vec<Term>,
    stable: Vec<usize>,
}

impl PairFinder {
    pub fn new(relation: Relation, n: usize) -> Self {
        PairFinder { relation, trace: StackTrace::new(n), configs: vec![], stable: vec![] }
    }

    /// Appends a word (and its configuration, needed by hve-based relations)
    /// and returns the smallest `i` related to it.
    pub fn push(&mut self, w: GWord, consumed: Option<BTreeSet<Uid>>, config: Option<Term>) -> Option<(usize, Option<TurchinVerdict>)> {
        match consumed {
            Some(c) => self.trace.push(w, c),
            None => self.trace.push_word(w),
        }
        if let Some(c) = config {
            self.configs.push(c);
        }
        let j = self.trace.len() - 1;
        let t = &self.trace;
        let gj = t.vis_uids(j);
        if j > 0 {
            let prev = t.vis_uids(j - 1);
            for i in 0..j {
                let gi = t.vis_uids(i);
                let mut l = self.stable[i].min(prev.len().saturating_sub(t.n));
                l = extend_common(&gi, &gj, l, Some(&t.consumed[j - 1]));
                self.stable[i] = l;
            }
        }
        self.stable.push(gj.len());
        (0..j).find_map(|i| {
            let tv = || verdict_with(t, i, j, self.stable[i]);
            match self.relation {
                Relation::Turchin => tv().map(|v| (i, Some(v))),
                Relation::Hve => hve(&self.configs[i], &self.configs[j]).then_some((i, None)),
                Relation::Composite => {
                    tv().filter(|_| hve(&self.configs[i], &self.configs[j])).map(|v| (i, Some(v)))
                }
            }
        })
    }
}

/// The first pair `(i, j)` in scanning order satisfying `relation`.
pub fn find_first_pair(t: &StackTrace, relation: Relation, configs: Option<&[Term]>) -> Option<(usize, usize)> {
    let mut f = PairFinder::new(relation, t.n);
    for (k, w) in t.words.iter().enumerate() {
        let consumed = (k > 0).then(|| t.consumed[k - 1].clone());
        let cfg = configs.map(|c| c[k].clone());
        if let Some((i, _)) = f.push(w.clone(), consumed, cfg) {
            return Some((i, k));
        }
    }
    None
}
