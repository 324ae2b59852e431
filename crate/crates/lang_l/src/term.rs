//! Terms of the language: variables, constructor applications and function
//! calls. Every call occurrence carries a uid so that stack letters can be
//! followed along a driving path; equality ignores uids.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use mlpg::Uid;

pub const ZERO: &str = "Z";
pub const SUCC: &str = "S";

#[derive(Clone, Debug)]
pub enum Term {
    Var(String),
    Ctor(String, Vec<Term>),
    Call { name: String, args: Vec<Term>, uid: Uid },
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a == b,
            (Term::Ctor(a, xs), Term::Ctor(b, ys)) => a == b && xs == ys,
            (Term::Call { name: a, args: xs, .. }, Term::Call { name: b, args: ys, .. }) => a == b && xs == ys,
            _ => false,
        }
    }
}

impl Eq for Term {}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Term::Var(v) => {
                0u8.hash(state);
                v.hash(state);
            }
            Term::Ctor(c, xs) => {
                1u8.hash(state);
                c.hash(state);
                xs.hash(state);
            }
            Term::Call { name, args, .. } => {
                2u8.hash(state);
                name.hash(state);
                args.hash(state);
            }
        }
    }
}

/// Position of a subterm: argument indices from the root.
pub type Path = Vec<usize>;

pub type Subst = BTreeMap<String, Term>;

impl Term {
    pub fn var(v: &str) -> Term {
        Term::Var(v.to_string())
    }

    pub fn ctor(c: &str, args: Vec<Term>) -> Term {
        Term::Ctor(c.to_string(), args)
    }

    pub fn call(f: &str, args: Vec<Term>) -> Term {
        Term::Call { name: f.to_string(), args, uid: 0 }
    }

    pub fn zero() -> Term {
        Term::ctor(ZERO, vec![])
    }

    pub fn succ(t: Term) -> Term {
        Term::ctor(SUCC, vec![t])
    }

    pub fn nat(n: usize) -> Term {
        (0..n).fold(Term::zero(), |t, _| Term::succ(t))
    }

    /// `t+k`.
    pub fn plus(t: Term, k: usize) -> Term {
        (0..k).fold(t, |t, _| Term::succ(t))
    }

    pub fn as_nat(&self) -> Option<usize> {
        let mut n = 0;
        let mut t = self;
        loop {
            match t {
                Term::Ctor(c, a) if c == SUCC && a.len() == 1 => {
                    n += 1;
                    t = &a[0];
                }
                Term::Ctor(c, a) if c == ZERO && a.is_empty() => return Some(n),
                _ => return None,
            }
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::Ctor(_, a) | Term::Call { args: a, .. } => a,
        }
    }

    pub fn args_mut(&mut self) -> &mut [Term] {
        match self {
            Term::Var(_) => &mut [],
            Term::Ctor(_, a) | Term::Call { args: a, .. } => a,
        }
    }

    pub fn head(&self) -> &str {
        match self {
            Term::Var(v) => v,
            Term::Ctor(c, _) => c,
            Term::Call { name, .. } => name,
        }
    }

    pub fn is_call(&self) -> bool {
        matches!(self, Term::Call { .. })
    }

    pub fn has_calls(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Call { .. } => true,
            Term::Ctor(_, a) => a.iter().any(Term::has_calls),
        }
    }

    pub fn at(&self, p: &[usize]) -> Option<&Term> {
        let mut t = self;
        for &k in p {
            t = t.args().get(k)?;
        }
        Some(t)
    }

    pub fn at_mut(&mut self, p: &[usize]) -> Option<&mut Term> {
        let mut t = self;
        for &k in p {
            t = t.args_mut().get_mut(k)?;
        }
        Some(t)
    }

    pub fn replace_at(&mut self, p: &[usize], new: Term) -> Term {
        let slot = self.at_mut(p).expect("valid path");
        std::mem::replace(slot, new)
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.args().iter().map(Term::depth).max().unwrap_or(0)
    }

    /// Variables in order of first appearance.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>, seen: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
            _ => self.args().iter().for_each(|a| a.collect_vars(out, seen)),
        }
    }

    pub fn subst(&self, s: &Subst) -> Term {
        match self {
            Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Ctor(c, a) => Term::Ctor(c.clone(), a.iter().map(|t| t.subst(s)).collect()),
            Term::Call { name, args, uid } => {
                Term::Call { name: name.clone(), args: args.iter().map(|t| t.subst(s)).collect(), uid: *uid }
            }
        }
    }

    /// Paths of all calls in pre-order.
    pub fn call_paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        fn go(t: &Term, p: &mut Path, out: &mut Vec<Path>) {
            if t.is_call() {
                out.push(p.clone());
            }
            for (k, a) in t.args().iter().enumerate() {
                p.push(k);
                go(a, p, out);
                p.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Paths of the calls not below another call.
    pub fn top_calls(&self) -> Vec<Path> {
        let mut out = Vec::new();
        fn go(t: &Term, p: &mut Path, out: &mut Vec<Path>) {
            if t.is_call() {
                out.push(p.clone());
                return;
            }
            for (k, a) in t.args().iter().enumerate() {
                p.push(k);
                go(a, p, out);
                p.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn call_uids(&self) -> Vec<Uid> {
        self.call_paths().iter().map(|p| self.at(p).and_then(Term::uid).expect("call")).collect()
    }

    pub fn uid(&self) -> Option<Uid> {
        match self {
            Term::Call { uid, .. } => Some(*uid),
            _ => None,
        }
    }

    pub fn find_uid(&self, u: Uid) -> Option<Path> {
        self.call_paths().into_iter().find(|p| self.at(p).and_then(Term::uid) == Some(u))
    }

    /// Gives every call a fresh uid, in pre-order.
    pub fn renumber(&mut self, next: &mut Uid) {
        if let Term::Call { uid, .. } = self {
            *uid = *next;
            *next += 1;
        }
        for a in self.args_mut() {
            a.renumber(next);
        }
    }

    pub fn max_uid(&self) -> Option<Uid> {
        self.call_uids().into_iter().max()
    }

    /// Renames variables; unmapped variables are kept.
    pub fn rename(&self, m: &BTreeMap<String, String>) -> Term {
        let s: Subst = m.iter().map(|(k, v)| (k.clone(), Term::Var(v.clone()))).collect();
        self.subst(&s)
    }
}

/// Matches `pat` against `t`, extending `s`; variables of `pat` bind
/// consistently.
pub fn match_term(pat: &Term, t: &Term, s: &mut Subst) -> bool {
    match pat {
        Term::Var(v) => match s.get(v) {
            Some(b) => b == t,
            None => {
                s.insert(v.clone(), t.clone());
                true
            }
        },
        Term::Ctor(c, ps) => match t {
            Term::Ctor(d, ts) => c == d && ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, x)| match_term(p, x, s)),
            _ => false,
        },
        Term::Call { name, args, .. } => match t {
            Term::Call { name: n2, args: a2, .. } => {
                name == n2 && args.len() == a2.len() && args.iter().zip(a2).all(|(p, x)| match_term(p, x, s))
            }
            _ => false,
        },
    }
}

pub fn instance_of(t: &Term, pat: &Term) -> Option<Subst> {
    let mut s = Subst::new();
    match_term(pat, t, &mut s).then_some(s)
}

/// `a` and `b` are equal up to a bijective renaming of variables; returns
/// the renaming from the variables of `a` to those of `b`.
pub fn renaming(a: &Term, b: &Term) -> Option<BTreeMap<String, String>> {
    fn go(a: &Term, b: &Term, fw: &mut BTreeMap<String, String>, bw: &mut BTreeMap<String, String>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => match (fw.get(x), bw.get(y)) {
                (None, None) => {
                    fw.insert(x.clone(), y.clone());
                    bw.insert(y.clone(), x.clone());
                    true
                }
                (Some(y2), Some(x2)) => y2 == y && x2 == x,
                _ => false,
            },
            (Term::Ctor(c, xs), Term::Ctor(d, ys)) => {
                c == d && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, fw, bw))
            }
            (Term::Call { name: c, args: xs, .. }, Term::Call { name: d, args: ys, .. }) => {
                c == d && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, fw, bw))
            }
            _ => false,
        }
    }
    let mut fw = BTreeMap::new();
    let mut bw = BTreeMap::new();
    go(a, b, &mut fw, &mut bw).then_some(fw)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.as_nat() {
            return write!(f, "{n}");
        }
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Ctor(c, a) if c == SUCC && a.len() == 1 => write!(f, "{}+1", a[0]),
            Term::Ctor(c, a) | Term::Call { name: c, args: a, .. } => {
                write!(f, "{c}")?;
                if a.is_empty() && !self.is_call() {
                    return Ok(());
                }
                write!(f, "(")?;
                for (k, t) in a.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}
