use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::term::{instance_of, Term, SUCC, ZERO};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleL {
    pub name: String,
    pub pats: Vec<Term>,
    pub body: Term,
}

impl fmt::Display for RuleL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = Term::call(&self.name, self.pats.clone());
        write!(f, "{head}={};", self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error("line {line}: variable {var} repeated in the head of {name}")]
    RepeatedVar { line: usize, name: String, var: String },
    #[error("line {line}: pattern {pat} of {name} is not flat")]
    DeepPattern { line: usize, name: String, pat: String },
    #[error("line {line}: pattern {pat} of {name} contains a call")]
    CallInPattern { line: usize, name: String, pat: String },
    #[error("line {line}: variable {var} of the body of {name} is not bound by the head")]
    UnboundVar { line: usize, name: String, var: String },
    #[error("line {line}: {name} used with arity {found}, expected {expected}")]
    Arity { line: usize, name: String, found: usize, expected: usize },
    #[error("line {line}: rule for {name} is unreachable, an earlier rule covers it")]
    Unreachable { line: usize, name: String },
    #[error("unknown function {0}")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FnClass {
    F,
    G,
}

/// An ordered set of rules grouped by function. Rule order is significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<RuleL>,
    order: Vec<String>,
    by_name: BTreeMap<String, Vec<usize>>,
    arity: BTreeMap<String, usize>,
    ctor_arity: BTreeMap<String, usize>,
    family: BTreeMap<String, usize>,
    families: Vec<Vec<String>>,
}

fn check_arities(t: &Term, line: usize, fa: &mut BTreeMap<String, usize>, ca: &mut BTreeMap<String, usize>) -> Result<(), ProgramError> {
    let (map, name) = match t {
        Term::Var(_) => return Ok(()),
        Term::Ctor(c, _) => (&mut *ca, c),
        Term::Call { name, .. } => (&mut *fa, name),
    };
    let n = t.args().len();
    let expected = *map.entry(name.clone()).or_insert(n);
    if expected != n {
        return Err(ProgramError::Arity { line, name: name.clone(), found: n, expected });
    }
    for a in t.args() {
        check_arities(a, line, fa, ca)?;
    }
    Ok(())
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

impl Program {
    /// Builds and checks a program. With `flat`, patterns must be variables
    /// or constructors applied to variables.
    pub fn new(rules: Vec<(RuleL, usize)>, flat: bool) -> Result<Program, ProgramError> {
        let mut order = Vec::new();
        let mut by_name: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut arity = BTreeMap::new();
        let mut ctor_arity = BTreeMap::new();
        for (k, (r, line)) in rules.iter().enumerate() {
            let line = *line;
            let head = Term::call(&r.name, r.pats.clone());
            check_arities(&head, line, &mut arity, &mut ctor_arity)?;
            let mut seen = BTreeSet::new();
            for p in &r.pats {
                if p.has_calls() {
                    return Err(ProgramError::CallInPattern { line, name: r.name.clone(), pat: p.to_string() });
                }
                if flat && p.args().iter().any(|a| !matches!(a, Term::Var(_))) {
                    return Err(ProgramError::DeepPattern { line, name: r.name.clone(), pat: p.to_string() });
                }
            }
            for v in pattern_vars(&r.pats) {
                if !seen.insert(v.clone()) {
                    return Err(ProgramError::RepeatedVar { line, name: r.name.clone(), var: v });
                }
            }
            for v in r.body.vars() {
                if !seen.contains(&v) {
                    return Err(ProgramError::UnboundVar { line, name: r.name.clone(), var: v });
                }
            }
            if !by_name.contains_key(&r.name) {
                order.push(r.name.clone());
            }
            let earlier = by_name.entry(r.name.clone()).or_default();
            for &e in earlier.iter() {
                let prev = Term::call(&rules[e].0.name, rules[e].0.pats.clone());
                if instance_of(&head, &prev).is_some() {
                    return Err(ProgramError::Unreachable { line, name: r.name.clone() });
                }
            }
            earlier.push(k);
        }
        for (r, line) in &rules {
            check_arities(&r.body, *line, &mut arity, &mut ctor_arity)?;
        }
        for n in arity.keys() {
            if !by_name.contains_key(n) {
                return Err(ProgramError::Unknown(n.clone()));
            }
        }
        let rules: Vec<RuleL> = rules.into_iter().map(|(r, _)| r).collect();
        let mut p = Program { rules, order, by_name, arity, ctor_arity, family: BTreeMap::new(), families: vec![] };
        p.build_families();
        Ok(p)
    }

    /// Groups constructors that occur at the same pattern position of the
    /// same function; Peano constructors always form one group.
    fn build_families(&mut self) {
        let mut names: Vec<String> = vec![ZERO.into(), SUCC.into()];
        let mut idx: BTreeMap<String, usize> = BTreeMap::new();
        idx.insert(ZERO.into(), 0);
        idx.insert(SUCC.into(), 1);
        let mut parent = vec![0usize, 0];
        let mut at_pos: BTreeMap<(String, Vec<usize>), usize> = BTreeMap::new();
        fn walk(
            t: &Term,
            pos: &mut Vec<usize>,
            f: &str,
            names: &mut Vec<String>,
            idx: &mut BTreeMap<String, usize>,
            parent: &mut Vec<usize>,
            at_pos: &mut BTreeMap<(String, Vec<usize>), usize>,
        ) {
            if let Term::Ctor(c, args) = t {
                let i = *idx.entry(c.clone()).or_insert_with(|| {
                    names.push(c.clone());
                    parent.push(names.len() - 1);
                    names.len() - 1
                });
                match at_pos.get(&(f.to_string(), pos.clone())) {
                    Some(&j) => {
                        let (a, b) = (find(parent, i), find(parent, j));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                    None => {
                        at_pos.insert((f.to_string(), pos.clone()), i);
                    }
                }
                for (k, a) in args.iter().enumerate() {
                    pos.push(k);
                    walk(a, pos, f, names, idx, parent, at_pos);
                    pos.pop();
                }
            }
        }
        for r in &self.rules {
            for (k, p) in r.pats.iter().enumerate() {
                walk(p, &mut vec![k], &r.name, &mut names, &mut idx, &mut parent, &mut at_pos);
            }
        }
        let mut groups: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            let root = find(&mut parent, i);
            let g = *groups.entry(root).or_insert_with(|| {
                self.families.push(vec![]);
                self.families.len() - 1
            });
            self.families[g].push(name.clone());
            self.family.insert(name.clone(), g);
        }
        self.ctor_arity.entry(ZERO.into()).or_insert(0);
        self.ctor_arity.entry(SUCC.into()).or_insert(1);
    }

    pub fn functions(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    pub fn is_defined(&self, f: &str) -> bool {
        self.by_name.contains_key(f)
    }

    pub fn rules_of(&self, f: &str) -> impl Iterator<Item = (usize, &RuleL)> {
        self.by_name.get(f).into_iter().flatten().map(|&k| (k, &self.rules[k]))
    }

    pub fn arity(&self, f: &str) -> Option<usize> {
        self.arity.get(f).copied()
    }

    pub fn ctor_arity(&self, c: &str) -> Option<usize> {
        self.ctor_arity.get(c).copied()
    }

    /// The constructors narrowing must consider when a pattern asks for `c`.
    pub fn family_of(&self, c: &str) -> Vec<(String, usize)> {
        match self.family.get(c) {
            Some(&g) => self.families[g].iter().map(|n| (n.clone(), self.ctor_arity(n).unwrap_or(0))).collect(),
            None => vec![(c.to_string(), self.ctor_arity(c).unwrap_or(0))],
        }
    }

    pub fn classify(&self, f: &str) -> Result<FnClass, ProgramError> {
        let rules: Vec<_> = self.rules_of(f).collect();
        if rules.is_empty() {
            return Err(ProgramError::Unknown(f.to_string()));
        }
        let trivial = rules.len() == 1 && rules[0].1.pats.iter().all(|p| matches!(p, Term::Var(_)));
        Ok(if trivial { FnClass::F } else { FnClass::G })
    }
}

pub fn classify_function(p: &Program, f: &str) -> Result<FnClass, ProgramError> {
    p.classify(f)
}

fn pattern_vars(pats: &[Term]) -> Vec<String> {
    fn go(t: &Term, out: &mut Vec<String>) {
        match t {
            Term::Var(v) => out.push(v.clone()),
            _ => t.args().iter().for_each(|a| go(a, out)),
        }
    }
    let mut out = Vec::new();
    pats.iter().for_each(|p| go(p, &mut out));
    out
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
