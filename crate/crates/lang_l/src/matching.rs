//! Ordered pattern matching of a call against its function's rules, and
//! readiness: whether a call can be matched without first evaluating another
//! call.

use crate::program::Program;
use crate::term::{Path, Subst, Term};

#[derive(Debug, Clone, PartialEq)]
pub enum MatchRes {
    /// Rule index and bindings of the pattern variables.
    Match(usize, Subst),
    /// No rule applies.
    Fail,
    /// Matching must narrow this variable; `ctor` is the constructor the
    /// blocking pattern asks for. The path is relative to the call.
    NeedVar { path: Path, var: String, ctor: String },
    /// Matching needs the value of the call at this relative path.
    NeedCall(Path),
}

enum ColRes {
    Ok,
    Fail,
    Blocked(Path, bool),
}

fn match_col(pat: &Term, t: &Term, path: &mut Path, s: &mut Subst, blocked: &mut Option<(Path, bool, String)>) -> bool {
    match pat {
        Term::Var(v) => {
            s.insert(v.clone(), t.clone());
            true
        }
        Term::Ctor(c, ps) => match t {
            Term::Ctor(d, ts) => {
                if c != d || ps.len() != ts.len() {
                    return false;
                }
                for (k, (p, x)) in ps.iter().zip(ts).enumerate() {
                    path.push(k);
                    let ok = match_col(p, x, path, s, blocked);
                    path.pop();
                    if !ok {
                        return false;
                    }
                }
                true
            }
            Term::Var(_) => {
                if blocked.is_none() {
                    *blocked = Some((path.clone(), false, c.clone()));
                }
                true
            }
            Term::Call { .. } => {
                if blocked.is_none() {
                    *blocked = Some((path.clone(), true, c.clone()));
                }
                true
            }
        },
        Term::Call { .. } => false,
    }
}

fn match_rule_args(pats: &[Term], args: &[Term]) -> (ColRes, Subst, Option<String>) {
    let mut s = Subst::new();
    let mut blocked = None;
    for (k, (p, a)) in pats.iter().zip(args).enumerate() {
        if !match_col(p, a, &mut vec![k], &mut s, &mut blocked) {
            return (ColRes::Fail, s, None);
        }
    }
    match blocked {
        None => (ColRes::Ok, s, None),
        Some((p, call, c)) => (ColRes::Blocked(p, call), s, Some(c)),
    }
}

/// Tries the rules of `f` in order against `args`. A rule that fails in any
/// column is skipped; the first rule that neither fails nor succeeds blocks.
pub fn match_call(prog: &Program, f: &str, args: &[Term]) -> MatchRes {
    for (k, r) in prog.rules_of(f) {
        match match_rule_args(&r.pats, args) {
            (ColRes::Ok, s, _) => return MatchRes::Match(k, s),
            (ColRes::Fail, _, _) => continue,
            (ColRes::Blocked(p, true), _, _) => return MatchRes::NeedCall(p),
            (ColRes::Blocked(p, false), _, c) => {
                let var = match args_at(args, &p) {
                    Some(Term::Var(v)) => v.clone(),
                    _ => unreachable!("blocked on a variable"),
                };
                return MatchRes::NeedVar { path: p, var, ctor: c.unwrap_or_default() };
            }
        }
    }
    MatchRes::Fail
}

pub(crate) fn args_at<'a>(args: &'a [Term], p: &[usize]) -> Option<&'a Term> {
    let (first, rest) = p.split_first()?;
    args.get(*first)?.at(rest)
}

/// Instantiates `c` applied to placeholder variables.
pub(crate) fn ctor_with_vars(c: &str, arity: usize, fresh: &mut impl FnMut() -> String) -> Term {
    Term::ctor(c, (0..arity).map(|_| Term::Var(fresh())).collect())
}

/// `None` if the call is ready; otherwise the relative path of the call whose
/// value matching needs. Variables are explored under every constructor of
/// their family, so a call is unready as soon as some instance would need a
/// call.
pub fn needed_call(prog: &Program, call: &Term) -> Option<Path> {
    let (f, args) = match call {
        Term::Call { name, args, .. } => (name.as_str(), args.clone()),
        _ => return None,
    };
    let mut counter = 0usize;
    let mut fresh = || {
        counter += 1;
        format!("#{counter}")
    };
    fn explore(prog: &Program, f: &str, args: Vec<Term>, fresh: &mut impl FnMut() -> String, budget: &mut usize) -> Option<Path> {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        match match_call(prog, f, &args) {
            MatchRes::NeedCall(p) => Some(p),
            MatchRes::NeedVar { var, ctor, .. } => {
                for (c, n) in prog.family_of(&ctor) {
                    let inst = ctor_with_vars(&c, n, fresh);
                    let s: Subst = [(var.clone(), inst)].into_iter().collect();
                    let next: Vec<Term> = args.iter().map(|a| a.subst(&s)).collect();
                    if let Some(p) = explore(prog, f, next, fresh, budget) {
                        return Some(p);
                    }
                }
                None
            }
            _ => None,
        }
    }
    let mut budget = 4096;
    explore(prog, f, args, &mut fresh, &mut budget)
}

pub fn is_ready(prog: &Program, call: &Term) -> bool {
    needed_call(prog, call).is_none()
}

/// A call of a configuration with its readiness mark.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedCall {
    pub path: Path,
    pub name: String,
    pub uid: mlpg::Uid,
    pub ready: bool,
    /// Absolute path of the call this one passes its label to.
    pub needs: Option<Path>,
}

/// Every call of `t` in pre-order, marked ready or unready.
pub fn mark_calls(prog: &Program, t: &Term) -> Vec<MarkedCall> {
    t.call_paths()
        .into_iter()
        .map(|p| {
            let c = t.at(&p).expect("call path");
            let needs = needed_call(prog, c).map(|rel| p.iter().chain(&rel).copied().collect());
            MarkedCall { path: p.clone(), name: c.head().to_string(), uid: c.uid().unwrap_or(0), ready: needs.is_none(), needs }
        })
        .collect()
}

/// Paths from the first top-level call down to the ready call it waits on.
pub fn active_chain(prog: &Program, t: &Term) -> Vec<Path> {
    let mut out = Vec::new();
    let Some(mut p) = t.top_calls().into_iter().next() else { return out };
    loop {
        out.push(p.clone());
        let c = t.at(&p).expect("call path");
        match needed_call(prog, c) {
            Some(rel) => p.extend(rel),
            None => return out,
        }
    }
}
