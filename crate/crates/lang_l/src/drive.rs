//! One unfolding step of a configuration, and ground evaluation.

use std::collections::BTreeSet;

use mlpg::Uid;

use crate::matching::{active_chain, ctor_with_vars, match_call, MatchRes};
use crate::program::Program;
use crate::term::{Path, Subst, Term};

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub term: Term,
    pub next_var: usize,
    pub next_uid: Uid,
}

impl Configuration {
    /// Wraps `term`, renumbering its calls from 1. Fresh variables continue
    /// after the largest `x<n>` in the term (`x` counts as `x0`).
    pub fn new(mut term: Term) -> Configuration {
        let mut next_uid = 1;
        term.renumber(&mut next_uid);
        let next_var = next_var_after(&term);
        Configuration { term, next_var, next_uid }
    }

    /// Wraps `term` keeping its uids.
    pub fn keep_uids(term: Term) -> Configuration {
        let next_uid = term.max_uid().map_or(1, |u| u + 1);
        let next_var = next_var_after(&term);
        Configuration { term, next_var, next_uid }
    }

    pub fn fresh_var(&mut self) -> String {
        let used: BTreeSet<String> = self.term.vars().into_iter().collect();
        loop {
            let v = format!("x{}", self.next_var);
            self.next_var += 1;
            if !used.contains(&v) {
                return v;
            }
        }
    }
}

fn next_var_after(t: &Term) -> usize {
    t.vars()
        .iter()
        .filter_map(|v| {
            let rest = v.strip_prefix('x')?;
            if rest.is_empty() {
                Some(0)
            } else {
                rest.parse::<usize>().ok()
            }
        })
        .max()
        .map_or(1, |n| n + 1)
}

/// What a driving step did to the calls of the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    /// The rewritten call.
    pub head: Uid,
    /// Calls created from the rule body that are not below another body call.
    pub roots: Vec<Uid>,
    /// All calls created by the step, body calls and copies alike.
    pub created: Vec<Uid>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BranchKind {
    Rewrite { rule: usize, step: StepInfo },
    /// No rule applies to the head call under this narrowing.
    Stuck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// Narrowing of the configuration's variables; empty for an ε-step.
    pub narrowing: Vec<(String, Term)>,
    pub config: Configuration,
    pub kind: BranchKind,
}

impl Branch {
    pub fn is_epsilon(&self) -> bool {
        self.narrowing.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DriveError {
    #[error("configuration has no calls")]
    NoCalls,
    #[error("evaluation budget of {0} steps exhausted")]
    Budget(usize),
    #[error("no rule applies to {0}")]
    Stuck(String),
    #[error("term is not ground: {0}")]
    NotGround(String),
}

/// Path of the call driving would rewrite: the ready end of the active chain.
pub fn head_redex(prog: &Program, t: &Term) -> Option<Path> {
    active_chain(prog, t).pop()
}

/// Rewrites the ready head call. A variable scrutinee produces one branch per
/// constructor of its family, the narrowing applied to the whole
/// configuration; a branch whose instance still needs a variable is narrowed
/// again. Arguments are substituted unevaluated.
pub fn drive(prog: &Program, cfg: &Configuration) -> Result<Vec<Branch>, DriveError> {
    let p = head_redex(prog, &cfg.term).ok_or(DriveError::NoCalls)?;
    let mut out = Vec::new();
    let mut work = cfg.clone();
    narrow(prog, &p, &mut work, Vec::new(), &mut out);
    let next_var = out.iter().map(|b| b.config.next_var).max().unwrap_or(cfg.next_var);
    for b in &mut out {
        b.config.next_var = next_var;
    }
    Ok(out)
}

fn narrow(prog: &Program, p: &Path, cfg: &mut Configuration, narrowing: Vec<(String, Term)>, out: &mut Vec<Branch>) {
    let call = cfg.term.at(p).expect("redex").clone();
    let Term::Call { name, args, uid } = &call else { unreachable!("redex is a call") };
    match match_call(prog, name, args) {
        MatchRes::Match(rule, s) => {
            let (config, step) = rewrite(prog, cfg, p, rule, &s, *uid);
            out.push(Branch { narrowing, config, kind: BranchKind::Rewrite { rule, step } });
        }
        MatchRes::Fail | MatchRes::NeedCall(_) => {
            out.push(Branch { narrowing, config: cfg.clone(), kind: BranchKind::Stuck });
        }
        MatchRes::NeedVar { var, ctor, .. } => {
            for (c, n) in prog.family_of(&ctor) {
                let mut next = cfg.clone();
                let inst = ctor_with_vars(&c, n, &mut || next_fresh(&mut next));
                let s: Subst = [(var.clone(), inst.clone())].into_iter().collect();
                next.term = next.term.subst(&s);
                let mut nar: Vec<(String, Term)> = narrowing.iter().map(|(v, t)| (v.clone(), t.subst(&s))).collect();
                if !nar.iter().any(|(v, _)| *v == var) {
                    nar.push((var.clone(), inst));
                }
                narrow(prog, p, &mut next, nar, out);
                cfg.next_var = cfg.next_var.max(next.next_var);
            }
        }
    }
}

fn next_fresh(cfg: &mut Configuration) -> String {
    cfg.fresh_var()
}

fn rewrite(prog: &Program, cfg: &Configuration, p: &Path, rule: usize, s: &Subst, head: Uid) -> (Configuration, StepInfo) {
    let mut next_uid = cfg.next_uid;
    let mut created = Vec::new();
    let mut roots = Vec::new();
    let mut used = BTreeSet::new();
    fn inst(
        t: &Term,
        s: &Subst,
        under_call: bool,
        next_uid: &mut Uid,
        used: &mut BTreeSet<String>,
        created: &mut Vec<Uid>,
        roots: &mut Vec<Uid>,
    ) -> Term {
        match t {
            Term::Var(v) => {
                let mut val = s.get(v).cloned().unwrap_or_else(|| t.clone());
                if !used.insert(v.clone()) {
                    let before = *next_uid;
                    val.renumber(next_uid);
                    created.extend(before..*next_uid);
                }
                val
            }
            Term::Ctor(c, a) => {
                Term::Ctor(c.clone(), a.iter().map(|x| inst(x, s, under_call, next_uid, used, created, roots)).collect())
            }
            Term::Call { name, args, .. } => {
                let uid = *next_uid;
                *next_uid += 1;
                created.push(uid);
                if !under_call {
                    roots.push(uid);
                }
                let args = args.iter().map(|x| inst(x, s, true, next_uid, used, created, roots)).collect();
                Term::Call { name: name.clone(), args, uid }
            }
        }
    }
    let body = inst(&prog.rules[rule].body, s, false, &mut next_uid, &mut used, &mut created, &mut roots);
    let mut term = cfg.term.clone();
    term.replace_at(p, body);
    (Configuration { term, next_var: cfg.next_var, next_uid }, StepInfo { head, roots, created })
}

/// Normal-order evaluation of a closed term to constructor normal form.
pub fn eval_ground(prog: &Program, t: &Term, budget: usize) -> Result<Term, DriveError> {
    if !t.vars().is_empty() {
        return Err(DriveError::NotGround(t.to_string()));
    }
    let mut cfg = Configuration::keep_uids(t.clone());
    let mut steps = 0;
    while cfg.term.has_calls() {
        if steps == budget {
            return Err(DriveError::Budget(budget));
        }
        steps += 1;
        let mut bs = drive(prog, &cfg)?;
        let b = bs.pop().expect("ground drive has one branch");
        if b.kind == BranchKind::Stuck {
            let p = head_redex(prog, &b.config.term).expect("redex");
            return Err(DriveError::Stuck(b.config.term.at(&p).expect("redex").to_string()));
        }
        cfg = b.config;
    }
    Ok(cfg.term)
}
