//! Reading a residual program off a closed process graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use lang_l::{Program, ProgramError, RuleL, Subst, Term};

use crate::graph::{core, Def, Graph, Kind, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResidualError {
    #[error("the process graph is open: node {0} was not developed")]
    Open(NodeId),
    #[error("residual program is ill formed: {0}")]
    Program(#[from] ProgramError),
}

#[derive(Debug, Clone)]
pub struct Residual {
    pub program: Program,
    pub entry: String,
    /// Variables of the entry configuration, in parameter order.
    pub params: Vec<String>,
}

impl Residual {
    /// The entry call applied to `args`.
    pub fn entry_call(&self, args: Vec<Term>) -> Term {
        Term::call(&self.entry, args)
    }
}

struct Gen<'a> {
    g: &'a Graph,
    fold_targets: BTreeSet<NodeId>,
    names: BTreeMap<NodeId, String>,
    counters: BTreeMap<String, usize>,
    queue: VecDeque<NodeId>,
    rules: Vec<RuleL>,
}

fn is_narrowing(g: &Graph, n: NodeId) -> bool {
    match &g.nodes[n].kind {
        Kind::Drive { branches } => branches.iter().any(|&b| !g.nodes[b].edge.is_empty()),
        _ => false,
    }
}

impl Gen<'_> {
    fn function(&mut self, n: NodeId) -> Term {
        let params = self.g.nodes[n].config.term.vars();
        let name = match self.names.get(&n) {
            Some(s) => s.clone(),
            None => {
                let t = &self.g.nodes[n].config.term;
                let prefix = core(t).map_or("f".to_string(), |(_, c)| c.head().to_string());
                let k = self.counters.entry(prefix.clone()).or_insert(0);
                *k += 1;
                let s = format!("{prefix}{k}");
                self.names.insert(n, s.clone());
                self.queue.push_back(n);
                s
            }
        };
        Term::call(&name, params.into_iter().map(Term::Var).collect())
    }

    fn is_function(&self, n: NodeId) -> bool {
        self.names.contains_key(&n) || self.fold_targets.contains(&n)
    }

    fn expr(&mut self, n: NodeId) -> Result<Term, ResidualError> {
        if self.is_function(n) || is_narrowing(self.g, n) {
            return Ok(self.function(n));
        }
        self.expand(n)
    }

    /// The expression of `n` itself, even when `n` is a function.
    fn expand(&mut self, n: NodeId) -> Result<Term, ResidualError> {
        let node = &self.g.nodes[n];
        Ok(match &node.kind {
            Kind::Drive { branches } => self.expr(branches[0])?,
            Kind::Terminal | Kind::Stuck => node.config.term.clone(),
            Kind::Pending | Kind::Frontier => return Err(ResidualError::Open(n)),
            Kind::Let { defs, body } => {
                let body = self.expr(*body)?;
                let mut s = Subst::new();
                for (v, d) in defs {
                    let t = match d {
                        Def::Static(t) => t.clone(),
                        Def::Node(k) => self.expr(*k)?,
                    };
                    s.insert(v.clone(), t);
                }
                subst_all(&body, &s)
            }
            Kind::Decompose { skeleton, holes } => {
                let mut s = Subst::new();
                for (v, k) in holes {
                    s.insert(v.clone(), self.expr(*k)?);
                }
                skeleton.subst(&s)
            }
            Kind::Fold { skeleton, holes } => {
                let mut s = Subst::new();
                for h in holes {
                    let call = self.function(h.target);
                    s.insert(h.var.clone(), call.subst(&h.args));
                }
                skeleton.subst(&s)
            }
        })
    }

    fn rules_for(&mut self, f: NodeId) -> Result<(), ResidualError> {
        let name = self.names[&f].clone();
        let pats: Vec<Term> = self.g.nodes[f].config.term.vars().into_iter().map(Term::Var).collect();
        self.walk(&name, f, pats, true)
    }

    fn walk(&mut self, name: &str, n: NodeId, pats: Vec<Term>, start: bool) -> Result<(), ResidualError> {
        if !start && self.is_function(n) {
            let body = self.expr(n)?;
            self.emit(name, pats, body);
            return Ok(());
        }
        match &self.g.nodes[n].kind {
            Kind::Drive { branches } => {
                for &b in branches {
                    let s: Subst = self.g.nodes[b].edge.iter().cloned().collect();
                    let p = pats.iter().map(|t| t.subst(&s)).collect();
                    self.walk(name, b, p, false)?;
                }
                Ok(())
            }
            Kind::Stuck => Ok(()),
            _ => {
                let body = if start { self.expand(n)? } else { self.expr(n)? };
                self.emit(name, pats, body);
                Ok(())
            }
        }
    }

    fn emit(&mut self, name: &str, pats: Vec<Term>, body: Term) {
        let head = Term::call(name, pats);
        let mut ren = BTreeMap::new();
        for (k, v) in head.vars().into_iter().enumerate() {
            ren.insert(v, if k == 0 { "x".to_string() } else { format!("x{k}") });
        }
        let rule = RuleL { name: name.to_string(), pats: head.rename(&ren).args().to_vec(), body: body.rename(&ren) };
        self.rules.push(rule);
    }
}

/// Substitutes simultaneously, also inside substituted values that mention
/// other bound variables (bindings may refer to each other).
fn subst_all(t: &Term, s: &Subst) -> Term {
    let mut cur = t.subst(s);
    for _ in 0..s.len() {
        let next = cur.subst(s);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn strip_uids(t: &Term) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Ctor(c, a) => Term::Ctor(c.clone(), a.iter().map(strip_uids).collect()),
        Term::Call { name, args, .. } => Term::call(name, args.iter().map(strip_uids).collect()),
    }
}

/// Functions are numbered per head symbol in discovery order, starting from
/// the root; narrowing nodes and fold targets become functions.
pub fn residualize(g: &Graph) -> Result<Residual, ResidualError> {
    if let Some(n) = g.reachable().into_iter().find(|&n| matches!(g.nodes[n].kind, Kind::Frontier | Kind::Pending)) {
        return Err(ResidualError::Open(n));
    }
    let mut fold_targets = BTreeSet::new();
    for n in g.reachable() {
        if let Kind::Fold { holes, .. } = &g.nodes[n].kind {
            fold_targets.extend(holes.iter().map(|h| h.target));
        }
    }
    let mut gen = Gen { g, fold_targets, names: BTreeMap::new(), counters: BTreeMap::new(), queue: VecDeque::new(), rules: vec![] };
    let entry_call = gen.function(g.root);
    while let Some(f) = gen.queue.pop_front() {
        gen.rules_for(f)?;
    }
    let rules = gen.rules.into_iter().map(|r| (RuleL { body: strip_uids(&r.body), ..r }, 0)).collect();
    let program = Program::new(rules, false)?;
    Ok(Residual { program, entry: entry_call.head().to_string(), params: g.nodes[g.root].config.term.vars() })
}
