//! Depth-first unfolding of a configuration into a process graph, guarded by
//! a whistle, with folding and generalization.

use std::collections::BTreeMap;

use lang_l::{drive, instance_of, renaming, BranchKind, Configuration, Path, Program, StackTracker, Subst, Term};
use mlpg::GWord;
use whistles::{PairFinder, Relation, TurchinVerdict};

use crate::msg::msg_with;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum Def {
    /// A call-free term substituted as is.
    Static(Term),
    Node(NodeId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hole {
    pub var: String,
    pub target: NodeId,
    /// Values of the target's variables at the fold site.
    pub args: Subst,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Pending,
    Drive { branches: Vec<NodeId> },
    Let { defs: Vec<(String, Def)>, body: NodeId },
    /// Constructor context with the calls split off into children.
    Decompose { skeleton: Term, holes: Vec<(String, NodeId)> },
    /// Every call of the constructor skeleton is a renaming of an ancestor.
    Fold { skeleton: Term, holes: Vec<Hole> },
    Terminal,
    Stuck,
    Frontier,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub parent: Option<NodeId>,
    pub trace_parent: Option<NodeId>,
    pub config: Configuration,
    /// Narrowing on the edge from a driving parent.
    pub edge: Vec<(String, Term)>,
    pub word: GWord,
    pub tracker: StackTracker,
    pub kind: Kind,
    pub alive: bool,
    from_drive: bool,
}

#[derive(Debug, Clone)]
pub struct Fire {
    pub earlier: NodeId,
    pub later: NodeId,
    pub earlier_term: Term,
    pub later_term: Term,
    pub verdict: Option<TurchinVerdict>,
}

#[derive(Debug, Clone)]
pub struct Graph {
    pub nodes: Vec<Node>,
    pub root: NodeId,
    pub open: bool,
    pub fires: Vec<Fire>,
    pub whistle: Relation,
}

fn hole_name(k: usize) -> String {
    format!("_h{k}")
}

/// The first call not below another call, which the active stack grows from.
pub fn core(t: &Term) -> Option<(Path, &Term)> {
    let p = t.top_calls().into_iter().next()?;
    let c = t.at(&p)?;
    Some((p, c))
}

struct Builder<'a> {
    prog: &'a Program,
    g: Graph,
    work: Vec<NodeId>,
    max_nodes: usize,
    created: usize,
}

impl Builder<'_> {
    fn add(&mut self, parent: Option<NodeId>, trace_parent: Option<NodeId>, config: Configuration, tracker: StackTracker, word: GWord, from_drive: bool) -> NodeId {
        self.created += 1;
        self.g.nodes.push(Node {
            parent,
            trace_parent,
            config,
            edge: vec![],
            word,
            tracker,
            kind: Kind::Pending,
            alive: true,
            from_drive,
        });
        self.g.nodes.len() - 1
    }

    /// A node that continues the trace of `from` (or starts a new trace)
    /// without a driving step; known calls keep their labels.
    fn add_plain(&mut self, parent: NodeId, trace_parent: Option<NodeId>, tracker_of: Option<NodeId>, config: Configuration) -> NodeId {
        let mut tracker = tracker_of.map(|n| self.g.nodes[n].tracker.clone()).unwrap_or_default();
        let word = tracker.extract(self.prog, &config.term, None);
        self.add(Some(parent), trace_parent, config, tracker, word, false)
    }

    fn ancestors(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.g.nodes[n].parent, |&p| self.g.nodes[p].parent)
    }

    fn trace_of(&self, n: NodeId) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = std::iter::successors(Some(n), |&p| self.g.nodes[p].trace_parent).collect();
        v.reverse();
        v
    }

    fn fold_target(&self, n: NodeId, t: &Term) -> Option<(NodeId, Subst)> {
        self.ancestors(n).find_map(|a| {
            let node = &self.g.nodes[a];
            if !matches!(node.kind, Kind::Drive { .. }) || !node.alive {
                return None;
            }
            renaming(&node.config.term, t).map(|m| (a, m.into_iter().map(|(k, v)| (k, Term::Var(v))).collect::<Subst>()))
        })
    }

    fn try_fold(&mut self, n: NodeId) -> bool {
        let t = self.g.nodes[n].config.term.clone();
        let calls = t.top_calls();
        let mut skeleton = t.clone();
        let mut holes = Vec::new();
        for (k, p) in calls.iter().enumerate() {
            let Some((target, args)) = self.fold_target(n, t.at(p).expect("call")) else { return false };
            let var = hole_name(k);
            skeleton.replace_at(p, Term::Var(var.clone()));
            holes.push(Hole { var, target, args });
        }
        self.g.nodes[n].kind = Kind::Fold { skeleton, holes };
        true
    }

    fn decompose(&mut self, n: NodeId) {
        let cfg = self.g.nodes[n].config.clone();
        let tp = self.g.nodes[n].trace_parent;
        let mut skeleton = cfg.term.clone();
        let mut holes = Vec::new();
        let mut kids = Vec::new();
        for (k, p) in cfg.term.top_calls().iter().enumerate() {
            let var = hole_name(k);
            skeleton.replace_at(p, Term::Var(var.clone()));
            let c = Configuration { term: cfg.term.at(p).expect("call").clone(), ..cfg.clone() };
            let child = self.add_plain(n, tp, Some(n), c);
            holes.push((var, child));
            kids.push(child);
        }
        self.g.nodes[n].kind = Kind::Decompose { skeleton, holes };
        self.work.extend(kids.into_iter().rev());
    }

    /// Replaces node `n` by `let defs in body`. Bindings that contain calls
    /// become children with fresh traces; the body continues the trace of
    /// `n`'s trace parent.
    fn make_let(&mut self, n: NodeId, defs: Vec<(String, Term)>, body: Term, next_var: usize) {
        self.kill_subtree(n);
        let base = self.g.nodes[n].config.clone();
        let next_uid = body.max_uid().into_iter().chain(defs.iter().filter_map(|d| d.1.max_uid())).max().map_or(base.next_uid, |u| (u + 1).max(base.next_uid));
        let tp = self.g.nodes[n].trace_parent;
        let cfg = |t: Term| Configuration { term: t, next_var, next_uid };
        let body_id = self.add_plain(n, tp, Some(n), cfg(body));
        let mut out = Vec::new();
        let mut kids = vec![body_id];
        for (v, t) in defs {
            if t.has_calls() {
                let id = self.add_plain(n, None, None, cfg(t));
                kids.push(id);
                out.push((v, Def::Node(id)));
            } else {
                out.push((v, Def::Static(t)));
            }
        }
        self.g.nodes[n].kind = Kind::Let { defs: out, body: body_id };
        self.work.extend(kids.into_iter().rev());
    }

    fn kill_subtree(&mut self, n: NodeId) {
        let kids: Vec<NodeId> = match &self.g.nodes[n].kind {
            Kind::Drive { branches } => branches.clone(),
            Kind::Let { defs, body } => {
                defs.iter().filter_map(|d| if let Def::Node(k) = d.1 { Some(k) } else { None }).chain([*body]).collect()
            }
            Kind::Decompose { holes, .. } => holes.iter().map(|h| h.1).collect(),
            _ => vec![],
        };
        for k in kids {
            self.g.nodes[k].alive = false;
            self.kill_subtree(k);
        }
    }

    fn whistle(&self, n: NodeId) -> Option<(NodeId, Option<TurchinVerdict>)> {
        let trace = self.trace_of(n);
        let mut f = PairFinder::new(self.g.whistle, 1);
        let mut last = None;
        for &k in &trace {
            let node = &self.g.nodes[k];
            last = f.push(node.word.clone(), None, Some(node.config.term.clone()));
        }
        last.map(|(i, v)| (trace[i], v))
    }

    /// Generalizes after the whistle related `alpha` (earlier) and `beta`.
    /// Returns false when no generalization makes progress.
    fn generalize(&mut self, alpha: NodeId, beta: NodeId, verdict: Option<&TurchinVerdict>) -> bool {
        let a_term = self.g.nodes[alpha].config.term.clone();
        let b_cfg = self.g.nodes[beta].config.clone();
        let Some((core_path, b_core)) = core(&b_cfg.term).map(|(p, c)| (p, c.clone())) else { return false };
        let mut next_var = b_cfg.next_var.max(self.g.nodes[alpha].config.next_var);
        let mut fresh = || {
            let v = format!("x{next_var}");
            next_var += 1;
            v
        };

        if let Some(s) = instance_of(&b_core, &a_term) {
            if s.values().any(|t| !matches!(t, Term::Var(_))) {
                let mut names = BTreeMap::new();
                for (v, t) in &s {
                    if !matches!(t, Term::Var(_)) {
                        names.insert(v.clone(), fresh());
                    }
                }
                let gen_core = abstract_instance(&a_term, &b_core, &names);
                let mut body = b_cfg.term.clone();
                body.replace_at(&core_path, gen_core);
                let mut defs = Vec::new();
                for (v, z) in &names {
                    flatten(z.clone(), s[v].clone(), &mut defs, &mut fresh);
                }
                self.make_let(beta, defs, body, next_var);
                return true;
            }
        }

        if let (Some(v), Relation::Turchin | Relation::Composite) = (verdict, self.g.whistle) {
            if v.theta_len > 0 && !v.top.is_empty() {
                let w = &self.g.nodes[alpha].word;
                if let Some(l) = w.visible.at(v.top.len()) {
                    if let Some(p) = a_term.find_uid(l.uid).filter(|p| !p.is_empty()) {
                        let z = fresh();
                        let mut body = a_term.clone();
                        let top = body.replace_at(&p, Term::Var(z.clone()));
                        self.make_let(alpha, vec![(z, top)], body, next_var);
                        return true;
                    }
                }
            }
        }

        let gz = msg_with(&a_term, &b_core, &mut fresh);
        if !matches!(gz.general, Term::Var(_)) && renaming(&gz.general, &a_term).is_none() {
            let mut defs = Vec::new();
            let mut body_subst = Subst::new();
            for (v, t) in gz.sub1 {
                if matches!(t, Term::Var(_)) {
                    body_subst.insert(v, t);
                } else {
                    flatten(v, t, &mut defs, &mut fresh);
                }
            }
            let body = gz.general.subst(&body_subst);
            self.make_let(alpha, defs, body, next_var);
            return true;
        }

        let Term::Call { name, args, uid } = &b_core else { return false };
        if args.iter().all(|a| matches!(a, Term::Var(_))) {
            return false;
        }
        let mut defs = Vec::new();
        let new_args = args
            .iter()
            .map(|a| {
                if matches!(a, Term::Var(_)) {
                    a.clone()
                } else {
                    let z = fresh();
                    defs.push((z.clone(), a.clone()));
                    Term::Var(z)
                }
            })
            .collect();
        let mut body = b_cfg.term.clone();
        body.replace_at(&core_path, Term::Call { name: name.clone(), args: new_args, uid: *uid });
        self.make_let(beta, defs, body, next_var);
        true
    }

    fn step(&mut self, n: NodeId) {
        let term = self.g.nodes[n].config.term.clone();
        if !term.has_calls() {
            self.g.nodes[n].kind = Kind::Terminal;
            return;
        }
        if self.try_fold(n) {
            return;
        }
        if !self.g.nodes[n].from_drive && !term.is_call() {
            self.decompose(n);
            return;
        }
        if let Some((alpha, verdict)) = self.whistle(n) {
            let fire = Fire {
                earlier: alpha,
                later: n,
                earlier_term: self.g.nodes[alpha].config.term.clone(),
                later_term: term.clone(),
                verdict: verdict.clone(),
            };
            if self.generalize(alpha, n, verdict.as_ref()) {
                self.g.fires.push(fire);
                return;
            }
        }
        let cfg = self.g.nodes[n].config.clone();
        let branches = match drive(self.prog, &cfg) {
            Ok(b) => b,
            Err(_) => {
                self.g.nodes[n].kind = Kind::Stuck;
                return;
            }
        };
        let mut kids = Vec::new();
        for b in branches {
            let mut tracker = self.g.nodes[n].tracker.clone();
            let (word, stuck) = match &b.kind {
                BranchKind::Rewrite { step, .. } => (tracker.extract(self.prog, &b.config.term, Some(step)), false),
                BranchKind::Stuck => (tracker.extract(self.prog, &b.config.term, None), true),
            };
            let id = self.add(Some(n), Some(n), b.config, tracker, word, true);
            self.g.nodes[id].edge = b.narrowing;
            if stuck {
                self.g.nodes[id].kind = Kind::Stuck;
            } else {
                kids.push(id);
            }
            if let Kind::Drive { branches } = &mut self.g.nodes[n].kind {
                branches.push(id);
            } else {
                self.g.nodes[n].kind = Kind::Drive { branches: vec![id] };
            }
        }
        self.work.extend(kids.into_iter().rev());
    }
}

/// `b` is an instance of `a`; rebuilds `a` over the structure of `b`
/// (keeping `b`'s uids), with the variables of `a` that `b` binds to
/// non-variables replaced by `names`.
fn abstract_instance(a: &Term, b: &Term, names: &BTreeMap<String, String>) -> Term {
    match a {
        Term::Var(v) => match names.get(v) {
            Some(z) => Term::Var(z.clone()),
            None => b.clone(),
        },
        _ => {
            let mut out = b.clone();
            for (k, x) in a.args().iter().enumerate() {
                out.args_mut()[k] = abstract_instance(x, &b.args()[k], names);
            }
            out
        }
    }
}

/// Binds `z` to `t`; non-variable arguments of a call are bound separately
/// so that calls in bindings take variables only.
fn flatten(z: String, t: Term, defs: &mut Vec<(String, Term)>, fresh: &mut impl FnMut() -> String) {
    match t {
        Term::Call { name, args, uid } => {
            let args = args
                .into_iter()
                .map(|a| {
                    if matches!(a, Term::Var(_)) {
                        a
                    } else {
                        let w = fresh();
                        flatten(w.clone(), a, defs, fresh);
                        Term::Var(w)
                    }
                })
                .collect();
            defs.push((z, Term::Call { name, args, uid }));
        }
        t => defs.push((z, t)),
    }
}

/// Unfolds `entry` under `whistle`, creating at most `max_nodes` nodes; nodes
/// left over are marked as frontier and the graph as open.
pub fn unfold(prog: &Program, entry: &Term, whistle: Relation, max_nodes: usize) -> Graph {
    let cfg = Configuration::new(entry.clone());
    let mut tracker = StackTracker::new();
    let word = tracker.extract(prog, &cfg.term, None);
    let mut b = Builder {
        prog,
        g: Graph { nodes: vec![], root: 0, open: false, fires: vec![], whistle },
        work: vec![],
        max_nodes,
        created: 0,
    };
    let root = b.add(None, None, cfg, tracker, word, false);
    b.work.push(root);
    while let Some(n) = b.work.pop() {
        if !b.g.nodes[n].alive || b.g.nodes[n].kind != Kind::Pending {
            continue;
        }
        if b.created >= b.max_nodes {
            b.g.nodes[n].kind = Kind::Frontier;
            b.g.open = true;
            continue;
        }
        b.step(n);
    }
    b.g
}

impl Graph {
    pub fn live(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.alive)
    }

    pub fn children(&self, n: NodeId) -> Vec<NodeId> {
        match &self.nodes[n].kind {
            Kind::Drive { branches } => branches.clone(),
            Kind::Let { defs, body } => {
                let mut v: Vec<NodeId> = defs.iter().filter_map(|d| if let Def::Node(k) = d.1 { Some(k) } else { None }).collect();
                v.push(*body);
                v
            }
            Kind::Decompose { holes, .. } => holes.iter().map(|h| h.1).collect(),
            _ => vec![],
        }
    }

    /// Live nodes reachable from the root.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut out = vec![];
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).into_iter().rev());
        }
        out
    }
}
