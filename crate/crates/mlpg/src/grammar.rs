//! Multi-layer prefix grammars: rules, matching, stepping, traces and
//! budgeted language enumeration.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::labels::{LabelId, LabelRegistry};
use crate::layer_functions::{self, commit, label_counts, resolve, LabelCounts, LayerError, LayerFn, ResolvedOp};
use crate::layered_words::{GWord, LayeredLetter, LayeredWord, Sym, Uid, UidGen};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LetterPat {
    Lit(Sym),
    Var(String),
}

impl fmt::Display for LetterPat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LetterPat::Lit(s) => write!(f, "{s}"),
            LetterPat::Var(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HeadItem {
    pub letter: LetterPat,
    pub label_var: String,
}

/// Label of a replacement letter: a head label, or a fresh descendant named
/// by a path of role names below a head label (`h.n1.n2`). Equal roles in
/// one application denote the same fresh label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LabelRole {
    Head(String),
    Fresh { base: String, names: Vec<String> },
}

impl fmt::Display for LabelRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelRole::Head(h) => write!(f, "{h}"),
            LabelRole::Fresh { base, names } => write!(f, "{}.{}", base, names.join(".")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReplItem {
    pub letter: LetterPat,
    pub role: LabelRole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PopSelector {
    Oldest,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Simple,
    Pop(PopSelector),
}

/// One layer function of a rule's chain; `anchor` names the head label it is
/// taken relative to (the last head label when absent).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChainStep {
    pub anchor: Option<String>,
    pub f: LayerFn,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlpgRule {
    pub name: String,
    pub head: Vec<HeadItem>,
    /// The head must cover the whole visible layer.
    pub exact: bool,
    pub halt: bool,
    pub kind: RuleKind,
    pub pop_anchor: Option<String>,
    pub replacement: Vec<ReplItem>,
    pub chain: Vec<ChainStep>,
}

impl MlpgRule {
    pub fn anchor_var(&self) -> &str {
        &self.head.last().expect("non-empty head").label_var
    }

    fn pop_anchor_var(&self) -> &str {
        self.pop_anchor.as_deref().unwrap_or_else(|| self.anchor_var())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MlpgError {
    #[error("rule {rule}: {msg}")]
    Invalid { rule: String, msg: String },
    #[error("initial word: {0}")]
    BadInit(String),
    #[error("rule {0} does not match")]
    NoMatch(String),
    #[error(transparent)]
    Layer(#[from] LayerError),
}

/// A grammar `⟨Υ, S, R, F, Γ₀$Δ₀⟩`. The registry holds the labels of the
/// initial word.
#[derive(Clone, Debug)]
pub struct Mlpg {
    pub alphabet: Vec<Sym>,
    pub rules: Vec<MlpgRule>,
    pub k1: usize,
    pub k2: usize,
    pub registry: LabelRegistry,
    pub init: GWord,
    pub next_uid: Uid,
}

impl Mlpg {
    /// Validates rules and the initial word. `bounds` fixes `(K1, K2)`;
    /// otherwise the smallest bounds admitting the rules are used.
    pub fn new(
        alphabet: Vec<Sym>,
        rules: Vec<MlpgRule>,
        registry: LabelRegistry,
        init: GWord,
        bounds: Option<(usize, usize)>,
    ) -> Result<Self, MlpgError> {
        let k1 = rules.iter().map(|r| r.chain.len()).max().unwrap_or(0);
        let k2 = rules.iter().flat_map(|r| r.chain.iter().map(|c| c.f.payload_len())).max().unwrap_or(0);
        let (k1, k2) = match bounds {
            Some((a, b)) => {
                if k1 > a || k2 > b {
                    return Err(MlpgError::Invalid {
                        rule: "*".into(),
                        msg: format!("rules need K1 >= {k1} and K2 >= {k2}"),
                    });
                }
                (a, b)
            }
            None => (k1, k2),
        };
        for r in &rules {
            validate_rule(r, &alphabet)?;
        }
        let letters: BTreeSet<&Sym> = alphabet.iter().collect();
        for l in init.visible.iter().chain(init.invisible.iter()) {
            if !letters.contains(&l.letter) {
                return Err(MlpgError::BadInit(format!("letter {} not in the alphabet", l.letter)));
            }
            if !registry.contains(l.label) {
                return Err(MlpgError::BadInit(format!("unknown label {}", l.label)));
            }
        }
        let v = &init.visible.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if !registry.precedes_eq(v[j].label, v[i].label) {
                    return Err(MlpgError::BadInit(format!(
                        "visible labels must not increase: position {} vs {}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let next_uid = init.visible.iter().chain(init.invisible.iter()).map(|l| l.uid + 1).max().unwrap_or(0);
        Ok(Self { alphabet, rules, k1, k2, registry, init, next_uid })
    }

    pub fn is_alphabetic(&self) -> bool {
        self.rules.iter().all(|r| r.head.len() == 1)
    }

    /// Maximal number of visible letters a rule rewrites.
    pub fn max_head(&self) -> usize {
        self.rules.iter().map(|r| r.head.len()).max().unwrap_or(1)
    }

    pub fn rule_index(&self, name: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.name == name)
    }

    pub fn initial_state(&self) -> State {
        State::from_gword(self.registry.clone(), &self.init, UidGen::starting_at(self.next_uid))
    }
}

fn validate_rule(r: &MlpgRule, alphabet: &[Sym]) -> Result<(), MlpgError> {
    let bad = |msg: String| MlpgError::Invalid { rule: r.name.clone(), msg };
    if r.head.is_empty() {
        return Err(bad("empty head".into()));
    }
    let label_vars: HashSet<&str> = r.head.iter().map(|h| h.label_var.as_str()).collect();
    let mut letter_vars = HashSet::new();
    for h in &r.head {
        match &h.letter {
            LetterPat::Lit(s) if !alphabet.contains(s) => return Err(bad(format!("letter {s} not in the alphabet"))),
            LetterPat::Var(v) => {
                letter_vars.insert(v.as_str());
            }
            _ => {}
        }
    }
    for it in &r.replacement {
        match &it.letter {
            LetterPat::Lit(s) if !alphabet.contains(s) => return Err(bad(format!("letter {s} not in the alphabet"))),
            LetterPat::Var(v) if !letter_vars.contains(v.as_str()) => {
                return Err(bad(format!("letter variable {v} is not bound by the head")))
            }
            _ => {}
        }
        let base = match &it.role {
            LabelRole::Head(h) => h,
            LabelRole::Fresh { base, .. } => base,
        };
        if !label_vars.contains(base.as_str()) {
            return Err(bad(format!("label variable {base} is not bound by the head")));
        }
    }
    for c in &r.chain {
        if let Some(a) = &c.anchor {
            if !label_vars.contains(a.as_str()) {
                return Err(bad(format!("label variable {a} is not bound by the head")));
            }
        }
        if let LayerFn::App { payload, .. } | LayerFn::Ins { payload, .. } = &c.f {
            if let Some(s) = payload.iter().find(|s| !alphabet.contains(s)) {
                return Err(bad(format!("letter {s} not in the alphabet")));
            }
        }
    }
    if let Some(a) = &r.pop_anchor {
        if !label_vars.contains(a.as_str()) {
            return Err(bad(format!("label variable {a} is not bound by the head")));
        }
        if r.kind == RuleKind::Simple {
            return Err(bad("pop anchor on a rule without pop".into()));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings {
    pub letters: BTreeMap<String, Sym>,
    pub labels: BTreeMap<String, LabelId>,
    pub pop_label: Option<LabelId>,
}

/// Mutable grammar state: the word kept as a deque (visible) and a vector
/// (invisible) with per-label letter counts of the invisible layer.
#[derive(Clone, Debug)]
pub struct State {
    pub reg: LabelRegistry,
    pub visible: VecDeque<LayeredLetter>,
    pub invisible: Vec<LayeredLetter>,
    pub counts: LabelCounts,
    pub uids: UidGen,
}

impl State {
    pub fn from_gword(reg: LabelRegistry, w: &GWord, uids: UidGen) -> Self {
        Self {
            reg,
            visible: w.visible.0.iter().cloned().collect(),
            invisible: w.invisible.0.clone(),
            counts: label_counts(&w.invisible),
            uids,
        }
    }

    pub fn gword(&self) -> GWord {
        GWord::new(
            LayeredWord(self.visible.iter().cloned().collect()),
            LayeredWord(self.invisible.clone()),
        )
    }

    pub fn total_len(&self) -> usize {
        self.visible.len() + self.invisible.len()
    }

    fn key(&self) -> Vec<(Sym, Vec<u32>)> {
        let chain = |l: LabelId| {
            let mut v = vec![l.0];
            let mut cur = self.reg.parent(l);
            while let Some(p) = cur {
                v.push(p.0);
                cur = self.reg.parent(p);
            }
            v
        };
        let mut k: Vec<(Sym, Vec<u32>)> = self.visible.iter().map(|l| (l.letter.clone(), chain(l.label))).collect();
        k.push((Sym::from("$"), Vec::new()));
        k.extend(self.invisible.iter().map(|l| (l.letter.clone(), chain(l.label))));
        k
    }
}

/// Matches the head of `rule` against the visible front of the state; one
/// binding per admissible popped child.
pub fn match_state(st: &State, rule: &MlpgRule) -> Vec<Bindings> {
    let p = rule.head.len();
    if st.visible.len() < p || (rule.exact && st.visible.len() != p) {
        return Vec::new();
    }
    let mut b = Bindings::default();
    for (item, letter) in rule.head.iter().zip(st.visible.iter()) {
        match &item.letter {
            LetterPat::Lit(s) => {
                if *s != letter.letter {
                    return Vec::new();
                }
            }
            LetterPat::Var(v) => match b.letters.get(v) {
                Some(s) if *s != letter.letter => return Vec::new(),
                Some(_) => {}
                None => {
                    b.letters.insert(v.clone(), letter.letter.clone());
                }
            },
        }
        match b.labels.get(&item.label_var) {
            Some(l) if *l != letter.label => return Vec::new(),
            Some(_) => {}
            None => {
                b.labels.insert(item.label_var.clone(), letter.label);
            }
        }
    }
    match rule.kind {
        RuleKind::Simple => vec![b],
        RuleKind::Pop(sel) => {
            let anchor = b.labels[rule.pop_anchor_var()];
            let kids = st.reg.children_within(anchor, st.counts.keys().copied());
            let picked: Vec<LabelId> = match sel {
                PopSelector::Oldest => kids.into_iter().take(1).collect(),
                PopSelector::All => kids,
            };
            picked
                .into_iter()
                .map(|k| {
                    let mut bb = b.clone();
                    bb.pop_label = Some(k);
                    bb
                })
                .collect()
        }
    }
}

/// `match_rule` on a snapshot word.
pub fn match_rule_all(reg: &LabelRegistry, w: &GWord, rule: &MlpgRule) -> Vec<Bindings> {
    let st = State::from_gword(reg.clone(), w, UidGen::new());
    match_state(&st, rule)
}

pub fn match_rule(reg: &LabelRegistry, w: &GWord, rule: &MlpgRule) -> Option<Bindings> {
    match_rule_all(reg, w, rule).into_iter().next()
}

/// Everything decided about one rule application before letters move.
#[derive(Clone, Debug)]
pub struct Plan {
    reg: LabelRegistry,
    counts: LabelCounts,
    repl: Vec<(Sym, LabelId)>,
    ops: Vec<ResolvedOp>,
    pop_label: Option<LabelId>,
    head_len: usize,
}

pub fn plan(g: &Mlpg, st: &State, rule: &MlpgRule, b: &Bindings) -> Result<Plan, MlpgError> {
    let mut reg = st.reg.clone();
    let mut counts = st.counts.clone();
    if let Some(pl) = b.pop_label {
        counts.remove(&pl);
    }
    let mut fresh: HashMap<(String, Vec<String>), LabelId> = HashMap::new();
    let mut repl = Vec::with_capacity(rule.replacement.len());
    for it in &rule.replacement {
        let letter = match &it.letter {
            LetterPat::Lit(s) => s.clone(),
            LetterPat::Var(v) => b.letters[v].clone(),
        };
        let label = match &it.role {
            LabelRole::Head(h) => b.labels[h],
            LabelRole::Fresh { base, names } => {
                let mut cur = b.labels[base];
                for k in 1..=names.len() {
                    let key = (base.clone(), names[..k].to_vec());
                    cur = match fresh.get(&key) {
                        Some(&l) => l,
                        None => {
                            let l = reg.new_child(cur).map_err(LayerError::from)?;
                            fresh.insert(key, l);
                            l
                        }
                    };
                }
                cur
            }
        };
        repl.push((letter, label));
    }
    if rule.chain.len() > g.k1 {
        return Err(LayerError::ChainTooLong { len: rule.chain.len(), bound: g.k1 }.into());
    }
    let mut ops = Vec::with_capacity(rule.chain.len());
    for c in &rule.chain {
        let anchor = b.labels[c.anchor.as_deref().unwrap_or_else(|| rule.anchor_var())];
        ops.push(resolve(&mut reg, &mut counts, &c.f, anchor, Some(g.k2))?);
    }
    Ok(Plan { reg, counts, repl, ops, pop_label: b.pop_label, head_len: rule.head.len() })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Effect {
    pub consumed: Vec<Uid>,
    pub popped: Vec<Uid>,
    pub produced: Vec<Uid>,
    pub created: Vec<layer_functions::Created>,
}

pub fn execute(st: &mut State, p: Plan) -> Effect {
    let mut eff = Effect::default();
    for _ in 0..p.head_len {
        eff.consumed.push(st.visible.pop_front().expect("matched head").uid);
    }
    let mut front: Vec<LayeredLetter> = Vec::new();
    if let Some(pl) = p.pop_label {
        let mut keep = Vec::with_capacity(st.invisible.len());
        for l in st.invisible.drain(..) {
            if l.label == pl {
                eff.popped.push(l.uid);
                front.push(l);
            } else {
                keep.push(l);
            }
        }
        st.invisible = keep;
    }
    for (letter, label) in p.repl {
        let u = st.uids.fresh();
        eff.produced.push(u);
        front.push(LayeredLetter::new(letter, label, u));
    }
    for l in front.into_iter().rev() {
        st.visible.push_front(l);
    }
    for op in &p.ops {
        eff.created.extend(commit(&mut st.invisible, op, &mut st.uids));
    }
    st.reg = p.reg;
    st.counts = p.counts;
    eff
}

/// Applies `rule` with `b` atomically.
pub fn apply(g: &Mlpg, st: &mut State, rule: &MlpgRule, b: &Bindings) -> Result<Effect, MlpgError> {
    let p = plan(g, st, rule, b)?;
    Ok(execute(st, p))
}

/// All successful `(rule index, bindings, plan)` triples in rule order.
pub fn moves(g: &Mlpg, st: &State) -> Vec<(usize, Bindings, Plan)> {
    let mut out = Vec::new();
    for (ri, r) in g.rules.iter().enumerate() {
        for b in match_state(st, r) {
            if let Ok(p) = plan(g, st, r, &b) {
                out.push((ri, b, p));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepLog {
    pub rule: usize,
    pub consumed: Vec<Uid>,
    pub head_len: usize,
    pub popped: Vec<Uid>,
    pub produced: Vec<Uid>,
    pub created_invisible: Vec<Uid>,
}

/// A linear trace with word snapshots and derivative lineage.
#[derive(Clone, Debug)]
pub struct TraceSession {
    pub state: State,
    pub words: Vec<GWord>,
    pub log: Vec<StepLog>,
    pub halted: bool,
    pub halt_output: Option<LayeredWord>,
    pub exhausted: bool,
    /// Strict ancestors (in the derivative sense) of every occurrence.
    pub lineage: HashMap<Uid, BTreeSet<Uid>>,
}

impl TraceSession {
    pub fn new(g: &Mlpg) -> Self {
        let state = g.initial_state();
        let words = vec![state.gword()];
        Self { state, words, log: Vec::new(), halted: false, halt_output: None, exhausted: false, lineage: HashMap::new() }
    }

    pub fn registry(&self) -> &LabelRegistry {
        &self.state.reg
    }

    pub fn last(&self) -> &GWord {
        self.words.last().expect("non-empty")
    }

    fn record(&mut self, ri: usize, halt: bool, eff: Effect) {
        let mut heads: BTreeSet<Uid> = BTreeSet::new();
        for c in &eff.consumed {
            heads.insert(*c);
            if let Some(a) = self.lineage.get(c) {
                heads.extend(a.iter().copied());
            }
        }
        for u in &eff.produced {
            self.lineage.insert(*u, heads.clone());
        }
        for u in &eff.popped {
            self.lineage.entry(*u).or_default().extend(heads.iter().copied());
        }
        for c in &eff.created {
            let mut a = heads.clone();
            if let Some(src) = c.copied_from {
                a.insert(src);
                if let Some(sa) = self.lineage.get(&src) {
                    a.extend(sa.iter().copied());
                }
            }
            self.lineage.insert(c.uid, a);
        }
        let w = self.state.gword();
        if halt {
            self.halted = true;
            self.halt_output = Some(w.visible.clone());
        }
        self.words.push(w);
        self.log.push(StepLog {
            rule: ri,
            head_len: eff.consumed.len(),
            consumed: eff.consumed,
            popped: eff.popped,
            produced: eff.produced,
            created_invisible: eff.created.iter().map(|c| c.uid).collect(),
        });
    }

    /// Applies rule `ri` with the given bindings.
    pub fn step(&mut self, g: &Mlpg, ri: usize, b: &Bindings) -> Result<&GWord, MlpgError> {
        let r = &g.rules[ri];
        let eff = apply(g, &mut self.state, r, b)?;
        self.record(ri, r.halt, eff);
        Ok(self.last())
    }

    /// Applies the first rule (in grammar order) that matches and whose
    /// chain succeeds. Returns false when no rule applies.
    pub fn step_ordered(&mut self, g: &Mlpg) -> bool {
        for (ri, r) in g.rules.iter().enumerate() {
            for b in match_state(&self.state, r) {
                if let Ok(p) = plan(g, &self.state, r, &b) {
                    let eff = execute(&mut self.state, p);
                    self.record(ri, r.halt, eff);
                    return true;
                }
            }
        }
        false
    }

    pub fn is_derivative(&self, y: Uid, x: Uid) -> bool {
        y == x || self.lineage.get(&y).is_some_and(|a| a.contains(&x))
    }
}

pub fn mlpg_step<'a>(s: &'a mut TraceSession, g: &Mlpg, ri: usize, b: &Bindings) -> Result<&'a GWord, MlpgError> {
    s.step(g, ri, b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    Ordered,
    Random(u64),
    All,
}

#[derive(Clone, Debug)]
pub struct TreeNodeT {
    pub word: GWord,
    pub parent: Option<usize>,
    pub rule: Option<usize>,
    pub depth: usize,
    pub halted: bool,
}

/// Breadth-first trace tree. Labels are rendered with the registry of the
/// node's own branch.
#[derive(Clone, Debug)]
pub struct TraceTree {
    pub nodes: Vec<TreeNodeT>,
    pub rendered: Vec<String>,
    pub exhausted: bool,
}

impl TraceTree {
    pub fn halting_outputs(&self) -> Vec<&LayeredWord> {
        self.nodes.iter().filter(|n| n.halted).map(|n| &n.word.visible).collect()
    }
}

#[derive(Clone, Debug)]
pub enum RunOutcome {
    Trace(Box<TraceSession>),
    Tree(TraceTree),
}

/// Runs `ordered` and `random` policies as a single trace of at most
/// `max_steps` steps; `all` explores the trace tree to depth `max_steps`.
pub fn run(g: &Mlpg, policy: Policy, max_steps: usize) -> RunOutcome {
    match policy {
        Policy::Ordered => {
            let mut s = TraceSession::new(g);
            while !s.halted {
                if s.log.len() >= max_steps {
                    s.exhausted = true;
                    break;
                }
                if !s.step_ordered(g) {
                    break;
                }
            }
            RunOutcome::Trace(Box::new(s))
        }
        Policy::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = TraceSession::new(g);
            while !s.halted {
                if s.log.len() >= max_steps {
                    s.exhausted = true;
                    break;
                }
                let mv = moves(g, &s.state);
                let Some((ri, _, p)) = mv.choose(&mut rng).cloned() else { break };
                let eff = execute(&mut s.state, p);
                s.record(ri, g.rules[ri].halt, eff);
            }
            RunOutcome::Trace(Box::new(s))
        }
        Policy::All => RunOutcome::Tree(explore_tree(g, max_steps, 100_000)),
    }
}

pub fn explore_tree(g: &Mlpg, depth: usize, max_nodes: usize) -> TraceTree {
    let init = g.initial_state();
    let mut nodes = vec![TreeNodeT { word: init.gword(), parent: None, rule: None, depth: 0, halted: false }];
    let mut rendered = vec![init.gword().render_grouped(&init.reg)];
    let mut states = vec![Some(init)];
    let mut exhausted = false;
    let mut k = 0;
    while k < nodes.len() {
        let st = states[k].take().expect("unexpanded");
        if nodes[k].depth < depth && !nodes[k].halted {
            for (ri, _, p) in moves(g, &st) {
                if nodes.len() >= max_nodes {
                    exhausted = true;
                    break;
                }
                let mut s2 = st.clone();
                execute(&mut s2, p);
                let w = s2.gword();
                rendered.push(w.render_grouped(&s2.reg));
                nodes.push(TreeNodeT { word: w, parent: Some(k), rule: Some(ri), depth: nodes[k].depth + 1, halted: g.rules[ri].halt });
                states.push(Some(s2));
            }
        } else if nodes[k].depth >= depth && !nodes[k].halted && !moves(g, &st).is_empty() {
            exhausted = true;
        }
        k += 1;
    }
    TraceTree { nodes, rendered, exhausted }
}

#[derive(Clone, Debug)]
pub struct EnumBudget {
    pub max_len: usize,
    pub max_steps: usize,
    /// States with more letters than this are dropped. Only sound for
    /// grammars whose outputs cannot shrink below it.
    pub max_total: Option<usize>,
    pub jobs: usize,
}

impl EnumBudget {
    pub fn new(max_len: usize, max_steps: usize) -> Self {
        Self { max_len, max_steps, max_total: None, jobs: 1 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LangResult {
    /// Halting outputs of length at most `max_len`.
    pub words: BTreeSet<Vec<Sym>>,
    /// Lengths of every halting output seen, including longer ones.
    pub output_lengths: BTreeSet<usize>,
    pub steps: usize,
    pub exhausted: bool,
}

const DEDUP_LIMIT: usize = 64;

struct Expansion {
    succ: Vec<State>,
    outputs: Vec<Vec<Sym>>,
    steps: usize,
}

fn expand(g: &Mlpg, st: State, max_total: Option<usize>) -> Expansion {
    let mv = moves(g, &st);
    let n = mv.len();
    let mut ex = Expansion { succ: Vec::new(), outputs: Vec::new(), steps: n };
    let mut owned = Some(st);
    for (k, (ri, _, p)) in mv.into_iter().enumerate() {
        let mut s2 = if k + 1 == n { owned.take().expect("state") } else { owned.as_ref().expect("state").clone() };
        execute(&mut s2, p);
        if g.rules[ri].halt {
            ex.outputs.push(s2.visible.iter().map(|l| l.letter.clone()).collect());
        } else if max_total.is_none_or(|m| s2.total_len() <= m) {
            ex.succ.push(s2);
        }
    }
    ex
}

/// Breadth-first enumeration of halting outputs. The result does not depend
/// on `jobs`.
pub fn enumerate_language(g: &Mlpg, budget: &EnumBudget) -> LangResult {
    let mut res = LangResult::default();
    let mut seen: HashSet<Vec<(Sym, Vec<u32>)>> = HashSet::new();
    let mut frontier = vec![g.initial_state()];
    'levels: while !frontier.is_empty() {
        let level = std::mem::take(&mut frontier);
        let expansions: Vec<Expansion> = if budget.jobs > 1 && level.len() > 1 {
            let chunk = level.len().div_ceil(budget.jobs);
            let mut parts: Vec<Vec<State>> = Vec::new();
            let mut it = level.into_iter();
            loop {
                let part: Vec<State> = it.by_ref().take(chunk).collect();
                if part.is_empty() {
                    break;
                }
                parts.push(part);
            }
            std::thread::scope(|sc| {
                let hs: Vec<_> = parts
                    .into_iter()
                    .map(|part| sc.spawn(move || part.into_iter().map(|s| expand(g, s, budget.max_total)).collect::<Vec<_>>()))
                    .collect();
                hs.into_iter().flat_map(|h| h.join().expect("worker")).collect()
            })
        } else {
            level.into_iter().map(|s| expand(g, s, budget.max_total)).collect()
        };
        for ex in expansions {
            if res.steps + ex.steps > budget.max_steps {
                res.exhausted = true;
                break 'levels;
            }
            res.steps += ex.steps;
            for o in ex.outputs {
                res.output_lengths.insert(o.len());
                if o.len() <= budget.max_len {
                    res.words.insert(o);
                }
            }
            for s in ex.succ {
                if s.total_len() <= DEDUP_LIMIT && !seen.insert(s.key()) {
                    continue;
                }
                frontier.push(s);
            }
        }
    }
    res
}
