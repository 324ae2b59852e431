#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use constructions::{reconstruct, tm_to_mlpg, CfgGnf, CfgRule, Move, TmSnapshot, Transition, TuringMachine};
use mlpg::{enumerate_language, run, sym, EnumBudget, Policy, RunOutcome, Sym};
use rand::Rng;

/// Direct simulation on an unbounded tape.
pub struct Sim<'a> {
    pub tm: &'a TuringMachine,
    pub state: Sym,
    pub cells: BTreeMap<i64, Sym>,
    pub head: i64,
    lo: i64,
    hi: i64,
}

pub enum SimStep {
    Moved,
    Halted,
    Stuck,
}

impl<'a> Sim<'a> {
    pub fn new(tm: &'a TuringMachine, input: &[Sym]) -> Self {
        let cells = input.iter().enumerate().map(|(k, a)| (k as i64, a.clone())).collect();
        Sim { tm, state: tm.start.clone(), cells, head: 0, lo: 0, hi: input.len() as i64 - 1 }
    }

    pub fn step(&mut self) -> SimStep {
        if self.tm.finals.contains(&self.state) {
            return SimStep::Halted;
        }
        let a = self.cells.get(&self.head).cloned().unwrap_or_else(|| self.tm.blank.clone());
        let Some(t) = self.tm.delta.iter().find(|t| t.from == self.state && t.read == a) else {
            return SimStep::Stuck;
        };
        self.cells.insert(self.head, t.write.clone());
        self.state = t.to.clone();
        self.head += if t.dir == Move::R { 1 } else { -1 };
        SimStep::Moved
    }

    pub fn snapshot(&self) -> TmSnapshot {
        let lo = self.lo.min(self.head);
        let hi = self.hi.max(self.head);
        let tape = (lo..=hi).map(|k| self.cells.get(&k).cloned().unwrap_or_else(|| self.tm.blank.clone())).collect();
        TmSnapshot { state: self.state.clone(), tape, head: (self.head - lo) as usize }
    }

    pub fn visit(&mut self) {
        self.lo = self.lo.min(self.head);
        self.hi = self.hi.max(self.head);
    }
}

pub struct Bisim {
    pub steps: usize,
    pub halted: bool,
}

/// Runs the grammar and the simulator side by side and checks every word.
pub fn bisimulate(tm: &TuringMachine, input: &[Sym], max: usize) -> Result<Bisim, String> {
    let g = tm_to_mlpg(tm, input).map_err(|e| e.to_string())?;
    let RunOutcome::Trace(s) = run(&g, Policy::Ordered, max) else { unreachable!() };
    let mut sim = Sim::new(tm, input);
    sim.visit();
    for (k, w) in s.words.iter().enumerate() {
        let vis = w.visible.plain();
        for (p, a) in vis.iter().enumerate() {
            if (a.ends_with("^R") && p != 0) || (a.ends_with("^L") && p != 1) {
                return Err(format!("state marker {a} at position {} in word {k}", p + 1));
            }
        }
        if w.invisible.iter().any(|l| l.letter.ends_with("^R") || l.letter.ends_with("^L")) {
            return Err(format!("state marker in the invisible layer of word {k}"));
        }
        let got = reconstruct(tm, &s.state.reg, w).ok_or_else(|| format!("word {k} has no model shape"))?;
        let want = sim.snapshot();
        if got != want {
            return Err(format!("step {k}: grammar {got} vs machine {want}"));
        }
        if k + 1 < s.words.len() {
            match sim.step() {
                SimStep::Moved => sim.visit(),
                _ => return Err(format!("grammar moves at step {k} but the machine does not")),
            }
        }
    }
    let steps = s.words.len() - 1;
    if !s.exhausted {
        let halted_m = tm.finals.contains(&sim.state);
        if halted_m != s.halted {
            return Err(format!("halting differs: machine {halted_m}, grammar {}", s.halted));
        }
        if !halted_m && !matches!(sim.step(), SimStep::Stuck) {
            return Err("grammar deadlocks while the machine moves".into());
        }
    }
    Ok(Bisim { steps, halted: s.halted })
}

pub fn syms(s: &str) -> Vec<Sym> {
    s.split_whitespace().map(sym).collect()
}

pub const UNARY_INCREMENT: &str = "\
states: q0 q1 q2
tape: 1 _
start: q0
final: q2
delta: q0 1 -> q0 1 R
delta: q0 _ -> q1 1 L
delta: q1 1 -> q1 1 L
delta: q1 _ -> q2 _ R
";

pub const PATTERN_WRITER: &str = "\
states: a b h
tape: x 0 1 _
start: a
final: h
delta: a x -> b 1 R
delta: b x -> a 0 R
delta: a _ -> h _ L
delta: b _ -> h _ L
";

pub fn random_tm(rng: &mut impl Rng) -> (TuringMachine, Vec<Sym>) {
    let states: Vec<Sym> = (0..rng.gen_range(2..=4)).map(|k| sym(&format!("q{k}"))).collect();
    let tape = syms("0 1 _");
    let finals: BTreeSet<Sym> = if rng.gen_bool(0.5) { [states[states.len() - 1].clone()].into() } else { BTreeSet::new() };
    let mut delta = Vec::new();
    for q in &states {
        if finals.contains(q) {
            continue;
        }
        for a in &tape {
            if rng.gen_bool(0.9) {
                delta.push(Transition {
                    from: q.clone(),
                    read: a.clone(),
                    to: states[rng.gen_range(0..states.len())].clone(),
                    write: tape[rng.gen_range(0..tape.len())].clone(),
                    dir: if rng.gen_bool(0.5) { Move::L } else { Move::R },
                });
            }
        }
    }
    let tm = TuringMachine::new(states.clone(), tape.clone(), sym("_"), delta, states[0].clone(), finals).unwrap();
    let input = (0..rng.gen_range(0..6)).map(|_| tape[rng.gen_range(0..2)].clone()).collect();
    (tm, input)
}

/// Words of length `1..=max_len` derivable from the start symbol, by
/// breadth-first search over leftmost sentential forms.
pub fn cfg_language(cfg: &CfgGnf, max_len: usize) -> BTreeSet<String> {
    let nts: BTreeSet<&Sym> = cfg.nonterminals.iter().collect();
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<(Vec<Sym>, Vec<Sym>)> = VecDeque::new();
    queue.push_back((vec![], vec![cfg.start.clone()]));
    while let Some((done, rest)) = queue.pop_front() {
        if !seen.insert((done.clone(), rest.clone())) {
            continue;
        }
        let Some(pos) = rest.iter().position(|s| nts.contains(s)) else {
            let mut w = done.clone();
            w.extend(rest);
            if !w.is_empty() && w.len() <= max_len {
                out.insert(w.iter().map(|s| &**s).collect::<Vec<_>>().join(""));
            }
            continue;
        };
        let mut done2 = done.clone();
        done2.extend(rest[..pos].iter().cloned());
        let terminals = done2.len() + rest[pos..].iter().filter(|s| !nts.contains(s)).count();
        if terminals > max_len {
            continue;
        }
        for r in cfg.rules.iter().filter(|r| r.lhs == rest[pos]) {
            let mut next = r.rhs.clone();
            next.extend(rest[pos + 1..].iter().cloned());
            queue.push_back((done2.clone(), next));
        }
    }
    out
}

pub fn mlpg_language(g: &mlpg::Mlpg, max_len: usize) -> BTreeSet<String> {
    let mut b = EnumBudget::new(max_len, 5_000_000);
    b.max_total = Some(2 * max_len + 2);
    let res = enumerate_language(g, &b);
    assert!(!res.exhausted, "enumeration budget exhausted");
    res.words.iter().map(|w| w.iter().map(|s| &**s).collect()).collect()
}

pub fn random_gnf(rng: &mut impl Rng) -> CfgGnf {
    let nts: Vec<Sym> = ["S", "A", "B", "C"][..rng.gen_range(1..=4)].iter().map(|s| sym(s)).collect();
    let ts: Vec<Sym> = ["a", "b", "c"][..rng.gen_range(1..=3)].iter().map(|s| sym(s)).collect();
    let mut rules = Vec::new();
    for q in &nts {
        for _ in 0..rng.gen_range(1..=3) {
            let rhs = if rng.gen_bool(0.25) {
                vec![]
            } else {
                let mut v = vec![ts[rng.gen_range(0..ts.len())].clone()];
                for _ in 0..rng.gen_range(0..=2) {
                    v.push(nts[rng.gen_range(0..nts.len())].clone());
                }
                v
            };
            rules.push(CfgRule { lhs: q.clone(), rhs });
        }
    }
    CfgGnf::new(rules).unwrap()
}
