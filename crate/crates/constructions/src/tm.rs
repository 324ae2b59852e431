//! Turing machines as multi-layer prefix grammars. The tape right of the
//! head is the visible layer, the tape left of it the invisible layer, read
//! deepest label first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use mlpg::{
    sym, ChainStep, ChildSel, GWord, LabelRegistry, LayerFn, LayeredLetter, LayeredWord, Mlpg, MlpgError, MlpgRule,
    PopSelector, RuleKind, Sym, UidGen,
};

use crate::{head, repl};

pub const BLANK_L: &str = "BlankL";
pub const BLANK_R: &str = "BlankR";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TmError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("unknown tape symbol {0}")]
    UnknownSymbol(String),
    #[error("reserved symbol {0}")]
    Reserved(String),
    #[error("two transitions for state {0} reading {1}")]
    Nondeterministic(String, String),
    #[error(transparent)]
    Grammar(#[from] MlpgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    L,
    R,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: Sym,
    pub read: Sym,
    pub to: Sym,
    pub write: Sym,
    pub dir: Move,
}

/// A deterministic machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuringMachine {
    pub states: Vec<Sym>,
    pub tape: Vec<Sym>,
    pub blank: Sym,
    pub delta: Vec<Transition>,
    pub start: Sym,
    pub finals: BTreeSet<Sym>,
}

impl TuringMachine {
    pub fn new(
        states: Vec<Sym>,
        tape: Vec<Sym>,
        blank: Sym,
        delta: Vec<Transition>,
        start: Sym,
        finals: BTreeSet<Sym>,
    ) -> Result<Self, TmError> {
        let st: BTreeSet<&Sym> = states.iter().collect();
        let tp: BTreeSet<&Sym> = tape.iter().collect();
        let state_ok = |q: &Sym| if st.contains(q) { Ok(()) } else { Err(TmError::UnknownState(q.to_string())) };
        let sym_ok = |a: &Sym| if tp.contains(a) { Ok(()) } else { Err(TmError::UnknownSymbol(a.to_string())) };
        for a in &tape {
            if is_reserved(a) {
                return Err(TmError::Reserved(a.to_string()));
            }
        }
        sym_ok(&blank)?;
        state_ok(&start)?;
        for q in &finals {
            state_ok(q)?;
        }
        let mut seen = BTreeSet::new();
        for t in &delta {
            state_ok(&t.from)?;
            state_ok(&t.to)?;
            sym_ok(&t.read)?;
            sym_ok(&t.write)?;
            if !seen.insert((t.from.clone(), t.read.clone())) {
                return Err(TmError::Nondeterministic(t.from.to_string(), t.read.to_string()));
            }
        }
        Ok(Self { states, tape, blank, delta, start, finals })
    }

    pub fn transition(&self, q: &str, a: &str) -> Option<&Transition> {
        self.delta.iter().find(|t| &*t.from == q && &*t.read == a)
    }

    /// Splits an input given either as whitespace separated symbols or as a
    /// string of one-character symbols.
    pub fn split_input(&self, s: &str) -> Result<Vec<Sym>, TmError> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let toks: Vec<Sym> = if toks.len() == 1 && !self.tape.iter().any(|a| &**a == toks[0]) {
            toks[0].chars().map(|c| sym(&c.to_string())).collect()
        } else {
            toks.into_iter().map(sym).collect()
        };
        for a in &toks {
            if !self.tape.contains(a) {
                return Err(TmError::UnknownSymbol(a.to_string()));
            }
        }
        Ok(toks)
    }
}

fn is_reserved(a: &str) -> bool {
    a == BLANK_L || a == BLANK_R || a.ends_with("^R") || a.ends_with("^L")
}

pub fn state_r(q: &str) -> Sym {
    sym(&format!("{q}^R"))
}

pub fn state_l(q: &str) -> Sym {
    sym(&format!("{q}^L"))
}

/// Reads the format
///
/// ```text
/// states: q0 q1
/// tape: a b _
/// start: q0
/// final: q1
/// delta: q0 a -> q1 b R
/// ```
///
/// with optional `blank:` (default `_`) and `input:` lines. Returns the
/// machine and the input.
pub fn parse_tm(text: &str) -> Result<(TuringMachine, Vec<Sym>), TmError> {
    let mut fields: BTreeMap<&str, (usize, Vec<Sym>)> = BTreeMap::new();
    let mut delta = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        let ln = n + 1;
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(':').ok_or(TmError::Syntax { line: ln, msg: "expected 'key: value'".into() })?;
        let key = key.trim();
        let toks: Vec<&str> = rest.split_whitespace().collect();
        match key {
            "delta" => match toks.as_slice() {
                [q1, a1, "->", q2, a2, d] => {
                    let dir = match *d {
                        "L" => Move::L,
                        "R" => Move::R,
                        _ => return Err(TmError::Syntax { line: ln, msg: format!("move must be L or R, got {d}") }),
                    };
                    delta.push(Transition { from: sym(q1), read: sym(a1), to: sym(q2), write: sym(a2), dir });
                }
                _ => return Err(TmError::Syntax { line: ln, msg: "expected 'delta: q a -> q b L|R'".into() }),
            },
            "states" | "tape" | "start" | "final" | "blank" | "input" => {
                fields.insert(key, (ln, toks.into_iter().map(sym).collect()));
            }
            _ => return Err(TmError::Syntax { line: ln, msg: format!("unknown key {key}") }),
        }
    }
    let need = |k: &str| fields.get(k).map(|(_, v)| v.clone()).ok_or(TmError::Syntax { line: 0, msg: format!("missing '{k}:'") });
    let single = |k: &str| -> Result<Sym, TmError> {
        match fields.get(k) {
            Some((_, v)) if v.len() == 1 => Ok(v[0].clone()),
            Some((ln, _)) => Err(TmError::Syntax { line: *ln, msg: format!("'{k}:' takes one symbol") }),
            None => Err(TmError::Syntax { line: 0, msg: format!("missing '{k}:'") }),
        }
    };
    let blank = if fields.contains_key("blank") { single("blank")? } else { sym("_") };
    let tm = TuringMachine::new(
        need("states")?,
        need("tape")?,
        blank,
        delta,
        single("start")?,
        fields.get("final").map(|(_, v)| v.iter().cloned().collect()).unwrap_or_default(),
    )?;
    let input = fields.get("input").map(|(_, v)| v.clone()).unwrap_or_default();
    let input = tm.split_input(&input.iter().map(|s| &**s).collect::<Vec<_>>().join(" "))?;
    Ok((tm, input))
}

fn ins(a: &Sym) -> ChainStep {
    ChainStep { anchor: None, f: LayerFn::Ins { target: ChildSel::Only, payload: vec![a.clone()] } }
}

/// The grammar emulating `tm` on `input`. Every rule rewrites the two
/// leading visible letters: the state marker and the scanned cell. Moves
/// right insert the written letter into the invisible chain just below the
/// root label; moves left pop the nearest invisible letter back to the
/// front. Transitions into a final state give halting rules.
pub fn tm_to_mlpg(tm: &TuringMachine, input: &[Sym]) -> Result<Mlpg, TmError> {
    for a in input {
        if !tm.tape.contains(a) {
            return Err(TmError::UnknownSymbol(a.to_string()));
        }
    }
    let bl = sym(BLANK_L);
    let br = sym(BLANK_R);
    let mut alphabet: Vec<Sym> = tm.tape.clone();
    for q in &tm.states {
        alphabet.push(state_r(q));
        alphabet.push(state_l(q));
    }
    alphabet.push(bl.clone());
    alphabet.push(br.clone());

    let mut rules = Vec::new();
    for (k, t) in tm.delta.iter().enumerate() {
        let halt = tm.finals.contains(&t.to);
        let (q1r, q1l, q2r, q2l) = (state_r(&t.from), state_l(&t.from), state_r(&t.to), state_l(&t.to));
        let mut rule = |name: String, h, kind, r, chain| {
            rules.push(MlpgRule { name, head: h, exact: false, halt, kind, pop_anchor: None, replacement: r, chain });
        };
        let pop = RuleKind::Pop(PopSelector::Oldest);
        let mut reads = vec![(t.read.clone(), false)];
        if t.read == tm.blank {
            reads.push((br.clone(), true));
        }
        for (a, end) in &reads {
            let name = format!("d{k}r{}", if *end { "b" } else { "" });
            let h = head(&[(&q1r, "i"), (a, "j")]);
            let mut r = match t.dir {
                Move::R => repl(&[(&q2r, "j")]),
                Move::L => repl(&[(&q2l, "j"), (&t.write, "j")]),
            };
            if *end {
                r.extend(repl(&[(&br, "j")]));
            }
            match t.dir {
                Move::R => rule(name, h, RuleKind::Simple, r, vec![ins(&t.write)]),
                Move::L => rule(name, h, pop, r, vec![]),
            }
        }
        let h = head(&[(&t.read, "j"), (&q1l, "i")]);
        match t.dir {
            Move::R => rule(format!("d{k}l"), h, RuleKind::Simple, repl(&[(&q2r, "i")]), vec![ins(&t.write)]),
            Move::L => rule(format!("d{k}l"), h, pop, repl(&[(&q2l, "i"), (&t.write, "i")]), vec![]),
        }
        if t.read == tm.blank {
            let h = head(&[(&bl, "j"), (&q1l, "i")]);
            let name = format!("d{k}lb");
            match t.dir {
                Move::R => {
                    let app = ChainStep { anchor: None, f: LayerFn::App { target: ChildSel::Only, payload: vec![bl.clone()] } };
                    rule(name, h, RuleKind::Simple, repl(&[(&q2r, "i")]), vec![app, ins(&t.write)])
                }
                Move::L => rule(name, h, RuleKind::Simple, repl(&[(&bl, "j"), (&q2l, "i"), (&t.write, "i")]), vec![]),
            }
        }
    }

    let mut reg = LabelRegistry::new();
    let s0 = reg.new_root();
    let s1 = reg.new_child(s0).expect("root exists");
    let mut uids = UidGen::new();
    let mut vis = vec![LayeredLetter::new(state_r(&tm.start), s0, uids.fresh())];
    vis.extend(input.iter().map(|a| LayeredLetter::new(a.clone(), s0, uids.fresh())));
    vis.push(LayeredLetter::new(br, s0, uids.fresh()));
    let invis = vec![LayeredLetter::new(bl, s1, uids.fresh())];
    let init = GWord::new(LayeredWord(vis), LayeredWord(invis));
    Ok(Mlpg::new(alphabet, rules, reg, init, None)?)
}

/// A machine configuration restricted to the cells the input covers or the
/// head has visited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmSnapshot {
    pub state: Sym,
    pub tape: Vec<Sym>,
    pub head: usize,
}

impl fmt::Display for TmSnapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.state)?;
        for (k, a) in self.tape.iter().enumerate() {
            if k == self.head {
                write!(f, " [{a}]")?;
            } else {
                write!(f, " {a}")?;
            }
        }
        Ok(())
    }
}

/// Reads the machine configuration off a word of the emulating grammar.
/// Invisible letters are ordered by label depth, deepest (leftmost cell)
/// first. `None` if the word does not have the shape of a model word.
pub fn reconstruct(tm: &TuringMachine, reg: &LabelRegistry, w: &GWord) -> Option<TmSnapshot> {
    let vis = w.visible.plain();
    let mut left: Vec<&LayeredLetter> = w.invisible.iter().collect();
    left.sort_by_key(|l| std::cmp::Reverse(reg.depth(l.label)));
    let mut left: Vec<Sym> = left.into_iter().map(|l| l.letter.clone()).filter(|a| &**a != BLANK_L).collect();
    if vis.len() < 2 {
        return None;
    }
    let (state, cell) = if let Some(q) = vis[0].strip_suffix("^R") {
        (q, &vis[1])
    } else {
        (vis[1].strip_suffix("^L")?, &vis[0])
    };
    let cell = match &**cell {
        BLANK_L if left.is_empty() => tm.blank.clone(),
        BLANK_R if vis.len() == 2 => tm.blank.clone(),
        a if is_reserved(a) => return None,
        _ => cell.clone(),
    };
    let mut right = vis[2..].to_vec();
    if right.last().is_some_and(|a| &**a == BLANK_R) {
        right.pop();
    }
    if right.iter().any(|a| is_reserved(a)) {
        return None;
    }
    let head = left.len();
    left.push(cell);
    left.extend(right);
    Some(TmSnapshot { state: sym(state), tape: left, head })
}
