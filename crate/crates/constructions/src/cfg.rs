//! Context-free grammars in Greibach normal form as alphabetic multi-layer
//! prefix grammars. The visible layer is the stack of pending nonterminals,
//! the invisible layer collects the terminals produced so far under a single
//! child label; a final pop moves them to the visible layer.

use std::collections::BTreeSet;
use std::fmt;

use mlpg::{
    sym, ChainStep, ChildSel, GWord, LabelRegistry, LayerFn, LayeredLetter, LayeredWord, Mlpg, MlpgError, MlpgRule,
    PopSelector, RuleKind, Sym, UidGen,
};

use crate::{head, repl};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CfgError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("rule {0} is not in Greibach normal form")]
    NotGreibach(String),
    #[error("grammar has no rules")]
    Empty,
    #[error(transparent)]
    Grammar(#[from] MlpgError),
}

/// `lhs -> rhs`; a non-empty `rhs` is a terminal followed by nonterminals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfgRule {
    pub lhs: Sym,
    pub rhs: Vec<Sym>,
}

impl fmt::Display for CfgRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.lhs)?;
        for s in &self.rhs {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfgGnf {
    pub nonterminals: Vec<Sym>,
    pub terminals: Vec<Sym>,
    pub start: Sym,
    pub rules: Vec<CfgRule>,
}

impl CfgGnf {
    /// Nonterminals are the left-hand sides; every other symbol is a
    /// terminal. The start symbol is the left-hand side of the first rule.
    pub fn new(rules: Vec<CfgRule>) -> Result<Self, CfgError> {
        let start = rules.first().ok_or(CfgError::Empty)?.lhs.clone();
        let mut nonterminals: Vec<Sym> = Vec::new();
        for r in &rules {
            if !nonterminals.contains(&r.lhs) {
                nonterminals.push(r.lhs.clone());
            }
        }
        let mut terminals: Vec<Sym> = Vec::new();
        for r in &rules {
            if let Some((u, rest)) = r.rhs.split_first() {
                if nonterminals.contains(u) || rest.iter().any(|q| !nonterminals.contains(q)) {
                    return Err(CfgError::NotGreibach(r.to_string()));
                }
                if !terminals.contains(u) {
                    terminals.push(u.clone());
                }
            }
        }
        Ok(Self { nonterminals, terminals, start, rules })
    }

    /// One rule per line: `S -> a S B`, `E ->` (or `E -> Λ`).
    pub fn parse(text: &str) -> Result<Self, CfgError> {
        let mut rules = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (l, r) = line.split_once("->").ok_or(CfgError::Syntax { line: n + 1, msg: "expected '->'".into() })?;
            let lhs: Vec<&str> = l.split_whitespace().collect();
            let [lhs] = lhs.as_slice() else {
                return Err(CfgError::Syntax { line: n + 1, msg: "left-hand side must be one nonterminal".into() });
            };
            let rhs = r.split_whitespace().filter(|s| *s != "Λ").map(sym).collect();
            rules.push(CfgRule { lhs: sym(lhs), rhs });
        }
        Self::new(rules)
    }

    fn fresh_name(&self, base: &str) -> Sym {
        let used: BTreeSet<&str> = self.nonterminals.iter().chain(&self.terminals).map(|s| &**s).collect();
        let mut name = base.to_string();
        while used.contains(name.as_str()) {
            name.push('\'');
        }
        sym(&name)
    }

    /// Rules in the shape `q -> u q2 q3` or `q -> Λ`: shorter productions are
    /// padded with a nonterminal that only derives `Λ`. Productions with more
    /// than two nonterminals are kept as they are. Returns the padding
    /// nonterminal if one was needed.
    pub fn binarized(&self) -> (Vec<CfgRule>, Option<Sym>) {
        let pad = self.fresh_name("Eps");
        let mut used = false;
        let mut out: Vec<CfgRule> = self
            .rules
            .iter()
            .map(|r| {
                let mut rhs = r.rhs.clone();
                if !rhs.is_empty() && rhs.len() < 3 {
                    used = true;
                    rhs.resize(3, pad.clone());
                }
                CfgRule { lhs: r.lhs.clone(), rhs }
            })
            .collect();
        if used {
            out.push(CfgRule { lhs: pad.clone(), rhs: vec![] });
        }
        (out, used.then_some(pad))
    }
}

pub fn cfg_to_mlpg(cfg: &CfgGnf) -> Result<Mlpg, CfgError> {
    let (rules, pad) = cfg.binarized();
    let pop = cfg.fresh_name("Pop");
    let mut alphabet: Vec<Sym> = cfg.terminals.clone();
    alphabet.extend(cfg.nonterminals.iter().cloned());
    alphabet.extend(pad);
    alphabet.push(pop.clone());
    let mut out = Vec::new();
    for (k, r) in rules.iter().enumerate() {
        let (replacement, chain) = match r.rhs.split_first() {
            Some((u, qs)) => (
                repl(&qs.iter().map(|q| (q, "h")).collect::<Vec<_>>()),
                vec![ChainStep { anchor: None, f: LayerFn::App { target: ChildSel::Only, payload: vec![u.clone()] } }],
            ),
            None => (vec![], vec![]),
        };
        out.push(MlpgRule {
            name: format!("p{k}"),
            head: head(&[(&r.lhs, "h")]),
            exact: false,
            halt: false,
            kind: RuleKind::Simple,
            pop_anchor: None,
            replacement,
            chain,
        });
    }
    out.push(MlpgRule {
        name: "stop".into(),
        head: head(&[(&pop, "h")]),
        exact: true,
        halt: true,
        kind: RuleKind::Pop(PopSelector::Oldest),
        pop_anchor: None,
        replacement: vec![],
        chain: vec![],
    });
    let mut reg = LabelRegistry::new();
    let s0 = reg.new_root();
    let mut uids = UidGen::new();
    let vis = vec![LayeredLetter::new(cfg.start.clone(), s0, uids.fresh()), LayeredLetter::new(pop, s0, uids.fresh())];
    let init = GWord::new(LayeredWord(vis), LayeredWord::empty());
    Ok(Mlpg::new(alphabet, out, reg, init, None)?)
}
