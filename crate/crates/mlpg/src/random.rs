//! Seeded generators of small random grammars for property tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grammar::{ChainStep, HeadItem, LabelRole, LetterPat, Mlpg, MlpgRule, PopSelector, ReplItem, RuleKind};
use crate::labels::LabelRegistry;
use crate::layer_functions::{ChildSel, LayerFn};
use crate::layered_words::{sym, GWord, LayeredLetter, LayeredWord, Sym, UidGen};
use crate::prefix_grammar::{PrefixGrammar, PrefixRule};

#[derive(Clone, Debug)]
pub struct RandomMlpgParams {
    pub letters: usize,
    pub rules: usize,
    pub k1: usize,
    pub k2: usize,
    pub max_repl: usize,
    pub init_len: usize,
    pub halting: bool,
}

impl Default for RandomMlpgParams {
    fn default() -> Self {
        Self { letters: 4, rules: 5, k1: 2, k2: 2, max_repl: 3, init_len: 3, halting: false }
    }
}

fn alphabet(n: usize) -> Vec<Sym> {
    (0..n).map(|i| sym(&((b'a' + i as u8) as char).to_string())).collect()
}

fn payload(rng: &mut ChaCha8Rng, alpha: &[Sym], max: usize) -> Vec<Sym> {
    let n = rng.gen_range(1..=max.max(1));
    (0..n).map(|_| alpha[rng.gen_range(0..alpha.len())].clone()).collect()
}

fn random_rule(rng: &mut ChaCha8Rng, p: &RandomMlpgParams, alpha: &[Sym], name: String, halt: bool) -> MlpgRule {
    let head_letter = alpha[rng.gen_range(0..alpha.len())].clone();
    let pop = rng.gen_bool(0.35);
    let n = rng.gen_range(0..=p.max_repl);
    let mut depths: Vec<usize> = (0..n).map(|_| if pop { 0 } else { rng.gen_range(0..3) }).collect();
    depths.sort_unstable_by(|a, b| b.cmp(a));
    let names = ["n1", "n2"];
    let replacement = depths
        .into_iter()
        .map(|d| {
            let letter = LetterPat::Lit(alpha[rng.gen_range(0..alpha.len())].clone());
            let role = if d == 0 {
                LabelRole::Head("h".into())
            } else {
                LabelRole::Fresh { base: "h".into(), names: names[..d].iter().map(|s| s.to_string()).collect() }
            };
            ReplItem { letter, role }
        })
        .collect();
    let chain_len = rng.gen_range(0..=p.k1);
    let chain = (0..chain_len)
        .map(|_| {
            let f = match rng.gen_range(0..10) {
                0..=3 => LayerFn::App { target: ChildSel::New, payload: payload(rng, alpha, p.k2) },
                4..=5 => LayerFn::App { target: ChildSel::Nth(1), payload: payload(rng, alpha, p.k2) },
                6..=7 => LayerFn::Ins { target: ChildSel::Nth(1), payload: payload(rng, alpha, p.k2) },
                8 => LayerFn::Del { target: ChildSel::Nth(1) },
                _ => LayerFn::Copy { target: ChildSel::Nth(1) },
            };
            ChainStep { anchor: None, f }
        })
        .collect();
    MlpgRule {
        name,
        head: vec![HeadItem { letter: LetterPat::Lit(head_letter), label_var: "h".into() }],
        exact: false,
        halt,
        kind: if pop { RuleKind::Pop(PopSelector::Oldest) } else { RuleKind::Simple },
        pop_anchor: None,
        replacement,
        chain,
    }
}

/// A random alphabetic grammar. Pop rules only relabel with the head label so
/// that popped letters stay comparable with the replacement.
pub fn random_alphabetic_mlpg(seed: u64, p: &RandomMlpgParams) -> Mlpg {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = alphabet(p.letters.max(1));
    let mut rules: Vec<MlpgRule> =
        (0..p.rules).map(|k| random_rule(&mut rng, p, &alpha, format!("R{}", k + 1), false)).collect();
    if p.halting && !rules.is_empty() {
        let k = rng.gen_range(0..rules.len());
        rules[k].halt = true;
    }
    let mut reg = LabelRegistry::new();
    let s0 = reg.new_root();
    let s1 = reg.new_child(s0).expect("root exists");
    let mut uids = UidGen::new();
    let vis = (0..p.init_len.max(1))
        .map(|_| LayeredLetter::new(alpha[rng.gen_range(0..alpha.len())].clone(), s0, uids.fresh()))
        .collect();
    let inv = (0..rng.gen_range(0..=2))
        .map(|_| LayeredLetter::new(alpha[rng.gen_range(0..alpha.len())].clone(), s1, uids.fresh()))
        .collect();
    let init = GWord::new(LayeredWord(vis), LayeredWord(inv));
    Mlpg::new(alpha, rules, reg, init, Some((p.k1, p.k2))).expect("generated grammar is well formed")
}

/// A random alphabetic prefix grammar with right-hand sides of length at most
/// `max_rhs`.
pub fn random_alphabetic_pg(seed: u64, letters: usize, rules: usize, max_rhs: usize, init_len: usize) -> PrefixGrammar {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = alphabet(letters.max(1));
    let pick = |rng: &mut ChaCha8Rng| alpha[rng.gen_range(0..alpha.len())].clone();
    let rules = (0..rules)
        .map(|_| {
            let lhs = vec![pick(&mut rng)];
            let n = rng.gen_range(0..=max_rhs);
            PrefixRule { lhs, rhs: (0..n).map(|_| pick(&mut rng)).collect() }
        })
        .collect();
    let init = (0..init_len.max(1)).map(|_| pick(&mut rng)).collect();
    PrefixGrammar { rules, init }
}
