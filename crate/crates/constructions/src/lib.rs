//! Embeddings of Turing machines and context-free grammars in Greibach
//! normal form into multi-layer prefix grammars, and a grammar generating
//! `{b^(2^n)}`.

pub mod cfg;
pub mod explang;
pub mod tm;

pub use cfg::{cfg_to_mlpg, CfgError, CfgGnf, CfgRule};
pub use explang::explang_grammar;
pub use tm::{reconstruct, tm_to_mlpg, Move, TmError, TmSnapshot, Transition, TuringMachine};

use mlpg::{HeadItem, LabelRole, LetterPat, ReplItem, Sym};

pub(crate) fn head(items: &[(&Sym, &str)]) -> Vec<HeadItem> {
    items.iter().map(|(s, v)| HeadItem { letter: LetterPat::Lit((*s).clone()), label_var: v.to_string() }).collect()
}

pub(crate) fn repl(items: &[(&Sym, &str)]) -> Vec<ReplItem> {
    items
        .iter()
        .map(|(s, v)| ReplItem { letter: LetterPat::Lit((*s).clone()), role: LabelRole::Head(v.to_string()) })
        .collect()
}
