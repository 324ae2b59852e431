//! Multi-layer prefix grammars over partially ordered labels.
//!
//! The crate is organised bottom-up: [`labels`] holds the label order,
//! [`layered_words`] the words built over it, [`layer_functions`] the
//! elementary rewrites of the invisible layer, [`prefix_grammar`] the
//! plain (single layer) special case and [`grammar`] the full rule system.

pub mod grammar;
pub mod labels;
pub mod layer_functions;
pub mod layered_words;
pub mod prefix_grammar;
pub mod random;
pub mod syntax;

pub use grammar::{
    enumerate_language, explore_tree, match_rule, match_rule_all, mlpg_step, run, Bindings,
    ChainStep, EnumBudget, HeadItem, LabelRole, LangResult, LetterPat, Mlpg, MlpgError, MlpgRule,
    Policy, PopSelector, ReplItem, RuleKind, RunOutcome, State, StepLog, TraceSession, TraceTree,
    TreeNodeT,
};
pub use labels::{LabelError, LabelId, LabelRegistry};
pub use layer_functions::{apply_chain, apply_layer_fn, ChildSel, LayerError, LayerFn};
pub use layered_words::{parse_gword, sym, GWord, LayeredLetter, LayeredWord, Sym, Uid, UidGen};
pub use syntax::{mlpg_to_text, parse_mlpg, SyntaxError};
