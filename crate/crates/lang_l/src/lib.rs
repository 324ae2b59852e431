//! A small first-order call-by-name language over constructor terms: parsing,
//! readiness marking, driving with narrowing, ground evaluation and
//! extraction of layered stack words from configurations.

pub mod drive;
pub mod matching;
pub mod parse;
pub mod program;
pub mod random;
pub mod stack;
pub mod term;

pub use drive::{drive, eval_ground, head_redex, Branch, BranchKind, Configuration, DriveError, StepInfo};
pub use matching::{active_chain, is_ready, mark_calls, match_call, needed_call, MarkedCall, MatchRes};
pub use parse::{parse_program, parse_residual, parse_term, parse_term_with, ParseError};
pub use program::{classify_function, FnClass, Program, ProgramError, RuleL};
pub use stack::{extract_stack_word, StackTracker};
pub use term::{instance_of, match_term, renaming, Path, Subst, Term};
