//! An alphabetic grammar whose language is `{b^(2^n) | n >= 1}`.

use mlpg::{parse_mlpg, Mlpg};

pub const EXPLANG_TEXT: &str = "\
alphabet: a b
init: [a@0] $ [b@0.1][b@0.1]
rule R1 pop(oldest): head a@h => pop ++ [a@h] layer: id
rule R2 halt pop(oldest): head a@h $ => pop layer: id
rule R3: head b@h => layer: app(h.child#1, \"bb\")
";

/// `R1` moves the oldest child group in front of `a`, `R3` doubles each such
/// `b` into a deeper group, and the halting `R2` releases a group once `a` is
/// alone.
pub fn explang_grammar() -> Mlpg {
    parse_mlpg(EXPLANG_TEXT).expect("valid grammar text")
}
