//! Concrete syntax: `f(0)=0; f(x+1)=f(g(x+1))+1;`. `0`, `1`, ... are Peano
//! literals, `t+k` adds `k` successors, names followed by `(` are calls when
//! the name is a defined function and constructors otherwise, bare names
//! starting with `x` or `z` are variables and other bare names are constants.

use std::collections::BTreeSet;

use crate::program::{Program, ProgramError, RuleL};
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    Comma,
    Plus,
    Eq,
    Semi,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or("");
        let line = if line.trim_start().starts_with('#') { "" } else { line };
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let single = match c {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ',' => Some(Tok::Comma),
                '+' => Some(Tok::Plus),
                '=' => Some(Tok::Eq),
                ';' => Some(Tok::Semi),
                _ => None,
            };
            if let Some(tok) = single {
                out.push(Spanned { tok, line: ln + 1, col });
                i += 1;
            } else if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse().map_err(|_| ParseError::Syntax { line: ln + 1, col, msg: "numeral too large".into() })?;
                out.push(Spanned { tok: Tok::Num(n), line: ln + 1, col });
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), line: ln + 1, col });
            } else {
                return Err(ParseError::Syntax { line: ln + 1, col, msg: format!("unexpected character '{c}'") });
            }
        }
    }
    Ok(out)
}

pub fn is_var_name(s: &str) -> bool {
    s.starts_with('x') || s.starts_with('z')
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    funcs: &'a BTreeSet<String>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = match self.toks.get(self.pos).or_else(|| self.toks.last()) {
            Some(s) => (s.line, s.col),
            None => (1, 1),
        };
        ParseError::Syntax { line, col, msg: msg.into() }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {t:?}, found {:?}", self.peek())))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Num(k)) => {
                    let k = *k;
                    self.pos += 1;
                    t = Term::plus(t, k);
                }
                _ => return Err(self.err("expected a numeral after '+'")),
            }
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Term::nat(n))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let mut args = Vec::new();
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            args.push(self.term()?);
                            if self.peek() == Some(&Tok::Comma) {
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    if self.funcs.contains(&name) {
                        Ok(Term::call(&name, args))
                    } else {
                        Ok(Term::ctor(&name, args))
                    }
                } else if is_var_name(&name) {
                    Ok(Term::Var(name))
                } else if self.funcs.contains(&name) {
                    Ok(Term::call(&name, vec![]))
                } else {
                    Ok(Term::ctor(&name, vec![]))
                }
            }
            other => Err(self.err(format!("expected a term, found {other:?}"))),
        }
    }
}

/// Names of the functions defined by the rules of `toks`: the identifier at
/// the start of every rule.
fn defined_names(toks: &[Spanned]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut at_start = true;
    for s in toks {
        if at_start {
            if let Tok::Ident(n) = &s.tok {
                out.insert(n.clone());
            }
        }
        at_start = s.tok == Tok::Semi;
    }
    out
}

fn parse_rules(text: &str, flat: bool) -> Result<Program, ParseError> {
    let toks = lex(text)?;
    let funcs = defined_names(&toks);
    let mut p = Parser { toks: &toks, pos: 0, funcs: &funcs };
    let mut rules = Vec::new();
    while p.peek().is_some() {
        let (line, col) = (toks[p.pos].line, toks[p.pos].col);
        let head = p.term()?;
        let (name, pats) = match head {
            Term::Call { name, args, .. } => (name, args),
            _ => return Err(ParseError::Syntax { line, col, msg: "rule head must be a function call".into() }),
        };
        p.expect(Tok::Eq)?;
        let body = p.term()?;
        if p.peek().is_some() {
            p.expect(Tok::Semi)?;
        }
        rules.push((RuleL { name, pats, body }, line));
    }
    Ok(Program::new(rules, flat)?)
}

/// Parses a source program; patterns must be flat.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_rules(text, true)
}

/// Parses a program whose patterns may be nested, as residual programs are.
pub fn parse_residual(text: &str) -> Result<Program, ParseError> {
    parse_rules(text, false)
}

/// Parses a term; `name(...)` is a call exactly when `name` is defined in
/// `prog`. Calls are numbered from 1 in pre-order.
pub fn parse_term(prog: &Program, text: &str) -> Result<Term, ParseError> {
    let funcs: BTreeSet<String> = prog.functions().map(str::to_string).collect();
    parse_term_with(&funcs, text)
}

pub fn parse_term_with(funcs: &BTreeSet<String>, text: &str) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks: &toks, pos: 0, funcs };
    let mut t = p.term()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    t.renumber(&mut 1);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sugar() {
        let funcs = BTreeSet::new();
        assert_eq!(parse_term_with(&funcs, "2").unwrap(), Term::nat(2));
        assert_eq!(parse_term_with(&funcs, "x+2").unwrap(), Term::plus(Term::var("x"), 2));
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_program("f(0)=0;\nf(x+1)=)").unwrap_err() {
            ParseError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 8)),
            e => panic!("{e}"),
        }
    }
}
