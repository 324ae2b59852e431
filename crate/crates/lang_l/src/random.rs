//! Seeded random terms for property tests.

use rand::Rng;

use crate::term::Term;

/// Symbols a random term may use: constructors and functions with arities,
/// and variable names.
#[derive(Debug, Clone)]
pub struct Signature {
    pub ctors: Vec<(String, usize)>,
    pub funcs: Vec<(String, usize)>,
    pub vars: Vec<String>,
}

impl Default for Signature {
    fn default() -> Self {
        Signature {
            ctors: vec![("Z".into(), 0), ("S".into(), 1), ("c".into(), 2)],
            funcs: vec![("f".into(), 1), ("g".into(), 1), ("b".into(), 2)],
            vars: vec!["x".into(), "x1".into(), "x2".into()],
        }
    }
}

/// A random term of depth at most `depth`; calls get uid 0.
pub fn random_term<R: Rng>(rng: &mut R, sig: &Signature, depth: usize) -> Term {
    let leaves: Vec<Term> = sig
        .ctors
        .iter()
        .filter(|(_, n)| *n == 0)
        .map(|(c, _)| Term::ctor(c, vec![]))
        .chain(sig.vars.iter().map(|v| Term::var(v)))
        .collect();
    if depth <= 1 || rng.gen_bool(0.25) {
        return leaves[rng.gen_range(0..leaves.len())].clone();
    }
    let inner: Vec<(&String, usize, bool)> = sig
        .ctors
        .iter()
        .filter(|(_, n)| *n > 0)
        .map(|(c, n)| (c, *n, false))
        .chain(sig.funcs.iter().map(|(f, n)| (f, *n, true)))
        .collect();
    let (name, n, call) = inner[rng.gen_range(0..inner.len())];
    let args = (0..n).map(|_| random_term(rng, sig, depth - 1)).collect();
    if call {
        Term::call(name, args)
    } else {
        Term::ctor(name, args)
    }
}

/// A random term without variables.
pub fn random_ground_term<R: Rng>(rng: &mut R, sig: &Signature, depth: usize) -> Term {
    let sig = Signature { vars: vec![], ..sig.clone() };
    random_term(rng, &sig, depth)
}
