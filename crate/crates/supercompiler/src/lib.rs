//! Whistle-guarded supercompilation of programs in the call-by-name language:
//! unfolding into a process graph, generalization by let-splitting and most
//! specific generalization, folding, and residual program extraction.

pub mod graph;
pub mod msg;
pub mod render;
pub mod residual;

use std::collections::BTreeMap;

use lang_l::{renaming, Program, Term};

pub use graph::{core, unfold, Def, Fire, Graph, Hole, Kind, Node, NodeId};
pub use msg::{msg, msg_with, Generalization};
pub use render::{render_dot, render_tree};
pub use residual::{residualize, Residual, ResidualError};
pub use whistles::Relation;

/// Unfolds and residualizes in one go.
pub fn supercompile(prog: &Program, entry: &Term, whistle: Relation, max_nodes: usize) -> Result<(Graph, Residual), ResidualError> {
    let g = unfold(prog, entry, whistle, max_nodes);
    let r = residualize(&g)?;
    Ok((g, r))
}

/// Equal up to a bijection between function names and renaming of variables
/// within each rule; the rules of a function are compared as sets.
pub fn programs_isomorphic(a: &Program, b: &Program) -> bool {
    let fa: Vec<&str> = a.functions().collect();
    let fb: Vec<&str> = b.functions().collect();
    if fa.len() != fb.len() {
        return false;
    }
    let mut map = BTreeMap::new();
    let mut used = vec![false; fb.len()];
    search(a, b, &fa, &fb, 0, &mut map, &mut used)
}

fn search<'a>(
    a: &Program,
    b: &Program,
    fa: &[&'a str],
    fb: &[&'a str],
    k: usize,
    map: &mut BTreeMap<String, String>,
    used: &mut [bool],
) -> bool {
    if k == fa.len() {
        return fa.iter().all(|f| same_rules(a, b, f, map));
    }
    for j in 0..fb.len() {
        if used[j] || a.arity(fa[k]) != b.arity(fb[j]) || a.rules_of(fa[k]).count() != b.rules_of(fb[j]).count() {
            continue;
        }
        used[j] = true;
        map.insert(fa[k].to_string(), fb[j].to_string());
        if search(a, b, fa, fb, k + 1, map, used) {
            return true;
        }
        used[j] = false;
        map.remove(fa[k]);
    }
    false
}

fn rename_funcs(t: &Term, m: &BTreeMap<String, String>) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Ctor(c, a) => Term::Ctor(c.clone(), a.iter().map(|x| rename_funcs(x, m)).collect()),
        Term::Call { name, args, .. } => {
            Term::call(m.get(name).unwrap_or(name), args.iter().map(|x| rename_funcs(x, m)).collect())
        }
    }
}

fn same_rules(a: &Program, b: &Program, f: &str, m: &BTreeMap<String, String>) -> bool {
    let as_pair = |name: &str, pats: &[Term], body: &Term| {
        Term::ctor("=", vec![Term::call(name, pats.to_vec()), body.clone()])
    };
    let ra: Vec<Term> = a.rules_of(f).map(|(_, r)| rename_funcs(&as_pair(&m[f], &r.pats, &r.body), m)).collect();
    let rb: Vec<Term> = b.rules_of(&m[f]).map(|(_, r)| as_pair(&r.name, &r.pats, &r.body)).collect();
    ra.iter().all(|x| rb.iter().any(|y| renaming(x, y).is_some())) && rb.iter().all(|y| ra.iter().any(|x| renaming(x, y).is_some()))
}
