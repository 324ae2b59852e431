//! Most specific generalization (anti-unification) of two terms.

use std::collections::HashMap;

use lang_l::{Subst, Term};

#[derive(Debug, Clone, PartialEq)]
pub struct Generalization {
    pub general: Term,
    pub sub1: Subst,
    pub sub2: Subst,
}

/// `general·sub1 = t1` and `general·sub2 = t2`. Common structure is kept
/// (with the uids of `t1`); each distinct pair of differing subterms becomes
/// one variable named by `fresh`.
pub fn msg_with(t1: &Term, t2: &Term, fresh: &mut impl FnMut() -> String) -> Generalization {
    let mut seen: HashMap<(Term, Term), String> = HashMap::new();
    let mut sub1 = Subst::new();
    let mut sub2 = Subst::new();
    fn go(
        a: &Term,
        b: &Term,
        fresh: &mut impl FnMut() -> String,
        seen: &mut HashMap<(Term, Term), String>,
        s1: &mut Subst,
        s2: &mut Subst,
    ) -> Term {
        if a == b {
            return a.clone();
        }
        let same_head = match (a, b) {
            (Term::Ctor(c, xs), Term::Ctor(d, ys)) => c == d && xs.len() == ys.len(),
            (Term::Call { name: c, args: xs, .. }, Term::Call { name: d, args: ys, .. }) => c == d && xs.len() == ys.len(),
            _ => false,
        };
        if same_head {
            let mut out = a.clone();
            for (k, (x, y)) in a.args().iter().zip(b.args()).enumerate() {
                out.args_mut()[k] = go(x, y, fresh, seen, s1, s2);
            }
            return out;
        }
        let v = seen
            .entry((a.clone(), b.clone()))
            .or_insert_with(|| {
                let v = fresh();
                s1.insert(v.clone(), a.clone());
                s2.insert(v.clone(), b.clone());
                v
            })
            .clone();
        Term::Var(v)
    }
    let general = go(t1, t2, fresh, &mut seen, &mut sub1, &mut sub2);
    Generalization { general, sub1, sub2 }
}

/// [`msg_with`] naming variables `v1`, `v2`, ... after those of the inputs.
pub fn msg(t1: &Term, t2: &Term) -> Generalization {
    let used: std::collections::BTreeSet<String> = t1.vars().into_iter().chain(t2.vars()).collect();
    let mut k = 0;
    let mut fresh = || loop {
        k += 1;
        let v = format!("x_g{k}");
        if !used.contains(&v) {
            return v;
        }
    };
    msg_with(t1, t2, &mut fresh)
}
