use std::collections::BTreeSet;

use mlpg::labels::LabelRegistry;
use mlpg::layer_functions::{apply_chain, apply_layer_fn, ChildSel, LayerFn};
use mlpg::layered_words::{sym, LayeredLetter, LayeredWord, UidGen};
use mlpg::prefix_grammar::{changed_in_segment, parse_pg, run_ordered, turchin_pair_plain, PlainTrace};
use mlpg::random::{random_alphabetic_mlpg, random_alphabetic_pg, RandomMlpgParams};
use mlpg::{enumerate_language, parse_mlpg, run, EnumBudget, LabelId, Policy, RunOutcome, TraceSession};
use proptest::prelude::*;

const EXPLANG: &str = "alphabet: a b
init: [a@0] $ [b@0.1][b@0.1]
rule R1 pop(oldest): head a@h => pop ++ [a@h] layer: id
rule R2 halt pop(oldest): head a@h $ => pop layer: id
rule R3: head b@h => layer: app(h.child#1, \"bb\")
";

fn closure_precedes(parents: &[Option<usize>], a: usize, b: usize) -> bool {
    let mut cur = parents[b];
    while let Some(p) = cur {
        if p == a {
            return true;
        }
        cur = parents[p];
    }
    false
}

fn word(reg: &mut LabelRegistry, uids: &mut UidGen, items: &[(&str, LabelId)]) -> LayeredWord {
    let _ = reg;
    items.iter().map(|(l, s)| LayeredLetter::new(sym(l), *s, uids.fresh())).collect()
}

#[test]
fn projection_example() {
    let mut reg = LabelRegistry::new();
    let s1 = reg.new_root();
    let s2 = reg.new_child(s1).unwrap();
    let s3 = reg.new_child(s2).unwrap();
    let s4 = reg.new_child(s1).unwrap();
    let mut u = UidGen::new();
    let phi = word(
        &mut reg,
        &mut u,
        &[("a1", s1), ("a2", s1), ("a3", s2), ("a4", s4), ("a5", s1), ("a6", s3), ("a7", s4)],
    );
    assert_eq!(phi.project(s1).plain_string(), "a1a2a5");
    assert_eq!(phi.coproject(s1).plain_string(), "a3a4a6a7");
    let view = phi.tree_view(&reg).unwrap().to_string();
    assert_eq!(view, "0: a1a2a5\n  0.1: a3\n    0.1.1: a6\n  0.2: a4a7\n");
    let s5 = reg.new_root();
    assert!(phi.project(s5).is_empty());
}

#[test]
fn layer_function_examples() {
    let mut reg = LabelRegistry::new();
    let s0 = reg.new_root();
    let s1 = reg.new_child(s0).unwrap();
    let mut u = UidGen::new();
    let phi = word(&mut reg, &mut u, &[("f", s0), ("g", s1)]);
    let app = LayerFn::App { target: ChildSel::Nth(1), payload: vec![sym("g")] };
    let out = apply_layer_fn(&mut reg, &phi, &app, s0, &mut u).unwrap();
    assert_eq!(out.plain_string(), "fgg");
    assert_eq!(out.at(3).unwrap().label, s1);

    let ins = LayerFn::Ins { target: ChildSel::Nth(1), payload: vec![sym("g"), sym("f")] };
    let out = apply_layer_fn(&mut reg, &phi, &ins, s0, &mut u).unwrap();
    let s2 = out.at(3).unwrap().label;
    assert_eq!(out.plain_string(), "fggf");
    assert!(reg.precedes(s0, s2) && reg.precedes(s2, s1));

    let mut reg = LabelRegistry::new();
    let s0 = reg.new_root();
    let s01 = reg.new_child(s0).unwrap();
    let s02 = reg.new_child(s0).unwrap();
    let w = word(&mut reg, &mut u, &[("d", s01), ("d", s02)]);
    let del = LayerFn::Del { target: ChildSel::Nth(1) };
    let out = apply_layer_fn(&mut reg, &w, &del, s0, &mut u).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out.at(1).unwrap().label, s02);

    let w = word(&mut reg, &mut u, &[("d", s01)]);
    let copy = LayerFn::Copy { target: ChildSel::Nth(1) };
    let out = apply_layer_fn(&mut reg, &w, &copy, s0, &mut u).unwrap();
    let c = out.at(2).unwrap().label;
    assert_eq!(out.plain_string(), "dd");
    assert!(!reg.comparable(c, s01));
    assert_eq!(reg.parent(c), Some(s0));
}

#[test]
fn chain_examples() {
    let mut reg = LabelRegistry::new();
    let si = reg.new_root();
    let mut u = UidGen::new();
    let chain = vec![
        LayerFn::App { target: ChildSel::New, payload: vec![sym("b")] },
        LayerFn::App { target: ChildSel::New, payload: vec![sym("b")] },
    ];
    let out = apply_chain(&mut reg, &LayeredWord::empty(), &chain, si, None, &mut u).unwrap();
    let (a, b) = (out.at(1).unwrap().label, out.at(2).unwrap().label);
    assert!(a != b && !reg.comparable(a, b));
    assert_eq!(reg.parent(a), Some(si));

    let same = apply_chain(&mut reg, &out, &[], si, None, &mut u).unwrap();
    assert_eq!(same, out);

    let w = word(&mut reg, &mut u, &[("d", a)]);
    let before = reg.len();
    let bad = vec![LayerFn::Del { target: ChildSel::Nth(1) }, LayerFn::Copy { target: ChildSel::Only }];
    assert!(apply_chain(&mut reg, &w, &bad, si, None, &mut u).is_err());
    assert_eq!(reg.len(), before);
    assert!(apply_chain(&mut reg, &w, &chain, si, Some((1, 2)), &mut u).is_err());
}

#[test]
fn explang_first_trace() {
    let g = parse_mlpg(EXPLANG).unwrap();
    assert!(g.is_alphabetic());
    let mut s = TraceSession::new(&g);
    for r in ["R1", "R3", "R3"] {
        let ri = g.rule_index(r).unwrap();
        let b = mlpg::grammar::match_state(&s.state, &g.rules[ri]).remove(0);
        s.step(&g, ri, &b).unwrap();
    }
    let rendered: Vec<String> = s.words.iter().map(|w| w.render_grouped(&s.state.reg)).collect();
    assert_eq!(
        rendered,
        [
            "<a,0> $ <bb,0.1>",
            "<bb,0.1><a,0> $ Λ",
            "<b,0.1><a,0> $ <bb,0.1.1>",
            "<a,0> $ <bbbb,0.1.1>",
        ]
    );
}

#[test]
fn explang_language_and_tree() {
    let g = parse_mlpg(EXPLANG).unwrap();
    let res = enumerate_language(&g, &EnumBudget::new(16, 20_000));
    let words: BTreeSet<String> = res.words.iter().map(|w| w.iter().map(|s| &**s).collect()).collect();
    let expect: BTreeSet<String> = [2, 4, 8, 16].iter().map(|&n| "b".repeat(n)).collect();
    assert_eq!(words, expect);
    match run(&g, Policy::All, 12) {
        RunOutcome::Tree(t) => {
            let outs: BTreeSet<String> = t.halting_outputs().iter().map(|w| w.plain_string()).collect();
            assert!(outs.contains("bb") && outs.contains("bbbb"), "{outs:?}");
        }
        _ => unreachable!(),
    }
    match run(&g, Policy::Ordered, 8) {
        RunOutcome::Trace(s) => {
            assert_eq!(s.log.len(), 8);
            assert!(s.exhausted);
        }
        _ => unreachable!(),
    }
}

#[test]
fn grammar_without_halting_rules_has_empty_language() {
    let g = parse_mlpg("alphabet: a\ninit: [a@0]\nrule R: head a@h => [a@h] layer: id\n").unwrap();
    let res = enumerate_language(&g, &EnumBudget::new(5, 100));
    assert!(res.words.is_empty());
}

#[test]
fn plain_trace_examples() {
    let g = parse_pg("f -> g f;\nf -> ;\ng -> h;\ng -> ;\nh -> g;\nh -> ;\ninit: h f\n").unwrap();
    let t = run_ordered(&g, 3);
    assert_eq!(t.render(), "hf -> gf -> hf");
    let h2 = t.words[2][0].uid;
    let f2 = t.words[2][1].uid;
    assert!(changed_in_segment(&t, h2, 0, 2).is_ok());
    assert!(!changed_in_segment(&t, f2, 0, 2).unwrap());
    assert!(changed_in_segment(&t, t.words[0][0].uid, 0, 2).unwrap());
    let v = turchin_pair_plain(&t, 0, 2).unwrap();
    assert_eq!((v.phi.len(), v.psi.len(), v.theta.len()), (1, 0, 1));
    assert!(turchin_pair_plain(&t, 0, 1).is_none());
    assert!(turchin_pair_plain(&t, 1, 1).is_none());
}

fn brute_plain(t: &PlainTrace, i: usize, j: usize) -> Option<usize> {
    let (gi, gj) = (&t.words[i], &t.words[j]);
    (0..=gi.len()).rev().find(|&l| {
        if gj.len() < gi.len() {
            return false;
        }
        let p = gi.len() - l;
        let suffix_ok = (0..l).all(|k| {
            let a = &gi[p + k];
            let b = &gj[gj.len() - l + k];
            a.uid == b.uid && !changed_in_segment(t, a.uid, i, j).unwrap()
        });
        suffix_ok && (0..p).all(|k| gi[k].letter == gj[k].letter)
    })
}

#[test]
fn plain_turchin_matches_oracle() {
    for seed in 0..200 {
        let g = random_alphabetic_pg(seed, 3, 5, 3, 2);
        let t = run_ordered(&g, 30);
        for j in 1..t.words.len() {
            for i in 0..j {
                let got = turchin_pair_plain(&t, i, j).map(|v| v.theta.len());
                assert_eq!(got, brute_plain(&t, i, j), "seed {seed} ({i},{j})");
            }
        }
    }
}

/// Labels of visible letters never increase from left to right.
fn visible_monotone(s: &TraceSession, w: &mlpg::GWord) -> bool {
    let v = &w.visible.0;
    (1..v.len()).all(|k| s.state.reg.precedes_eq(v[k].label, v[k - 1].label))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn precedes_is_a_strict_order(ops in prop::collection::vec((0usize..50, any::<bool>()), 1..50)) {
        let mut reg = LabelRegistry::new();
        let mut parents: Vec<Option<usize>> = Vec::new();
        let mut before: Vec<(usize, usize)> = Vec::new();
        for (k, between) in ops {
            if parents.is_empty() {
                reg.new_root();
                parents.push(None);
                continue;
            }
            let target = k % parents.len();
            if between && parents[target].is_some() {
                let anc = parents[target].unwrap();
                let m = reg.insert_between(LabelId(anc as u32), LabelId(target as u32)).unwrap();
                prop_assert_eq!(m.0 as usize, parents.len());
                parents.push(Some(anc));
                parents[target] = Some(m.0 as usize);
            } else {
                reg.new_child(LabelId(target as u32)).unwrap();
                parents.push(Some(target));
            }
            for &(a, b) in &before {
                prop_assert!(reg.precedes(LabelId(a as u32), LabelId(b as u32)));
            }
            before.clear();
            let n = parents.len();
            for a in 0..n {
                for b in 0..n {
                    let p = reg.precedes(LabelId(a as u32), LabelId(b as u32));
                    prop_assert_eq!(p, closure_precedes(&parents, a, b));
                    if p {
                        before.push((a, b));
                    }
                }
            }
        }
    }

    #[test]
    fn projection_partition(letters in prop::collection::vec((0u8..3, 0usize..4), 0..20), pick in 0usize..4) {
        let mut reg = LabelRegistry::new();
        let r = reg.new_root();
        let labels = [r, reg.new_child(r).unwrap(), reg.new_child(r).unwrap(), reg.new_root()];
        let mut u = UidGen::new();
        let phi: LayeredWord = letters
            .iter()
            .map(|&(c, l)| LayeredLetter::new(sym(&((b'a' + c) as char).to_string()), labels[l], u.fresh()))
            .collect();
        let s = labels[pick];
        let (p, c) = (phi.project(s), phi.coproject(s));
        prop_assert_eq!(p.len() + c.len(), phi.len());
        let (mut pi, mut ci) = (p.iter(), c.iter());
        for l in phi.iter() {
            let next = if l.label == s { pi.next() } else { ci.next() };
            prop_assert_eq!(Some(l), next);
        }
    }

    #[test]
    fn append_and_insert_keep_prefix(n in 0usize..6, payload in 1usize..3) {
        let mut reg = LabelRegistry::new();
        let s0 = reg.new_root();
        let s1 = reg.new_child(s0).unwrap();
        let mut u = UidGen::new();
        let phi: LayeredWord = (0..n + 1).map(|_| LayeredLetter::new(sym("a"), s1, u.fresh())).collect();
        let p: Vec<_> = (0..payload).map(|_| sym("b")).collect();
        for f in [
            LayerFn::App { target: ChildSel::New, payload: p.clone() },
            LayerFn::Ins { target: ChildSel::Only, payload: p.clone() },
        ] {
            let out = apply_layer_fn(&mut reg, &phi, &f, s0, &mut u).unwrap();
            prop_assert_eq!(&out.0[..phi.len()], &phi.0[..]);
        }
        let out = apply_layer_fn(&mut reg, &phi, &LayerFn::Del { target: ChildSel::Only }, s0, &mut u).unwrap();
        prop_assert!(out.project(s1).is_empty());
        let out = apply_layer_fn(&mut reg, &phi, &LayerFn::Copy { target: ChildSel::Only }, s0, &mut u).unwrap();
        prop_assert_eq!(out.plain_string(), "a".repeat(2 * phi.len()));
        let uids: BTreeSet<_> = out.uids().into_iter().collect();
        prop_assert_eq!(uids.len(), out.len());
    }

    #[test]
    fn alphabetic_traces_keep_visible_labels_monotone(seed in any::<u64>()) {
        let g = random_alphabetic_mlpg(seed, &RandomMlpgParams::default());
        if let RunOutcome::Trace(s) = run(&g, Policy::Random(seed), 40) {
            for w in &s.words {
                prop_assert!(visible_monotone(&s, w), "{}", w.render(&s.state.reg));
            }
        }
    }
}
