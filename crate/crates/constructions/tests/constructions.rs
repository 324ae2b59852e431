mod common;

use std::collections::BTreeSet;

use common::*;
use constructions::tm::parse_tm;
use constructions::{cfg_to_mlpg, explang_grammar, tm_to_mlpg, CfgError, CfgGnf};
use mlpg::{enumerate_language, mlpg_to_text, parse_mlpg, run, EnumBudget, Policy, RunOutcome};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn tm_initial_word() {
    let (tm, _) = parse_tm(UNARY_INCREMENT).unwrap();
    let g = tm_to_mlpg(&tm, &syms("1 1")).unwrap();
    assert_eq!(g.init.render_grouped(&g.registry), "<q0^R11BlankR,0> $ <BlankL,0.1>");
    assert!(!g.is_alphabetic());
    assert_eq!(g.max_head(), 2);
    let text = mlpg_to_text(&g);
    let back = parse_mlpg(&text).unwrap();
    assert_eq!(mlpg_to_text(&back), text);
}

#[test]
fn writes_two_ones_and_halts() {
    let (tm, input) = parse_tm(
        "states: p q h\ntape: 1 _\nstart: p\nfinal: h\ndelta: p _ -> q 1 R\ndelta: q _ -> h 1 R\n",
    )
    .unwrap();
    let b = bisimulate(&tm, &input, 30).unwrap();
    assert!(b.halted);
    assert_eq!(b.steps, 2);
    let g = tm_to_mlpg(&tm, &input).unwrap();
    let RunOutcome::Trace(s) = run(&g, Policy::Ordered, 30) else { unreachable!() };
    let last = constructions::reconstruct(&tm, &s.state.reg, s.last()).unwrap();
    assert_eq!(last.to_string(), "h: 1 1 [_]");
}

#[test]
fn sample_machines_bisimulate() {
    let (tm, _) = parse_tm(UNARY_INCREMENT).unwrap();
    let b = bisimulate(&tm, &syms(&"1 ".repeat(20)), 200).unwrap();
    assert!(b.halted && b.steps >= 30, "{} steps", b.steps);
    let (tm, _) = parse_tm(PATTERN_WRITER).unwrap();
    let b = bisimulate(&tm, &syms(&"x ".repeat(32)), 200).unwrap();
    assert!(b.halted && b.steps >= 30, "{} steps", b.steps);
}

#[test]
fn left_end_blanks_extend_the_tape() {
    let (tm, _) = parse_tm(
        "states: a\ntape: 1 _\nstart: a\ndelta: a _ -> a 1 L\ndelta: a 1 -> a 1 L\n",
    )
    .unwrap();
    let b = bisimulate(&tm, &syms("1"), 40).unwrap();
    assert_eq!(b.steps, 40);
    let (tm, _) = parse_tm(
        "states: a b\ntape: 1 _\nstart: a\ndelta: a _ -> b 1 L\ndelta: b _ -> a 1 R\ndelta: a 1 -> a 1 R\ndelta: b 1 -> b 1 L\n",
    )
    .unwrap();
    assert_eq!(bisimulate(&tm, &[], 60).unwrap().steps, 60);
}

#[test]
fn rejects_bad_machines() {
    assert!(parse_tm("states: a\ntape: _\nstart: a\ndelta: a _ -> a _ R\ndelta: a _ -> a _ L\n").is_err());
    assert!(parse_tm("states: a\ntape: BlankR _\nstart: a\n").is_err());
    assert!(parse_tm("states: a\ntape: _\nstart: z\n").is_err());
    assert!(parse_tm("states: a\ntape: _\nstart: a\ndelta: a _ a _ R\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn random_machines_bisimulate(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tm, input) = random_tm(&mut rng);
        if let Err(e) = bisimulate(&tm, &input, 60) {
            prop_assert!(false, "{}", e);
        }
    }
}

const ANBN: &str = "S -> a S B\nS -> a B\nB -> b\n";

#[test]
fn anbn_language() {
    let cfg = CfgGnf::parse(ANBN).unwrap();
    let want: BTreeSet<String> = (1..=5).map(|n| "a".repeat(n) + &"b".repeat(n)).collect();
    assert_eq!(cfg_language(&cfg, 10), want);
    let g = cfg_to_mlpg(&cfg).unwrap();
    assert!(g.is_alphabetic());
    assert_eq!(mlpg_language(&g, 10), want);
}

#[test]
fn padding_and_erasure() {
    let cfg = CfgGnf::parse("S -> a E E\nE ->\n").unwrap();
    let g = cfg_to_mlpg(&cfg).unwrap();
    assert_eq!(mlpg_language(&g, 10), BTreeSet::from(["a".to_string()]));
    let cfg = CfgGnf::parse("S -> a\n").unwrap();
    assert_eq!(cfg.binarized().0.len(), 2);
    assert_eq!(mlpg_language(&cfg_to_mlpg(&cfg).unwrap(), 10), BTreeSet::from(["a".to_string()]));
    let cfg = CfgGnf::parse("S -> a S S S\nS -> b\n").unwrap();
    assert_eq!(mlpg_language(&cfg_to_mlpg(&cfg).unwrap(), 7), cfg_language(&cfg, 7));
}

#[test]
fn empty_word_is_not_generated() {
    let cfg = CfgGnf::parse("S ->\n").unwrap();
    let g = cfg_to_mlpg(&cfg).unwrap();
    assert!(mlpg_language(&g, 10).is_empty());
}

#[test]
fn rejects_non_greibach_rules() {
    assert!(matches!(CfgGnf::parse("S -> S a\n"), Err(CfgError::NotGreibach(_))));
    assert!(matches!(CfgGnf::parse("S -> a b\n"), Err(CfgError::NotGreibach(_))));
    assert!(matches!(CfgGnf::parse("S a -> a\n"), Err(CfgError::Syntax { .. })));
    assert!(matches!(CfgGnf::parse(""), Err(CfgError::Empty)));
}

#[test]
fn random_grammars_agree_with_the_enumerator() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let cfg = random_gnf(&mut rng);
        let g = cfg_to_mlpg(&cfg).unwrap();
        assert_eq!(mlpg_language(&g, 10), cfg_language(&cfg, 10), "{:?}", cfg.rules);
    }
}

#[test]
fn explang_words() {
    let g = explang_grammar();
    let res = enumerate_language(&g, &EnumBudget::new(16, 100_000));
    let words: BTreeSet<String> = res.words.iter().map(|w| w.iter().map(|s| &**s).collect()).collect();
    let want: BTreeSet<String> = [2, 4, 8, 16].iter().map(|&n| "b".repeat(n)).collect();
    assert_eq!(words, want);
    assert!(res.output_lengths.iter().all(|n| n.is_power_of_two()), "{:?}", res.output_lengths);
    let small = enumerate_language(&g, &EnumBudget::new(3, 10_000));
    assert!(!small.output_lengths.contains(&3));
}
