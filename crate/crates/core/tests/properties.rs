mod common;

use pdlkit::large_programs::{
    enumerate_instances, is_consistent_transition, is_instance, leq, left_right_sets, lift, canonical_program,
};
use pdlkit::model_search::{check_validity, find_model, random_structure, SearchBudget};
use pdlkit::normal_form::{is_normal, normalize};
use pdlkit::semantics::{eval, relation, KripkeStructure};
use pdlkit::syntax::{parse, parse_program, render_program_with, render_with, usub, RenderStyle};
use pdlkit::{Formula, Program};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn formula_strategy() -> BoxedStrategy<Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::prop("p")),
        Just(Formula::prop("q")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let prog = program_over(inner.clone());
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (prog, inner).prop_map(|(p, f)| Formula::diamond(p, f)),
        ]
    })
    .boxed()
}

fn program_over(f: BoxedStrategy<Formula>) -> BoxedStrategy<Program> {
    let leaf = prop_oneof![
        Just(Program::atomic("a")),
        Just(Program::atomic("b")),
        f.prop_map(Program::test),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Program::seq(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Program::union(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Program::inter(a, b)),
        ]
    })
    .boxed()
}

fn program_strategy() -> BoxedStrategy<Program> {
    program_over(formula_strategy())
}

fn structure(seed: u64) -> KripkeStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_structure(&mut rng, &vocab(&["p", "q"], &["a", "b"]), 4)
}

/// `F ::= a | b | F & F | F ; phi? ; F` with propositional tests.
fn padded_strategy() -> impl Strategy<Value = Program> {
    let leaf = prop_oneof![Just(Program::atomic("a")), Just(Program::atomic("b"))];
    leaf.prop_recursive(3, 12, 2, |inner| {
        let test = prop_oneof![Just("p"), Just("q"), Just("~p")].prop_map(|s| Program::test(parse(s).unwrap()));
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Program::inter(a, b)),
            (inner.clone(), test, inner).prop_map(|(a, t, b)| Program::seq(a, Program::seq(t, b))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn formula_render_parse_round_trip(f in formula_strategy(), sugar in any::<bool>()) {
        let text = render_with(&f, RenderStyle { sugar });
        prop_assert_eq!(parse(&text).unwrap(), f);
    }

    #[test]
    fn program_render_parse_round_trip(p in program_strategy(), sugar in any::<bool>()) {
        let text = render_program_with(&p, RenderStyle { sugar });
        prop_assert_eq!(parse_program(&text).unwrap(), p);
    }

    #[test]
    fn eval_matches_naive_oracle(f in formula_strategy(), p in program_strategy(), seed in any::<u64>()) {
        let k = structure(seed);
        for w in 0..k.size() {
            prop_assert_eq!(eval(&k, w, &f).unwrap(), naive_holds(&k, w, &f));
        }
        let rel: std::collections::BTreeSet<_> = relation(&k, &p).unwrap().pairs().into_iter().collect();
        prop_assert_eq!(rel, naive_pairs(&k, &p));
    }

    #[test]
    fn usub_swaps_the_valuation(f in formula_strategy(), psi in formula_strategy(), seed in any::<u64>()) {
        let k = structure(seed);
        let set = (0..k.size()).filter(|&w| naive_holds(&k, w, &psi)).fold(0u64, |s, w| s | 1 << w);
        let swapped = with_valuation(&k, "q", set);
        let g = usub(&f, &psi, "q");
        for w in 0..k.size() {
            prop_assert_eq!(eval(&k, w, &g).unwrap(), naive_holds(&swapped, w, &f));
        }
    }

    #[test]
    fn normal_form_is_normal_idempotent_and_replayable(f in formula_strategy()) {
        let (nf, trace) = normalize(&f);
        prop_assert!(is_normal(&nf), "{} -> {}", f, nf);
        prop_assert_eq!(&normalize(&nf).0, &nf);
        prop_assert_eq!(trace.replay_formula(&f).unwrap(), nf);
    }

    #[test]
    fn labels_follow_the_recurrence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_transition(&mut rng);
        let got: Vec<_> = left_right_sets(&t).into_values().collect();
        let want: Vec<_> = labels(&t).into_iter().map(|(_, l, r)| (l, r)).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn lifted_program_has_itself_as_only_instance(p in padded_strategy()) {
        let l = lift(&p).unwrap();
        prop_assert_eq!(enumerate_instances(&l), vec![canonical_program(&p)]);
        prop_assert!(is_instance(&p, &l));
        prop_assert_eq!(instance_keys(&l).into_iter().collect::<Vec<_>>(), vec![program_key(&p)]);
    }

    #[test]
    fn enumerated_instances_match_the_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_large(&mut rng, &formula_pool(), 3);
        let got: std::collections::BTreeSet<String> = enumerate_instances(&l).iter().map(program_key).collect();
        prop_assert_eq!(got, instance_keys(&l));
        for inst in enumerate_instances(&l) {
            prop_assert!(is_instance(&inst, &l));
        }
        let other = random_instance(&mut rng, &l);
        prop_assert!(is_instance(&other, &l));
    }

    #[test]
    fn leq_matches_instance_inclusion(s1 in any::<u64>(), s2 in any::<u64>()) {
        let pool = formula_pool();
        let l1 = random_large(&mut ChaCha8Rng::seed_from_u64(s1), &pool, 3);
        let l2 = random_large(&mut ChaCha8Rng::seed_from_u64(s2), &pool, 3);
        prop_assert_eq!(leq(&l1, &l2), oracle_leq(&l1, &l2));
        prop_assert!(leq(&l1, &l1));
    }

    #[test]
    fn consistency_is_antitone_in_the_labels(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_transition(&mut rng);
        let bigger = random_transition(&mut rng);
        let mut grown = t.clone();
        grown.left.extend(bigger.left);
        grown.right.extend(bigger.right);
        prop_assert_eq!(is_consistent_transition(&t), oracle_consistent(&t));
        if is_consistent_transition(&grown) {
            prop_assert!(is_consistent_transition(&t));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parallel_search_equals_serial(f in formula_strategy()) {
        let b = SearchBudget::exhaustive(2);
        prop_assert_eq!(find_model(&f, &b).unwrap(), find_model(&f, &b.clone().serial()).unwrap());
        prop_assert_eq!(check_validity(&f, &b).unwrap(), check_validity(&f, &b.serial()).unwrap());
    }
}
