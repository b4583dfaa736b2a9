//! Property tests across the generic, classify, oracle and cli layers.

use proptest::prelude::*;

use polimage_core::classify::{
    classify_general, classify_multilinear, unit_evaluations, ClassifyOptions, Mode, Verdict, DEFAULT_UNIT_BUDGET,
};
use polimage_core::cli::{execute, Cli};
use polimage_core::generic::{generic_eval, probabilistic_probe, ProbeConfig, TermBudget};
use polimage_core::matalg::{all_matrices, evaluate, Mat2, PiValue};
use polimage_core::oracle::{
    alternating_trace_trials, chuang_property_check, enumerate_image, enumerate_naive, DEFAULT_TUPLE_BUDGET,
};
use polimage_core::{FieldSpec, FreePoly, Scalar, Word};

use clap::Parser;

fn q() -> FieldSpec {
    FieldSpec::rationals()
}

/// Up to `terms` words over `m` variables with lengths in `1..=max_len`.
fn poly(m: usize, max_len: usize, terms: usize) -> impl Strategy<Value = FreePoly> {
    prop::collection::vec((prop::collection::vec(1..=m, 1..=max_len), -3i64..=3), 1..=terms)
        .prop_map(move |ts| FreePoly::from_terms(m, q(), ts.into_iter().map(|(w, c)| (Word::new(w), q().from_i64(c)))))
}

/// Multilinear polynomial in `m` variables: random coefficients on random
/// orderings of `1..=m`.
fn multilinear(m: usize) -> impl Strategy<Value = FreePoly> {
    let perm = Just((1..=m).collect::<Vec<usize>>()).prop_shuffle();
    prop::collection::vec((perm, -2i64..=2), 1..=4)
        .prop_map(move |ts| FreePoly::from_terms(m, q(), ts.into_iter().map(|(w, c)| (Word::new(w), q().from_i64(c)))))
        .prop_filter("nonzero", |f| !f.is_zero())
}

fn small_matrix(field: FieldSpec) -> impl Strategy<Value = Mat2> {
    prop::array::uniform4(-4i64..=4).prop_map(move |e| Mat2::new(field, e.map(|x| field.from_i64(x))).unwrap())
}

fn point(args: &[Mat2]) -> Vec<Scalar> {
    args.iter().flat_map(|a| a.entries().iter().cloned()).collect()
}

fn permuted(p: &FreePoly, perm: &[usize]) -> FreePoly {
    FreePoly::from_terms(
        p.nvars(),
        p.field(),
        p.terms().map(|(w, c)| (Word::new(w.letters().iter().map(|&i| perm[i - 1]).collect()), c.clone())),
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn generic_eval_is_a_ring_homomorphism(f in poly(2, 3, 4), g in poly(2, 3, 4)) {
        let mut b = TermBudget::default();
        let ef = generic_eval(&f, &mut b).unwrap();
        let eg = generic_eval(&g, &mut b).unwrap();
        let prod = generic_eval(&f.checked_mul(&g).unwrap(), &mut b).unwrap();
        prop_assert_eq!(prod, ef.mul(&eg, &mut b).unwrap());
        let sum = generic_eval(&f.checked_add(&g).unwrap(), &mut b).unwrap();
        for k in 0..4 {
            prop_assert_eq!(&sum.entries()[k], &ef.entries()[k].add(&eg.entries()[k]));
        }
    }

    #[test]
    fn generic_eval_specializes_to_direct_evaluation(
        f in poly(2, 4, 5),
        a in small_matrix(FieldSpec::rationals()),
        b in small_matrix(FieldSpec::rationals()),
    ) {
        let g = generic_eval(&f, &mut TermBudget::default()).unwrap();
        let args = [a, b];
        let direct = evaluate(&f, &args);
        prop_assert_eq!(&g.evaluate(&point(&args)), direct.entries());
    }

    #[test]
    fn commutators_have_generic_trace_zero(f in poly(3, 2, 3), g in poly(3, 2, 3)) {
        let c = f.commutator(&g).unwrap();
        let e = generic_eval(&c, &mut TermBudget::default()).unwrap();
        prop_assert!(e.trace().is_zero());
    }

    #[test]
    fn multilinear_generic_entries_have_block_degree_one(f in multilinear(3)) {
        let e = generic_eval(&f, &mut TermBudget::default()).unwrap();
        for entry in e.entries() {
            for (mono, _) in entry.terms() {
                for block in mono.exponents().chunks(4) {
                    prop_assert!(block.iter().map(|&x| x as u32).sum::<u32>() <= 1);
                }
            }
        }
    }

    #[test]
    fn multilinear_verdict_is_invariant(f in multilinear(3), perm in Just(vec![1usize, 2, 3]).prop_shuffle(), c in 1i64..=5) {
        let opts = ClassifyOptions::default();
        let base = classify_multilinear(&f, 0, &opts).unwrap().verdict;
        let renamed = classify_multilinear(&permuted(&f, &perm), 0, &opts).unwrap().verdict;
        let scaled = classify_multilinear(&f.scale(&q().from_i64(-c)), 0, &opts).unwrap().verdict;
        prop_assert_eq!(base, renamed);
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn unit_span_is_invariant_under_basis_change(f in multilinear(3), g in small_matrix(FieldSpec::rationals())) {
        prop_assume!(!g.det().is_zero());
        let evals = unit_evaluations(&f, 2, DEFAULT_UNIT_BUDGET).unwrap();
        let values: Vec<Mat2> = evals.iter().map(|(_, v)| v.to_mat2().unwrap()).collect();
        let conj: Vec<Mat2> = values.iter().map(|v| v.conjugate(&g).unwrap()).collect();
        let a = polimage_core::classify::span_dimension(q(), &values).map(|s| s.tag);
        let b = polimage_core::classify::span_dimension(q(), &conj).map(|s| s.tag);
        prop_assert_eq!(a.ok(), b.ok());
    }

    #[test]
    fn enumerated_images_are_invariant_cones(f in poly(2, 3, 3), qi in 0usize..2) {
        let field = [2u64, 3][qi];
        let r = enumerate_image(&f, field, DEFAULT_TUPLE_BUDGET).unwrap();
        prop_assert!(chuang_property_check(&r.image, field).unwrap());
        prop_assert!(r.conjugation_invariant);
    }

    #[test]
    fn multilinear_images_are_scaling_closed_and_spanned_by_units(f in multilinear(2), qi in 0usize..2) {
        let field = [2u64, 3][qi];
        let fq = FieldSpec::prime(field).unwrap();
        let r = enumerate_naive(&f, field, DEFAULT_TUPLE_BUDGET).unwrap();
        prop_assert!(r.cone_closed);
        let fast = enumerate_image(&f, field, DEFAULT_TUPLE_BUDGET).unwrap();
        prop_assert_eq!(&r.image, &fast.image);
        let reduced = f.reduce_to(fq).unwrap();
        let units: Vec<Mat2> = unit_evaluations(&reduced, 2, DEFAULT_UNIT_BUDGET)
            .unwrap()
            .into_iter()
            .map(|(_, v)| v.to_mat2().unwrap())
            .collect();
        let a = polimage_core::classify::span_dimension(fq, &units).map(|s| s.dimension).unwrap_or_else(|e| e.dimension);
        let b = polimage_core::classify::span_dimension(fq, &r.image).map(|s| s.dimension).unwrap_or_else(|e| e.dimension);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn trace_factor_is_linear(seed in any::<u64>()) {
        let rep = alternating_trace_trials(31, 3, seed).unwrap();
        prop_assert!(rep.all_hold && rep.linear_in_t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn scalar_verdicts_imply_scalar_samples(seed in any::<u64>()) {
        let f = FreePoly::parse("[x1,x2]^2", 2, q()).unwrap().multilinearize().unwrap();
        prop_assert_eq!(classify_multilinear(&f, 0, &ClassifyOptions::default()).unwrap().verdict, Verdict::Scalars);
        let cfg = ProbeConfig { trials: 50, structured_trials: 50, seed, ..ProbeConfig::default() };
        prop_assert!(probabilistic_probe(&f, &cfg).unwrap().all_central);
    }

    #[test]
    fn dense_verdicts_carry_distinct_pi_witnesses(seed in any::<u64>(), text in prop::sample::select(vec!["[x1,x2]^2*x1", "x1*x2*x1 + x2^3", "x1^2*x2"])) {
        let f = FreePoly::parse(text, 2, q()).unwrap();
        for mode in [Mode::Symbolic, Mode::Probabilistic] {
            let opts = ClassifyOptions { mode, seed, ..Default::default() };
            let c = classify_general(&f, 0, &opts).unwrap();
            prop_assert_eq!(c.verdict, Verdict::Dense);
            let pis: Vec<PiValue> = c
                .witnesses
                .iter()
                .filter(|w| w.label.starts_with("pi="))
                .map(|w| w.value.pi_invariant())
                .collect();
            prop_assert!(pis.len() >= 2 && pis[0] != pis[1], "{:?}", pis);
            for w in &c.witnesses {
                prop_assert_eq!(&evaluate(&f.reduce_to(w.value.field()).unwrap(), &w.inputs), &w.value);
            }
        }
    }

    #[test]
    fn modes_agree_on_small_homogeneous_polynomials(f in poly(2, 3, 3).prop_filter("homogeneous", |f| f.homogeneous_multidegree().is_some() && !f.is_zero()), seed in 0u64..4) {
        let run = |mode| classify_general(&f, 0, &ClassifyOptions { mode, seed, ..Default::default() }).map(|c| c.verdict);
        prop_assert_eq!(run(Mode::Symbolic).unwrap(), run(Mode::Probabilistic).unwrap());
    }

    #[test]
    fn cli_output_is_deterministic(seed in any::<u64>(), text in prop::sample::select(vec!["[x1,x2]^3", "[x1,x2]+[x1,x2]^2", "x1^2 + x2^3"])) {
        let args = ["polimage", "classify", "--poly", text, "--seed", &seed.to_string()];
        let a = execute(&Cli::try_parse_from(args).unwrap()).unwrap();
        let b = execute(&Cli::try_parse_from(args).unwrap()).unwrap();
        prop_assert_eq!(serde_json::to_string(&a.0).unwrap(), serde_json::to_string(&b.0).unwrap());
    }
}

#[test]
fn enumeration_ignores_worker_partitioning() {
    let f = FreePoly::parse("[x1,x2]^2*x1 + x2*x1", 2, q()).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| enumerate_naive(&f, 3, DEFAULT_TUPLE_BUDGET).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn cone_classes_partition_small_fields() {
    for p in [2u64, 3] {
        let all = all_matrices(FieldSpec::prime(p).unwrap());
        let total: usize = ["Zero", "Scalar", "Nilpotent", "KTilde", "KHat", "DiagDistinct"]
            .iter()
            .map(|tag| all.iter().filter(|m| m.cone_class().tag() == *tag).count())
            .sum();
        assert_eq!(total, all.len());
    }
}
