//! Property suites: printer/parser round-trips, spectrum counter
//! consistency, metric and score ranges, atomization, and effort bounds.

use minifl::frontend::{parse, print, structurally_eq, Ast, StatementId};
use minifl::purification::atomize;
use minifl::ranking::{normalize, refine, stmt_effort, RefineVariant};
use minifl::spectra::{
    counters, localize, suspiciousness, CoverageCounters, SpectrumMatrix, SpectrumRow, Technique,
};
use proptest::prelude::*;
use std::collections::BTreeMap;

// ---- expression / program round-trips ----------------------------------

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u32..1000).prop_map(|n| format!("{n}")),
        (0u32..100, 1u32..100).prop_map(|(a, b)| format!("{a}.{b}")),
        Just("true".to_string()),
        Just("false".to_string()),
        Just("nan".to_string()),
        prop_oneof![Just("a"), Just("b"), Just("c")].prop_map(str::to_string),
    ]
}

fn expr_src() -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 64, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop_oneof![
                Just("+"), Just("-"), Just("*"), Just("/"), Just("%"),
                Just("<"), Just("<="), Just(">"), Just(">="),
                Just("=="), Just("!="), Just("&&"), Just("||"),
            ])
                .prop_map(|(l, r, op)| format!("({l} {op} {r})")),
            inner.clone().prop_map(|e| format!("(-{e})")),
            inner.clone().prop_map(|e| format!("(!{e})")),
            (inner.clone(), inner).prop_map(|(x, y)| format!("g({x}, {y})")),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_roundtrip_is_stable(e in expr_src()) {
        let src = format!("fn g(x, y) {{ return x; }}\nfn f(a, b, c) {{ return {e}; }}");
        let ast = parse(&src, "p.ml0").unwrap();
        let printed = print(&ast);
        let reparsed = parse(&printed, "p.ml0")
            .unwrap_or_else(|err| panic!("reparse failed:\n{printed}\n{err}"));
        prop_assert!(structurally_eq(&ast, &reparsed), "mismatch for:\n{printed}");
        // canonical printing is a fixpoint.
        prop_assert_eq!(printed.clone(), print(&reparsed));
    }

    #[test]
    fn ordinals_are_dense_and_stable(n_fns in 1usize..4, stmts in 1usize..5) {
        let mut src = String::new();
        for f in 0..n_fns {
            src.push_str(&format!("fn f{f}(x) {{\n"));
            for s in 0..stmts {
                src.push_str(&format!("    let v{s} = x + {s};\n"));
            }
            src.push_str("    return x;\n}\n");
        }
        let a = parse(&src, "p.ml0").unwrap();
        let b = parse(&src, "p.ml0").unwrap();
        let ids: Vec<u32> = a.all_statements().iter().map(|s| s.id.0).collect();
        prop_assert_eq!(ids.clone(), (0..a.stmt_count as u32).collect::<Vec<_>>());
        prop_assert!(structurally_eq(&a, &b));
    }
}

// ---- spectra ------------------------------------------------------------

fn arb_matrix() -> impl Strategy<Value = SpectrumMatrix> {
    (1usize..8, 1usize..12).prop_flat_map(|(n_stmts, n_tests)| {
        proptest::collection::vec(
            (any::<bool>(), proptest::collection::vec(any::<bool>(), n_stmts)),
            n_tests,
        )
        .prop_map(move |rows| SpectrumMatrix {
            statements: (0..n_stmts as u32).map(StatementId).collect(),
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(i, (failed, covered))| SpectrumRow {
                    test: format!("t{i}"),
                    failed,
                    covered,
                })
                .collect(),
        })
    })
}

proptest! {
    #[test]
    fn counters_recount_rows(matrix in arb_matrix()) {
        let failing = matrix.rows.iter().filter(|r| r.failed).count() as u32;
        let passing = matrix.rows.len() as u32 - failing;
        for &s in &matrix.statements {
            let c = counters(&matrix, s).unwrap();
            prop_assert_eq!(c.a_ef + c.a_nf, failing);
            prop_assert_eq!(c.a_ep + c.a_np, passing);
        }
    }

    #[test]
    fn metrics_stay_in_unit_range(
        a_ef in 0u32..60, a_nf in 0u32..60, a_ep in 0u32..60, a_np in 0u32..60,
    ) {
        let c = CoverageCounters { a_ef, a_nf, a_ep, a_np };
        for t in Technique::ALL {
            let v = suspiciousness(c, t);
            prop_assert!(v.is_finite(), "{t} not finite on {c:?}");
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v), "{t} out of range: {v}");
        }
    }

    #[test]
    fn localization_is_defined_for_every_candidate(matrix in arb_matrix()) {
        prop_assume!(matrix.rows.iter().any(|r| r.failed));
        for t in Technique::ALL {
            let map = localize(&matrix, t).unwrap();
            prop_assert_eq!(map.len(), matrix.statements.len());
        }
    }
}

// ---- ranking ------------------------------------------------------------

fn arb_scores() -> impl Strategy<Value = BTreeMap<StatementId, f64>> {
    proptest::collection::vec(prop_oneof![Just(0.0), Just(0.25), Just(0.5), Just(1.0)], 1..12)
        .prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, x)| (StatementId(i as u32), x))
                .collect()
        })
}

proptest! {
    #[test]
    fn normalization_is_affine_into_unit_interval(scores in arb_scores()) {
        let norms = normalize(&scores);
        for v in norms.values() {
            prop_assert!((0.0..=1.0).contains(v));
        }
        let min = scores.values().cloned().fold(f64::INFINITY, f64::min);
        let max = scores.values().cloned().fold(f64::NEG_INFINITY, f64::max);
        if min == max {
            prop_assert!(norms.values().all(|&v| v == 1.0));
        } else {
            // order preservation.
            for (a, &va) in &scores {
                for (b, &vb) in &scores {
                    if va < vb {
                        prop_assert!(norms[a] < norms[b]);
                    }
                }
            }
        }
    }

    #[test]
    fn effort_is_bounded_by_candidate_count(scores in arb_scores(), pick in any::<prop::sample::Index>()) {
        let ids: Vec<StatementId> = scores.keys().copied().collect();
        let faulty = ids[pick.index(ids.len())];
        let effort = stmt_effort(&scores, faulty).unwrap();
        prop_assert!(effort >= 1.0, "effort {effort} below 1");
        prop_assert!(effort <= scores.len() as f64, "effort {effort} above |S|");
    }

    #[test]
    fn refined_scores_stay_in_unit_interval(
        scores in arb_scores(),
        rows in proptest::collection::vec(any::<u16>(), 0..4),
    ) {
        let statements: Vec<StatementId> = scores.keys().copied().collect();
        let purified = minifl::purification::PurifiedSpectra {
            statements: statements.clone(),
            rows: rows
                .iter()
                .enumerate()
                .map(|(i, bits)| minifl::purification::PurifiedRow {
                    origin: format!("t{i}"),
                    kept_assertion: None,
                    covered: statements.iter().enumerate().map(|(j, _)| bits >> j & 1 == 1).collect(),
                })
                .collect(),
        };
        for variant in [RefineVariant::Product, RefineVariant::Average, RefineVariant::Geometric] {
            let refined = refine(&scores, &purified, variant);
            for r in refined.values() {
                prop_assert!((0.0..=1.0).contains(&r.norm));
                prop_assert!((0.0..=1.0).contains(&r.ratio));
                prop_assert!((0.0..=1.0).contains(&r.score), "{variant:?}: {r:?}");
            }
        }
    }
}

// ---- atomization --------------------------------------------------------

fn arb_test_src() -> impl Strategy<Value = String> {
    proptest::collection::vec(0u8..4, 1..10).prop_map(|kinds| {
        let mut src = String::from("test t {\n    let x = 1;\n");
        for (i, k) in kinds.iter().enumerate() {
            match k {
                0 => src.push_str(&format!("    assert(x > {i});\n")),
                1 => src.push_str(&format!("    assert_eq(x, {i});\n")),
                2 => src.push_str(&format!("    let y{i} = x + {i};\n")),
                _ => src.push_str(&format!("    if (x > 0) {{ assert(x < {i}); }}\n")),
            }
        }
        src.push_str("}\n");
        src
    })
}

proptest! {
    #[test]
    fn atomization_law_on_generated_tests(src in arb_test_src()) {
        let ast = parse(&src, "t.ml0").unwrap();
        let test = &ast.tests[0];
        let variants = atomize(test);
        prop_assert_eq!(variants.len(), test.assertion_ids().len());
        for v in &variants {
            let hard = minifl::frontend::block_preorder(&v.body.body)
                .iter()
                .filter(|s| s.is_hard_assertion())
                .count();
            prop_assert_eq!(hard, 1);
            // statement ids and order are untouched.
            let orig: Vec<u32> = minifl::frontend::block_preorder(&test.body).iter().map(|s| s.id.0).collect();
            let var: Vec<u32> = minifl::frontend::block_preorder(&v.body.body).iter().map(|s| s.id.0).collect();
            prop_assert_eq!(orig, var);
        }
    }
}

// ---- determinism of the whole pipeline on a tiny fixed program ----------

#[test]
fn suite_runs_are_deterministic() {
    let src = "fn fib(n) {\n\
                   if (n < 2.0) {\n\
                       return n;\n\
                   }\n\
                   return fib(n - 1.0) + fib(n - 2.0);\n\
               }\n\
               test f { assert_eq(fib(10.0), 55.0); assert_eq(fib(1.0), 1.0); }";
    let ast: Ast = parse(src, "p.ml0").unwrap();
    let a = minifl::interpreter::run_suite(&ast, 1_000_000);
    let b = minifl::interpreter::run_suite(&ast, 1_000_000);
    for (ka, kb) in a.iter().zip(b.iter()) {
        assert_eq!(ka.0, kb.0);
        assert_eq!(ka.1 .1.dump(), kb.1 .1.dump());
    }
}
