//! Cross-cutting invariants checked on generated programs and the fixture
//! corpus.

mod common;

use common::{all_fixture_files, fixture_source, modelgen};
use proptest::prelude::*;
use std::collections::BTreeSet;
use tol::cli::compile_source;
use tol::frontend::{lex, parse, pretty_unit};
use tol::metamodel::Relation;
use tol::resolver::{self, expected_step_count};
use tol::span::FileId;

proptest! {
    // Single-inheritance trees with globally unique test names never
    // produce a conflict diagnostic.
    #[test]
    fn conflict_detection_is_sound_on_trees(
        count in 1usize..=10,
        data in proptest::collection::vec(any::<u32>(), 0..120),
    ) {
        let source = modelgen::build_tree_program(count, &data);
        let compiled = compile_source(&source)
            .map_err(|e| TestCaseError::fail(format!("bind failed: {e:?}\n{source}")))?;
        prop_assert!(
            compiled.conflicts.is_empty(),
            "unexpected conflicts in:\n{source}"
        );
    }

    // Along a parent edge, visible test classes and test properties only
    // grow.
    #[test]
    fn inheritance_is_monotone(
        count in 1usize..=10,
        data in proptest::collection::vec(any::<u32>(), 0..160),
    ) {
        let source = modelgen::build_program(count, &data);
        let compiled = compile_source(&source)
            .map_err(|e| TestCaseError::fail(format!("bind failed: {e:?}\n{source}")))?;
        let model = &compiled.model;
        for child in model.classes() {
            for &parent in &model.class(child).parents {
                let parent_gtc: BTreeSet<_> =
                    resolver::global_test_classes(model, parent).into_iter().collect();
                let child_gtc: BTreeSet<_> =
                    resolver::global_test_classes(model, child).into_iter().collect();
                prop_assert!(parent_gtc.is_subset(&child_gtc));
                for gp in resolver::visible_global_properties(model, parent) {
                    let parent_gtp: BTreeSet<_> =
                        resolver::global_test_properties(model, parent, gp)
                            .into_iter()
                            .collect();
                    let child_gtp: BTreeSet<_> =
                        resolver::global_test_properties(model, child, gp)
                            .into_iter()
                            .collect();
                    prop_assert!(parent_gtp.is_subset(&child_gtp));
                }
            }
        }
    }

    // The plan is a deterministic function of the source, and its length
    // matches the nested-loop census of the resolved sets.
    #[test]
    fn plan_is_deterministic_and_counted(
        count in 1usize..=10,
        data in proptest::collection::vec(any::<u32>(), 0..160),
    ) {
        let source = modelgen::build_program(count, &data);
        let first = compile_source(&source)
            .map_err(|e| TestCaseError::fail(format!("bind failed: {e:?}\n{source}")))?;
        let second = compile_source(&source).unwrap();
        prop_assert_eq!(&first.plan, &second.plan);
        prop_assert_eq!(
            first.plan.steps.len(),
            expected_step_count(&first.model, &first.sets)
        );
    }
}

#[test]
fn pretty_print_round_trips_on_the_fixture_corpus() {
    for path in all_fixture_files() {
        let source = std::fs::read_to_string(&path).unwrap();
        let tokens = lex(FileId(0), &source).unwrap();
        let unit = parse(&tokens).unwrap();
        let printed = pretty_unit(&unit);
        let tokens2 = lex(FileId(0), &printed).unwrap();
        let unit2 = parse(&tokens2).expect("pretty output parses");
        let printed2 = pretty_unit(&unit2);
        assert_eq!(printed, printed2, "round trip differs for {path:?}");
    }
}

#[test]
fn select_and_unify_do_not_disturb_other_classes() {
    let base = compile_source(&fixture_source("method_clash.tol")).unwrap();
    for fixture in ["method_clash_select.tol", "method_clash_unify.tol"] {
        let resolved = compile_source(&fixture_source(fixture)).unwrap();
        for name in ["A", "B", "C"] {
            let class = base.model.class_by_name(name).unwrap();
            let before = &base.sets.per_class[&class];
            let after = &resolved.sets.per_class[&class];
            assert_eq!(before.gtc_set, after.gtc_set, "{fixture}/{name}");
            assert_eq!(before.ltc_set, after.ltc_set, "{fixture}/{name}");
            assert_eq!(before.props.len(), after.props.len(), "{fixture}/{name}");
            for (b, a) in before.props.iter().zip(&after.props) {
                assert_eq!(b.global_property, a.global_property, "{fixture}/{name}");
                assert_eq!(b.local_props, a.local_props, "{fixture}/{name}");
                assert_eq!(b.gtp_set, a.gtp_set, "{fixture}/{name}");
                assert_eq!(b.ltp_per_gtp, a.ltp_per_gtp, "{fixture}/{name}");
            }
        }
    }
}

#[test]
fn belongs_is_total_and_functional_on_fixtures() {
    for path in all_fixture_files() {
        let source = std::fs::read_to_string(&path).unwrap();
        let Ok(compiled) = compile_source(&source) else {
            continue; // multi-file halves and error fixtures
        };
        let model = compiled.model;
        for (id, entry) in model.entities() {
            use tol::metamodel::EntityKind::*;
            if matches!(id.kind, LocalProperty | LocalTestProperty | LocalTestClass) {
                let targets = model.relations().targets(Relation::Belongs, id);
                assert_eq!(targets.len(), 1, "{entry:?} in {path:?}");
            }
        }
    }
}
