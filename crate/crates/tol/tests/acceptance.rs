//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`).

mod common;

use common::{all_fixture_files, fixture_path, fixture_source, modelgen, oracle, tol_binary};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;
use tol::binder::check_type_safety;
use tol::cli::compile_source;
use tol::conflicts::ConflictKind;
use tol::metamodel::Relation;
use tol::report::outcome_name;
use tol::resolver::{self, StepKind};
use tol::runtime::{run_all, TestStatus};

fn criterion<F>(number: u32, name: &str, run: F)
where
    F: FnOnce() + std::panic::UnwindSafe,
{
    let result = std::panic::catch_unwind(run);
    match &result {
        Ok(()) => println!("criterion {number} ({name}): PASS"),
        Err(_) => println!("criterion {number} ({name}): FAIL"),
    }
    if let Err(payload) = result {
        std::panic::resume_unwind(payload);
    }
}

#[test]
fn criterion_1_golden_trace() {
    criterion(1, "golden trace", || {
        let compiled = compile_source(&fixture_source("animals.tol")).unwrap();
        let started = Instant::now();
        let outcomes = run_all(&compiled.model, &compiled.plan);
        let elapsed = started.elapsed();

        let statuses: Vec<TestStatus> = outcomes.iter().map(|o| o.status).collect();
        assert_eq!(
            statuses,
            vec![
                TestStatus::Pass,
                TestStatus::Pass,
                TestStatus::Fail,
                TestStatus::Pass
            ]
        );
        let names: Vec<String> = outcomes
            .iter()
            .map(|o| outcome_name(&compiled.model, o))
            .collect();
        assert_eq!(
            names,
            vec![
                "Animal.TestNotNull",
                "Mouse.TestNotNull",
                "Cow.TestNotNull",
                "Cow.TestGrassColor"
            ]
        );

        let trace: Vec<String> = outcomes.iter().flat_map(|o| o.output.clone()).collect();
        let golden = std::fs::read_to_string(
            fixture_path("animals.tol")
                .parent()
                .unwrap()
                .parent()
                .unwrap()
                .join("golden/animals_trace.txt"),
        )
        .unwrap();
        let golden_lines: Vec<&str> = golden.lines().collect();
        assert_eq!(trace, golden_lines);
        // The failing execution prints the dispatch line but never the
        // test name line.
        assert!(!trace.contains(&"Cow.TestNotNull".to_string()));
        assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    });
}

#[test]
fn criterion_2_plan_shape() {
    criterion(2, "plan shape", || {
        let compiled = compile_source(&fixture_source("animals.tol")).unwrap();
        let property_steps: Vec<(String, String)> = compiled
            .plan
            .steps
            .iter()
            .filter(|s| s.kind == StepKind::PropertyTest)
            .map(|s| {
                let class = compiled
                    .model
                    .class(s.executing_class.unwrap())
                    .name
                    .clone();
                let test = compiled.model.test(s.test).name.clone();
                (class, test)
            })
            .collect();
        assert_eq!(compiled.plan.steps.len(), property_steps.len());
        assert_eq!(
            property_steps,
            vec![
                ("Animal".to_string(), "TestNotNull".to_string()),
                ("Mouse".to_string(), "TestNotNull".to_string()),
                ("Cow".to_string(), "TestNotNull".to_string()),
                ("Cow".to_string(), "TestGrassColor".to_string()),
            ]
        );
    });
}

#[test]
fn criterion_3_conflict_fixtures() {
    criterion(3, "conflict fixtures", || {
        let cases = [
            ("duplicate_test_name.tol", ConflictKind::DuplicateGtpName),
            (
                "method_clash.tol",
                ConflictKind::MethodClashMultipleInheritance,
            ),
            ("test_clash.tol", ConflictKind::LtpClashMultipleInheritance),
        ];
        for (fixture, kind) in cases {
            let compiled = compile_source(&fixture_source(fixture)).unwrap();
            assert_eq!(compiled.conflicts.len(), 1, "{fixture}");
            assert_eq!(compiled.conflicts[0].kind, kind, "{fixture}");
        }

        for fixture in [
            "method_clash_rename.tol",
            "method_clash_select.tol",
            "method_clash_unify.tol",
            "test_clash_rename.tol",
            "test_clash_select.tol",
            "test_clash_unify.tol",
        ] {
            let compiled = compile_source(&fixture_source(fixture)).unwrap();
            assert!(compiled.conflicts.is_empty(), "{fixture} still conflicted");
        }

        // Unification keeps both parents' test properties attached at D.add.
        let compiled = compile_source(&fixture_source("method_clash_unify.tol")).unwrap();
        let d = compiled.model.class_by_name("D").unwrap();
        let add_sets = compiled.sets.per_class[&d]
            .props
            .iter()
            .find(|p| compiled.model.global_property(p.global_property).name == "add")
            .unwrap();
        let names: BTreeSet<String> = add_sets
            .gtp_set
            .iter()
            .map(|g| compiled.model.global_test(g.id()).name.clone())
            .collect();
        assert_eq!(
            names,
            BTreeSet::from(["TestAddB".to_string(), "TestAddC".to_string()])
        );
    });
}

fn assert_sets_match_oracle(model: &tol::metamodel::SealedModel) -> Result<(), String> {
    for class in model.classes() {
        for gp in model.global_properties() {
            let locals: BTreeSet<_> = resolver::local_properties_of(model, class, gp)
                .into_iter()
                .collect();
            if locals != oracle::eq_local_properties(model, class, gp) {
                return Err(format!("local properties differ at {class:?} {gp:?}"));
            }
            let gtps: BTreeSet<_> = resolver::global_test_properties(model, class, gp)
                .into_iter()
                .collect();
            if gtps != oracle::eq_global_test_properties(model, class, gp) {
                return Err(format!("test property sets differ at {class:?} {gp:?}"));
            }
            let igtps: BTreeSet<_> = resolver::introduced_global_test_properties(model, class, gp)
                .into_iter()
                .collect();
            if igtps != oracle::eq_introduced_gtps(model, class, gp) {
                return Err(format!("introduced sets differ at {class:?} {gp:?}"));
            }
            if !igtps.is_subset(&gtps) {
                return Err(format!("introduced set not a subset at {class:?} {gp:?}"));
            }
            for gtp in gtps {
                let ltps: BTreeSet<_> = resolver::local_tests_of_global_test(model, class, gtp)
                    .into_iter()
                    .collect();
                if ltps != oracle::eq_ltp_effective(model, class, gtp) {
                    return Err(format!("effective test sets differ at {class:?} {gtp:?}"));
                }
            }
        }
        let gtcs: BTreeSet<_> = resolver::global_test_classes(model, class)
            .into_iter()
            .collect();
        if gtcs != oracle::eq_global_test_classes(model, class) {
            return Err(format!("class test sets differ at {class:?}"));
        }
        let ltcs: BTreeSet<_> = resolver::local_test_classes(model, class)
            .into_iter()
            .collect();
        if ltcs != oracle::eq_ltc_effective(model, class) {
            return Err(format!("effective class test sets differ at {class:?}"));
        }
    }
    Ok(())
}

fn assert_no_redef_pairs(model: &tol::metamodel::SealedModel) -> Result<(), String> {
    let redef: Vec<_> = model.relations().pairs(Relation::Redef).collect();
    for class in model.classes() {
        for gp in model.global_properties() {
            for gtp in resolver::global_test_properties(model, class, gp) {
                let set = resolver::local_tests_of_global_test(model, class, gtp);
                for t1 in &set {
                    for t2 in &set {
                        if redef.contains(&(t2.id(), t1.id())) {
                            return Err(format!("redef pair survives in {class:?} {gtp:?}"));
                        }
                    }
                }
            }
        }
        let set = resolver::local_test_classes(model, class);
        for t1 in &set {
            for t2 in &set {
                if redef.contains(&(t2.id(), t1.id())) {
                    return Err(format!("redef pair survives in class tests of {class:?}"));
                }
            }
        }
    }
    Ok(())
}

#[test]
fn criterion_4_and_5_oracle_equivalence() {
    // One generation pass feeds both criteria: every generated model is
    // compared against the oracle and checked for surviving redef pairs.
    let started = Instant::now();
    let cases = 512;
    let oracle_failure = std::cell::RefCell::new(None::<String>);
    let redef_failure = std::cell::RefCell::new(None::<String>);
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (1usize..=10, proptest::collection::vec(any::<u32>(), 0..160));
    let run = runner.run(&strategy, |(count, data)| {
        let source = modelgen::build_program(count, &data);
        let compiled = compile_source(&source)
            .map_err(|e| TestCaseError::fail(format!("bind failed: {e:?}\n{source}")))?;
        if let Err(e) = assert_sets_match_oracle(&compiled.model) {
            *oracle_failure.borrow_mut() = Some(format!("{e}\n{source}"));
            return Err(TestCaseError::fail(e));
        }
        if let Err(e) = assert_no_redef_pairs(&compiled.model) {
            *redef_failure.borrow_mut() = Some(format!("{e}\n{source}"));
            return Err(TestCaseError::fail(e));
        }
        Ok(())
    });
    let elapsed = started.elapsed();
    let harness_failure = run.err().map(|e| e.to_string());
    let oracle_failure = oracle_failure.into_inner().or(harness_failure);
    let redef_failure = redef_failure.into_inner();

    criterion(4, "oracle equivalence", move || {
        if let Some(failure) = &oracle_failure {
            panic!("oracle mismatch: {failure}");
        }
        assert!(elapsed.as_secs() < 60, "took {elapsed:?} for {cases} cases");
    });
    criterion(5, "redefinition filtering", move || {
        if let Some(failure) = &redef_failure {
            panic!("redef pair survived: {failure}");
        }
    });
}

#[test]
fn criterion_6_type_safety() {
    criterion(6, "type safety", || {
        let ok = compile_source(&fixture_source("covariant_ok.tol")).unwrap();
        assert!(check_type_safety(&ok.model).is_empty());

        let bad_return = compile_source(&fixture_source("covariant_bad.tol")).unwrap();
        let diags = check_type_safety(&bad_return.model);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "CovarianceViolation");

        let bad_param = compile_source(&fixture_source("contravariant_bad.tol")).unwrap();
        let diags = check_type_safety(&bad_param.model);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "ContravarianceViolation");
    });
}

fn run_tol(args: &[&str]) -> (Vec<u8>, Vec<u8>, Option<i32>) {
    let output = Command::new(tol_binary())
        .args(args)
        .env("TOL_NO_COLOR", "1")
        .output()
        .expect("tol binary runs");
    (output.stdout, output.stderr, output.status.code())
}

#[test]
fn criterion_7_determinism() {
    criterion(7, "determinism", || {
        for fixture in all_fixture_files() {
            let path = fixture.to_str().unwrap();
            let first = run_tol(&["model", path, "--json"]);
            let second = run_tol(&["model", path, "--json"]);
            assert_eq!(first, second, "model dump differs for {path}");

            let first = run_tol(&["test", path]);
            let second = run_tol(&["test", path]);
            assert_eq!(first, second, "test report differs for {path}");
        }
    });
}

#[test]
fn criterion_8_exit_codes() {
    criterion(8, "exit codes", || {
        let all_pass = fixture_path("all_pass.tol");
        let (_, _, code) = run_tol(&["test", all_pass.to_str().unwrap()]);
        assert_eq!(code, Some(0));

        let animals = fixture_path("animals.tol");
        let (_, _, code) = run_tol(&["test", animals.to_str().unwrap()]);
        assert_eq!(code, Some(1));

        for fixture in [
            "duplicate_test_name.tol",
            "method_clash.tol",
            "test_clash.tol",
        ] {
            let path = fixture_path(fixture);
            let (_, stderr, code) = run_tol(&["check", path.to_str().unwrap()]);
            assert_eq!(code, Some(2), "{fixture}");
            assert!(!stderr.is_empty(), "{fixture} printed no diagnostics");
            let (_, _, code) = run_tol(&["test", path.to_str().unwrap()]);
            assert_eq!(code, Some(2), "{fixture}");
        }
    });
}
