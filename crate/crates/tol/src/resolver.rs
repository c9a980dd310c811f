//! Resolution of inherited test sets and the execution plan.
//!
//! For every class this module computes which global test properties and
//! test classes apply to it, and which concrete local test bodies run,
//! with redefined versions removed. The plan orders executions as: per
//! package, first the package tests, then per class (declaration order)
//! the class tests, then per visible global property the property tests.

use crate::metamodel::{
    ClassId, EntityId, EntityKind, GlobalPropId, GtcId, GtpId, LocalPropId, LtcId, LtpId,
    PackageId, Relation, SealedModel, TestLevel,
};
use std::collections::{BTreeMap, BTreeSet};

/// Per-class, per-property resolved test sets. Computed once and reused;
/// the plan builder never recomputes a set.
#[derive(Clone, Debug, Default)]
pub struct ResolvedTestSets {
    pub per_class: BTreeMap<ClassId, ClassSets>,
}

#[derive(Clone, Debug, Default)]
pub struct ClassSets {
    /// Global test classes visible in the class's hierarchy.
    pub gtc_set: Vec<GtcId>,
    /// Effective local class tests, redefinitions removed, in execution order.
    pub ltc_set: Vec<LtcId>,
    /// One entry per visible global property, in the order the plan
    /// iterates them.
    pub props: Vec<PropSets>,
}

#[derive(Clone, Debug)]
pub struct PropSets {
    pub global_property: GlobalPropId,
    /// Local definitions of the property across the hierarchy.
    pub local_props: Vec<LocalPropId>,
    /// Global test properties attached to any of those locals.
    pub gtp_set: Vec<GtpId>,
    /// The subset of `gtp_set` introduced inside the hierarchy.
    pub introduced_gtp_set: Vec<GtpId>,
    /// Effective local test bodies per global test property.
    pub ltp_per_gtp: Vec<(GtpId, Vec<LtpId>)>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StepKind {
    PackageTest,
    ClassTest,
    PropertyTest,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PlanStep {
    pub kind: StepKind,
    /// Class the test executes against; absent for package tests.
    pub executing_class: Option<ClassId>,
    /// The local test or package test entity whose body runs.
    pub test: EntityId,
    /// Global property under test; present for property tests only.
    pub target_property: Option<GlobalPropId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExecutionPlan {
    pub steps: Vec<PlanStep>,
}

/// Local entities masked out of `c`'s view by an applied select resolution
/// at `c` or one of its ancestors.
fn masked_at(model: &SealedModel, c: ClassId) -> BTreeSet<EntityId> {
    model
        .applied_resolutions()
        .iter()
        .filter(|r| model.is_ancestor_or_self(r.site, c))
        .flat_map(|r| r.masked.iter().copied())
        .collect()
}

/// Execution order for local test sets: deepest defining class first,
/// then class declaration order, then declaration order inside the class.
fn test_order_key(model: &SealedModel, test: EntityId) -> (i64, u32, u32) {
    let entry = model.test(test);
    let owner = ClassId::from_id(entry.owner).expect("local test owned by a class");
    (
        -(model.depth(owner) as i64),
        model.class(owner).declaration_index,
        entry.declaration_index,
    )
}

/// All local definitions of global property `g` visible from `c`: the
/// union over `c` and its superclasses of their locals belonging to `g`.
pub fn local_properties_of(model: &SealedModel, c: ClassId, g: GlobalPropId) -> Vec<LocalPropId> {
    let masked = masked_at(model, c);
    let mut out: Vec<LocalPropId> = Vec::new();
    for d in model.ancestors_or_self(c) {
        for l in model.own_local_properties(d) {
            if masked.contains(&l.id()) {
                continue;
            }
            if model
                .relations()
                .contains(Relation::Belongs, l.id(), g.id())
            {
                out.push(l);
            }
        }
    }
    out.sort();
    out
}

/// Global test properties attached to any visible local of `g`.
pub fn global_test_properties(model: &SealedModel, c: ClassId, g: GlobalPropId) -> Vec<GtpId> {
    let mut out: BTreeSet<GtpId> = BTreeSet::new();
    for l in local_properties_of(model, c, g) {
        for gtp in model.relations().targets(Relation::Has, l.id()) {
            out.insert(GtpId::from_id(gtp).unwrap());
        }
    }
    out.into_iter().collect()
}

/// The subset of `global_test_properties` whose introducing class lies in
/// `c`'s hierarchy.
pub fn introduced_global_test_properties(
    model: &SealedModel,
    c: ClassId,
    g: GlobalPropId,
) -> Vec<GtpId> {
    let hierarchy: BTreeSet<ClassId> = model.ancestors_or_self(c).into_iter().collect();
    global_test_properties(model, c, g)
        .into_iter()
        .filter(|gtp| {
            model
                .relations()
                .sources(Relation::Intro, gtp.id())
                .iter()
                .any(|d| {
                    ClassId::from_id(*d)
                        .map(|d| hierarchy.contains(&d))
                        .unwrap_or(false)
                })
        })
        .collect()
}

/// Effective local tests of global test property `gt` as seen from `c`:
/// every local test in the hierarchy belonging to `gt`, minus those
/// redefined by another member of the same set, minus masked entries.
pub fn local_tests_of_global_test(model: &SealedModel, c: ClassId, gt: GtpId) -> Vec<LtpId> {
    let masked = masked_at(model, c);
    let mut candidates: Vec<EntityId> = Vec::new();
    for d in model.ancestors_or_self(c) {
        for t in model.own_tests(d, TestLevel::Property) {
            if masked.contains(&t) {
                continue;
            }
            if model.relations().contains(Relation::Belongs, t, gt.id()) {
                candidates.push(t);
            }
        }
    }
    let effective = remove_redefined(model, candidates);
    ordered_tests(model, effective)
        .into_iter()
        .map(|t| LtpId::from_id(t).unwrap())
        .collect()
}

/// Global test classes introduced anywhere in `c`'s hierarchy.
pub fn global_test_classes(model: &SealedModel, c: ClassId) -> Vec<GtcId> {
    let mut out: BTreeSet<GtcId> = BTreeSet::new();
    for d in model.ancestors_or_self(c) {
        for t in model.relations().targets(Relation::Intro, d.id()) {
            if t.kind == EntityKind::GlobalTestClass {
                out.insert(GtcId::from_id(t).unwrap());
            }
        }
    }
    out.into_iter().collect()
}

/// Effective local class tests of `c`, redefinitions removed.
pub fn local_test_classes(model: &SealedModel, c: ClassId) -> Vec<LtcId> {
    let masked = masked_at(model, c);
    let gtcs: BTreeSet<GtcId> = global_test_classes(model, c).into_iter().collect();
    let mut candidates: Vec<EntityId> = Vec::new();
    for d in model.ancestors_or_self(c) {
        for t in model.own_tests(d, TestLevel::Class) {
            if masked.contains(&t) {
                continue;
            }
            let belongs_to_visible =
                model
                    .relations()
                    .targets(Relation::Belongs, t)
                    .iter()
                    .any(|g| {
                        GtcId::from_id(*g)
                            .map(|g| gtcs.contains(&g))
                            .unwrap_or(false)
                    });
            if belongs_to_visible {
                candidates.push(t);
            }
        }
    }
    let effective = remove_redefined(model, candidates);
    ordered_tests(model, effective)
        .into_iter()
        .map(|t| LtcId::from_id(t).unwrap())
        .collect()
}

/// Drops every member that some other member of the set redefines.
fn remove_redefined(model: &SealedModel, candidates: Vec<EntityId>) -> Vec<EntityId> {
    let set: BTreeSet<EntityId> = candidates.iter().copied().collect();
    candidates
        .into_iter()
        .filter(|t1| {
            !set.iter()
                .any(|t2| model.relations().contains(Relation::Redef, *t2, *t1))
        })
        .collect()
}

fn ordered_tests(model: &SealedModel, mut tests: Vec<EntityId>) -> Vec<EntityId> {
    tests.sort();
    tests.dedup();
    tests.sort_by_key(|t| test_order_key(model, *t));
    tests
}

/// Global properties visible from `c`, in the order the plan iterates
/// them (introduction order along the hierarchy).
pub fn visible_global_properties(model: &SealedModel, c: ClassId) -> Vec<GlobalPropId> {
    model
        .relations()
        .targets(Relation::Has, c.id())
        .into_iter()
        .filter_map(|g| GlobalPropId::from_id(g).ok())
        .collect()
}

/// Computes the full per-class resolution in one pass.
pub fn resolve_sets(model: &SealedModel) -> ResolvedTestSets {
    let mut per_class = BTreeMap::new();
    for c in model.classes() {
        let mut props = Vec::new();
        for g in visible_global_properties(model, c) {
            let gtp_set = global_test_properties(model, c, g);
            let ltp_per_gtp = gtp_set
                .iter()
                .map(|gtp| (*gtp, local_tests_of_global_test(model, c, *gtp)))
                .collect();
            props.push(PropSets {
                global_property: g,
                local_props: local_properties_of(model, c, g),
                gtp_set: gtp_set.clone(),
                introduced_gtp_set: introduced_global_test_properties(model, c, g),
                ltp_per_gtp,
            });
        }
        per_class.insert(
            c,
            ClassSets {
                gtc_set: global_test_classes(model, c),
                ltc_set: local_test_classes(model, c),
                props,
            },
        );
    }
    ResolvedTestSets { per_class }
}

/// Assembles the ordered execution plan from the resolved sets.
pub fn build_plan(model: &SealedModel, sets: &ResolvedTestSets) -> ExecutionPlan {
    let mut steps = Vec::new();
    let mut packages = model.packages();
    packages.sort_by_key(|p| model.package(*p).declaration_index);
    for p in packages {
        for tp in package_tests(model, p) {
            steps.push(PlanStep {
                kind: StepKind::PackageTest,
                executing_class: None,
                test: tp,
                target_property: None,
            });
        }
        let mut classes: Vec<ClassId> = model
            .relations()
            .targets(Relation::Has, p.id())
            .into_iter()
            .filter_map(|c| ClassId::from_id(c).ok())
            .collect();
        classes.sort_by_key(|c| model.class(*c).declaration_index);
        for c in classes {
            let class_sets = &sets.per_class[&c];
            for ltc in &class_sets.ltc_set {
                steps.push(PlanStep {
                    kind: StepKind::ClassTest,
                    executing_class: Some(c),
                    test: ltc.id(),
                    target_property: None,
                });
            }
            for prop in &class_sets.props {
                for (gtp, ltps) in &prop.ltp_per_gtp {
                    let _ = gtp;
                    for ltp in ltps {
                        steps.push(PlanStep {
                            kind: StepKind::PropertyTest,
                            executing_class: Some(c),
                            test: ltp.id(),
                            target_property: Some(prop.global_property),
                        });
                    }
                }
            }
        }
    }
    ExecutionPlan { steps }
}

fn package_tests(model: &SealedModel, p: PackageId) -> Vec<EntityId> {
    let mut tests: Vec<EntityId> = model
        .relations()
        .targets(Relation::Has, p.id())
        .into_iter()
        .filter(|t| t.kind == EntityKind::TestPackage)
        .collect();
    tests.sort_by_key(|t| model.test(*t).declaration_index);
    tests
}

/// Total number of executions Algorithm-style nesting implies; used by
/// the property tests to cross-check plan assembly.
pub fn expected_step_count(model: &SealedModel, sets: &ResolvedTestSets) -> usize {
    let package_test_count = model
        .entities()
        .filter(|(id, _)| id.kind == EntityKind::TestPackage)
        .count();
    let class_test_count: usize = sets.per_class.values().map(|s| s.ltc_set.len()).sum();
    let property_test_count: usize = sets
        .per_class
        .values()
        .map(|s| {
            s.props
                .iter()
                .map(|p| p.ltp_per_gtp.iter().map(|(_, l)| l.len()).sum::<usize>())
                .sum::<usize>()
        })
        .sum();
    package_test_count + class_test_count + property_test_count
}
