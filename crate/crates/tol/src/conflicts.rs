//! Detection of inheritance-induced test conflicts and the three
//! source-declared resolution strategies: rename, select, unify.
//!
//! Three shapes are diagnosed: two same-named global test properties
//! meeting inside one property's test set; a class joining two unrelated
//! redefinitions of the same method; and a class joining two sibling
//! redefinitions of the same local test. Conflicts are data here; the CLI
//! turns any unresolved one into a compile error.

use crate::metamodel::{
    ClassId, EntityId, Entry, GlobalPropId, GlobalPropertyEntry, GlobalTestEntry, LocalPropId,
    Relation, Role, SealedModel,
};
use crate::resolver::{self, ResolvedTestSets};
use crate::span::Span;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum ConflictKind {
    DuplicateGtpName,
    MethodClashMultipleInheritance,
    LtpClashMultipleInheritance,
}

impl ConflictKind {
    pub fn name(self) -> &'static str {
        match self {
            ConflictKind::DuplicateGtpName => "DuplicateGtpName",
            ConflictKind::MethodClashMultipleInheritance => "MethodClashMultipleInheritance",
            ConflictKind::LtpClashMultipleInheritance => "LtpClashMultipleInheritance",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConflictDiagnostic {
    pub kind: ConflictKind,
    pub site: ClassId,
    pub subject: String,
    /// At least two clashing entities.
    pub candidates: Vec<EntityId>,
    /// Human-readable suggestions, numbered in render order.
    pub remedies: Vec<String>,
}

impl ConflictDiagnostic {
    /// Fixed single-line rendering used on stderr and in golden files.
    pub fn render(&self, model: &SealedModel) -> String {
        let candidates: Vec<String> = self
            .candidates
            .iter()
            .map(|c| model.display_name(*c))
            .collect();
        let remedies: Vec<String> = self
            .remedies
            .iter()
            .enumerate()
            .map(|(i, r)| format!("{}) {}", i + 1, r))
            .collect();
        format!(
            "conflict[{}] at {}: '{}' candidates: {} — remedies: {}",
            self.kind.name(),
            model.class(self.site).name,
            self.subject,
            candidates.join(", "),
            remedies.join(" ")
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Strategy {
    Rename,
    Select,
    Unify,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Rename => "rename",
            Strategy::Select => "select",
            Strategy::Unify => "unify",
        }
    }
}

/// One branch of a rename resolution: `Owner.old as new`.
#[derive(Clone, Debug)]
pub struct RenameArm {
    pub owner: ClassId,
    pub old: String,
    pub new: String,
}

#[derive(Clone, Debug)]
pub enum ResolutionArgs {
    Rename(Vec<RenameArm>),
    Select { owner: ClassId, name: String },
    Unify,
}

/// A resolution declared in source inside the conflicted class.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub site: ClassId,
    pub subject: String,
    pub args: ResolutionArgs,
    pub span: Span,
}

impl Resolution {
    pub fn strategy(&self) -> Strategy {
        match self.args {
            ResolutionArgs::Rename(_) => Strategy::Rename,
            ResolutionArgs::Select { .. } => Strategy::Select,
            ResolutionArgs::Unify => Strategy::Unify,
        }
    }
}

/// The record left on the model after a resolution is applied. The
/// resolver consults `masked` when computing sets for the site and its
/// descendants; the runtime consults `selected` for dispatch.
#[derive(Clone, Debug)]
pub struct AppliedResolution {
    pub site: ClassId,
    pub subject: String,
    pub strategy: Strategy,
    pub masked: Vec<EntityId>,
    pub selected: Option<EntityId>,
}

#[derive(Debug, Error)]
pub enum ResolutionError {
    #[error("resolution at {site} for '{subject}' matches no detected conflict")]
    UnmatchedResolution { site: String, subject: String },
    #[error("invalid selection at {site} for '{subject}': {detail}")]
    InvalidSelection {
        site: String,
        subject: String,
        detail: String,
    },
}

/// Reports every unresolved conflict, deterministically ordered.
pub fn detect_conflicts(model: &SealedModel, sets: &ResolvedTestSets) -> Vec<ConflictDiagnostic> {
    detect(model, sets, true)
}

fn detect(
    model: &SealedModel,
    sets: &ResolvedTestSets,
    honor_resolutions: bool,
) -> Vec<ConflictDiagnostic> {
    let mut out = Vec::new();
    out.extend(duplicate_gtp_names(model, sets));
    out.extend(multi_inheritance_clashes(model, sets, honor_resolutions));
    out.sort_by_key(|d| {
        (
            model.class(d.site).declaration_index,
            d.kind,
            d.subject.clone(),
        )
    });
    out
}

fn is_resolved_at(model: &SealedModel, site: ClassId, subject: &str) -> bool {
    model
        .applied_resolutions()
        .iter()
        .any(|r| r.subject == subject && model.is_ancestor_or_self(r.site, site))
}

/// Two distinct global test properties with one name inside one property's
/// test set. Reported once per candidate group, at the shallowest class
/// whose set exhibits it.
fn duplicate_gtp_names(model: &SealedModel, sets: &ResolvedTestSets) -> Vec<ConflictDiagnostic> {
    let mut grouped: BTreeMap<(String, Vec<EntityId>), (ClassId, GlobalPropId)> = BTreeMap::new();
    for (class, class_sets) in &sets.per_class {
        for prop in &class_sets.props {
            let mut by_name: BTreeMap<&str, Vec<EntityId>> = BTreeMap::new();
            for gtp in &prop.gtp_set {
                by_name
                    .entry(model.global_test(gtp.id()).name.as_str())
                    .or_default()
                    .push(gtp.id());
            }
            for (name, ids) in by_name {
                if ids.len() < 2 {
                    continue;
                }
                let key = (name.to_string(), ids.clone());
                let entry = grouped.entry(key).or_insert((*class, prop.global_property));
                if model.class(*class).declaration_index < model.class(entry.0).declaration_index {
                    *entry = (*class, prop.global_property);
                }
            }
        }
    }
    grouped
        .into_iter()
        .map(|((subject, candidates), (site, gp))| {
            let remedies = duplicate_remedies(model, &subject, &candidates, gp);
            ConflictDiagnostic {
                kind: ConflictKind::DuplicateGtpName,
                site,
                subject,
                candidates,
                remedies,
            }
        })
        .collect()
}

fn duplicate_remedies(
    model: &SealedModel,
    subject: &str,
    candidates: &[EntityId],
    gp: GlobalPropId,
) -> Vec<String> {
    let introducers: Vec<String> = candidates
        .iter()
        .map(|c| model.class(model.global_test(*c).introducer).name.clone())
        .collect();
    let names: Vec<String> = candidates.iter().map(|c| model.display_name(*c)).collect();
    // The class whose local property carries the clashing attachments.
    let attach_owner = candidates
        .first()
        .and_then(|c| {
            model
                .relations()
                .sources(Relation::Has, *c)
                .first()
                .copied()
        })
        .and_then(|l| LocalPropId::from_id(l).ok())
        .map(|l| model.class(model.local_property(l).owner).name.clone())
        .unwrap_or_else(|| "the superclass".to_string());
    let gp_name = model.global_property(gp).name.clone();
    vec![
        format!(
            "factorize {} into superclass {} if their bodies agree",
            names.join(" and "),
            attach_owner
        ),
        format!(
            "redefine '{}' in {} so each test attaches to its own local property",
            gp_name,
            introducers.join(" and ")
        ),
        format!(
            "move '{}' into {} and redefine its local test in {}",
            subject,
            attach_owner,
            introducers.join(" and ")
        ),
    ]
}

/// Clashes that appear where multiple inheritance joins branches: two
/// surviving local properties of one global property, or two surviving
/// local tests of one global test property.
fn multi_inheritance_clashes(
    model: &SealedModel,
    sets: &ResolvedTestSets,
    honor_resolutions: bool,
) -> Vec<ConflictDiagnostic> {
    let mut per_class: BTreeMap<ClassId, Vec<ConflictDiagnostic>> = BTreeMap::new();
    for (class, class_sets) in &sets.per_class {
        if model.class(*class).parents.len() < 2 {
            continue;
        }
        let mut found = Vec::new();
        for prop in &class_sets.props {
            let effective = effective_locals(model, &prop.local_props);
            if effective.len() >= 2 {
                let subject = model.global_property(prop.global_property).name.clone();
                if !(honor_resolutions && is_resolved_at(model, *class, &subject)) {
                    let candidates: Vec<EntityId> = effective.iter().map(|l| l.id()).collect();
                    let remedies =
                        strategy_remedies(model, *class, &subject, &candidates, "method");
                    found.push(ConflictDiagnostic {
                        kind: ConflictKind::MethodClashMultipleInheritance,
                        site: *class,
                        subject,
                        candidates,
                        remedies,
                    });
                }
            }
            for (gtp, ltps) in &prop.ltp_per_gtp {
                if ltps.len() >= 2 {
                    let subject = model.global_test(gtp.id()).name.clone();
                    if honor_resolutions && is_resolved_at(model, *class, &subject) {
                        continue;
                    }
                    let candidates: Vec<EntityId> = ltps.iter().map(|l| l.id()).collect();
                    let remedies =
                        strategy_remedies(model, *class, &subject, &candidates, "local test");
                    found.push(ConflictDiagnostic {
                        kind: ConflictKind::LtpClashMultipleInheritance,
                        site: *class,
                        subject,
                        candidates,
                        remedies,
                    });
                }
            }
        }
        per_class.insert(*class, found);
    }

    // Keep each clash only at the class where the branches first join:
    // a subclass repeating its parent's candidate set adds no information.
    let mut out = Vec::new();
    for (class, diags) in &per_class {
        for d in diags {
            let repeated = model.class(*class).parents.iter().any(|p| {
                per_class.get(p).is_some_and(|pd| {
                    pd.iter()
                        .any(|x| x.subject == d.subject && x.candidates == d.candidates)
                })
            });
            if !repeated {
                out.push(d.clone());
            }
        }
    }
    out
}

/// Removes locals that another local of the same set redefines.
fn effective_locals(model: &SealedModel, locals: &[LocalPropId]) -> Vec<LocalPropId> {
    locals
        .iter()
        .filter(|l1| {
            !locals.iter().any(|l2| {
                model
                    .relations()
                    .contains(Relation::Redef, l2.id(), l1.id())
            })
        })
        .copied()
        .collect()
}

fn strategy_remedies(
    model: &SealedModel,
    site: ClassId,
    subject: &str,
    candidates: &[EntityId],
    what: &str,
) -> Vec<String> {
    let site_name = &model.class(site).name;
    let arms: Vec<String> = candidates
        .iter()
        .map(|c| {
            let owner = owner_class_name(model, *c);
            format!("{owner}.{subject} as {subject}{owner}")
        })
        .collect();
    let first_owner = owner_class_name(model, candidates[0]);
    vec![
        format!(
            "rename the clashing {what} per branch (resolve {subject} rename {};)",
            arms.join(", ")
        ),
        format!("select one parent's version (resolve {subject} select {first_owner}.{subject};)"),
        format!(
            "unify: keep every parent's tests attached at {site_name} (resolve {subject} unify;)"
        ),
    ]
}

fn owner_class_name(model: &SealedModel, id: EntityId) -> String {
    match model.entity(id) {
        Entry::LocalProperty(p) => model.class(p.owner).name.clone(),
        Entry::Test(t) => ClassId::from_id(t.owner)
            .map(|c| model.class(c).name.clone())
            .unwrap_or_default(),
        _ => String::new(),
    }
}

/// Applies source-declared resolutions. Every resolution must match a
/// conflict detected at its site; select must choose one of the clash
/// candidates; rename must cover all candidates or all but one.
pub fn apply_resolutions(
    model: &SealedModel,
    resolutions: &[Resolution],
) -> Result<SealedModel, ResolutionError> {
    let sets = resolver::resolve_sets(model);
    let raw = detect(model, &sets, false);
    let mut applied = Vec::new();
    let mut renames: Vec<(EntityId, ClassId, String)> = Vec::new();

    for resolution in resolutions {
        let site_name = model.class(resolution.site).name.clone();
        let conflict = raw
            .iter()
            .filter(|c| c.kind != ConflictKind::DuplicateGtpName)
            .find(|c| c.site == resolution.site && c.subject == resolution.subject)
            .ok_or_else(|| ResolutionError::UnmatchedResolution {
                site: site_name.clone(),
                subject: resolution.subject.clone(),
            })?;

        match &resolution.args {
            ResolutionArgs::Unify => applied.push(AppliedResolution {
                site: resolution.site,
                subject: resolution.subject.clone(),
                strategy: Strategy::Unify,
                masked: Vec::new(),
                selected: None,
            }),
            ResolutionArgs::Select { owner, name } => {
                if *name != resolution.subject {
                    return Err(ResolutionError::InvalidSelection {
                        site: site_name,
                        subject: resolution.subject.clone(),
                        detail: format!("selection names '{name}', not the conflicted entity"),
                    });
                }
                let chosen = conflict
                    .candidates
                    .iter()
                    .find(|c| candidate_owner(model, **c) == Some(*owner))
                    .copied()
                    .ok_or_else(|| ResolutionError::InvalidSelection {
                        site: site_name.clone(),
                        subject: resolution.subject.clone(),
                        detail: format!(
                            "'{}' is not a clashing parent branch",
                            model.class(*owner).name
                        ),
                    })?;
                let masked = conflict
                    .candidates
                    .iter()
                    .filter(|c| **c != chosen)
                    .copied()
                    .collect();
                applied.push(AppliedResolution {
                    site: resolution.site,
                    subject: resolution.subject.clone(),
                    strategy: Strategy::Select,
                    masked,
                    selected: Some(chosen),
                });
            }
            ResolutionArgs::Rename(arms) => {
                let mut covered = BTreeSet::new();
                for arm in arms {
                    if arm.old != resolution.subject {
                        return Err(ResolutionError::InvalidSelection {
                            site: site_name,
                            subject: resolution.subject.clone(),
                            detail: format!(
                                "rename arm names '{}', not the conflicted entity",
                                arm.old
                            ),
                        });
                    }
                    let candidate = conflict
                        .candidates
                        .iter()
                        .find(|c| candidate_owner(model, **c) == Some(arm.owner))
                        .copied()
                        .ok_or_else(|| ResolutionError::InvalidSelection {
                            site: site_name.clone(),
                            subject: resolution.subject.clone(),
                            detail: format!(
                                "'{}' is not a clashing parent branch",
                                model.class(arm.owner).name
                            ),
                        })?;
                    covered.insert(candidate);
                    renames.push((candidate, arm.owner, arm.new.clone()));
                }
                if conflict.candidates.len() - covered.len() > 1 {
                    return Err(ResolutionError::InvalidSelection {
                        site: site_name,
                        subject: resolution.subject.clone(),
                        detail: "rename must cover all clashing branches or all but one"
                            .to_string(),
                    });
                }
                applied.push(AppliedResolution {
                    site: resolution.site,
                    subject: resolution.subject.clone(),
                    strategy: Strategy::Rename,
                    masked: Vec::new(),
                    selected: None,
                });
            }
        }
    }

    if renames.is_empty() {
        return Ok(model.clone().with_applied_resolutions(applied));
    }

    let rewritten = perform_renames(model, &renames);
    Ok(rewritten.with_applied_resolutions(applied))
}

fn candidate_owner(model: &SealedModel, id: EntityId) -> Option<ClassId> {
    match model.entity(id) {
        Entry::LocalProperty(p) => Some(p.owner),
        Entry::Test(t) => ClassId::from_id(t.owner).ok(),
        _ => None,
    }
}

/// Rewrites renamed entities into fresh global families: the local (or
/// local test) takes the new name, joins a new global entity introduced by
/// its owner, and sheds its redef edges. Test attachments follow the
/// renamed branch, and the per-class property visibility edges are rebuilt
/// to cover the new families.
fn perform_renames(model: &SealedModel, renames: &[(EntityId, ClassId, String)]) -> SealedModel {
    let mut builder = model.to_builder();
    for (id, owner, new_name) in renames {
        match model.entity(*id) {
            Entry::LocalProperty(old) => {
                let role = old.role;
                let old_gp = old.global;
                let new_gp = builder
                    .add_entity(crate::metamodel::Entry::GlobalProperty(
                        GlobalPropertyEntry {
                            name: new_name.clone(),
                            role,
                            introducer: *owner,
                        },
                    ))
                    .expect("fresh renamed property family");
                if let Some(Entry::LocalProperty(p)) = builder.entity_mut(*id) {
                    p.name = new_name.clone();
                    p.global = GlobalPropId::from_id(new_gp).unwrap();
                }
                builder.unrelate(Relation::Belongs, *id, old_gp.id());
                builder.relate(Relation::Belongs, *id, new_gp).unwrap();
                builder.relate(Relation::Intro, owner.id(), new_gp).unwrap();
                drop_redef_edges(&mut builder, *id);
                // Property tests attached to the moved local now exercise
                // the new family.
                retarget_attached_tests(model, &mut builder, *id, new_gp);
            }
            Entry::Test(old) => {
                let old_gtp = old.global.expect("property test has a global test");
                let target_gp = GlobalPropId::from_id(old.target).expect("property test target");
                let new_gtp = builder
                    .add_entity(crate::metamodel::Entry::GlobalTestProperty(
                        GlobalTestEntry {
                            name: new_name.clone(),
                            introducer: *owner,
                        },
                    ))
                    .expect("fresh renamed test family");
                if let Some(Entry::Test(t)) = builder.entity_mut(*id) {
                    t.name = new_name.clone();
                    t.global = Some(new_gtp);
                }
                builder.unrelate(Relation::Belongs, *id, old_gtp);
                builder.relate(Relation::Belongs, *id, new_gtp).unwrap();
                builder
                    .relate(Relation::Intro, owner.id(), new_gtp)
                    .unwrap();
                if let Some(near) = nearest_local(model, *owner, target_gp) {
                    builder.relate(Relation::Has, near.id(), new_gtp).unwrap();
                }
                drop_redef_edges(&mut builder, *id);
            }
            _ => {}
        }
    }
    rebuild_property_visibility(&mut builder);
    builder.seal().expect("rename preserves model validity")
}

/// Points property tests whose global test attaches to `local` at the
/// local's new family.
fn retarget_attached_tests(
    model: &SealedModel,
    builder: &mut crate::metamodel::Model,
    local: EntityId,
    new_gp: EntityId,
) {
    let moved_gtps: BTreeSet<EntityId> = model
        .relations()
        .targets(Relation::Has, local)
        .into_iter()
        .collect();
    let test_ids: Vec<EntityId> = model
        .entities()
        .filter_map(|(id, e)| match e {
            Entry::Test(t) if t.global.is_some_and(|g| moved_gtps.contains(&g)) => Some(id),
            _ => None,
        })
        .collect();
    for id in test_ids {
        if let Some(Entry::Test(t)) = builder.entity_mut(id) {
            t.target = new_gp;
        }
    }
}

/// Recomputes every (class, global property) knowledge edge from the
/// current locals, then re-inserts them. Needed after a rename moves a
/// local into a new family.
fn rebuild_property_visibility(builder: &mut crate::metamodel::Model) {
    let class_ids: Vec<EntityId> = builder.entity_ids_of_kind(crate::metamodel::EntityKind::Class);
    let stale: Vec<(EntityId, EntityId)> = builder
        .relations_mut()
        .pairs(Relation::Has)
        .filter(|(f, t)| {
            f.kind == crate::metamodel::EntityKind::Class
                && t.kind == crate::metamodel::EntityKind::GlobalProperty
        })
        .collect();
    for (from, to) in stale {
        builder.unrelate(Relation::Has, from, to);
    }
    for class in &class_ids {
        let class = ClassId::from_id(*class).unwrap();
        for d in builder.hierarchy_of(class) {
            let globals: Vec<EntityId> = builder.locals_of(d);
            for gp in globals {
                builder.relate(Relation::Has, class.id(), gp).unwrap();
            }
        }
    }
}

fn drop_redef_edges(builder: &mut crate::metamodel::Model, id: EntityId) {
    let outgoing: Vec<EntityId> = builder.relations_mut().targets(Relation::Redef, id);
    for to in outgoing {
        builder.unrelate(Relation::Redef, id, to);
    }
    let incoming: Vec<EntityId> = builder.relations_mut().sources(Relation::Redef, id);
    for from in incoming {
        builder.unrelate(Relation::Redef, from, id);
    }
}

/// The local property of `gp` nearest to `c`: its own definition if it has
/// one, otherwise the closest ancestor's.
pub fn nearest_local(model: &SealedModel, c: ClassId, gp: GlobalPropId) -> Option<LocalPropId> {
    let mut queue = std::collections::VecDeque::from([c]);
    let mut seen = BTreeSet::new();
    while let Some(d) = queue.pop_front() {
        if !seen.insert(d) {
            continue;
        }
        for l in model.own_local_properties(d) {
            if model.local_property(l).global == gp {
                return Some(l);
            }
        }
        queue.extend(model.class(d).parents.iter().copied());
    }
    None
}

/// Field/method lookup order for diagnostics and dispatch: the class
/// itself, then ancestors nearest first, ties in parent declaration order.
pub fn lookup_order(model: &SealedModel, c: ClassId) -> Vec<ClassId> {
    let mut queue = std::collections::VecDeque::from([c]);
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    while let Some(d) = queue.pop_front() {
        if !seen.insert(d) {
            continue;
        }
        order.push(d);
        queue.extend(model.class(d).parents.iter().copied());
    }
    order
}

/// Convenience for tests and the CLI: lookup of a local method by name
/// along the lookup order, honoring select resolutions.
pub fn dispatch_method(model: &SealedModel, class: ClassId, name: &str) -> Option<LocalPropId> {
    // The nearest applicable selection wins.
    let mut best: Option<(u32, &AppliedResolution)> = None;
    for r in model.applied_resolutions() {
        if r.strategy == Strategy::Select
            && r.subject == name
            && model.is_ancestor_or_self(r.site, class)
        {
            let depth = model.depth(r.site);
            if best.map(|(d, _)| depth > d).unwrap_or(true) {
                best = Some((depth, r));
            }
        }
    }
    if let Some((_, r)) = best {
        if let Some(sel) = r.selected {
            if let Ok(l) = LocalPropId::from_id(sel) {
                if model.local_property(l).role == Role::Method {
                    return Some(l);
                }
            }
        }
    }
    for d in lookup_order(model, class) {
        for l in model.own_local_properties(d) {
            let p = model.local_property(l);
            if p.role == Role::Method && p.name == name {
                return Some(l);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::compile_source;

    #[test]
    fn single_inheritance_with_unique_names_is_conflict_free() {
        let compiled = compile_source(
            "package p {
                class A { public int m() { return 1; } test T1 for m { } }
                class B extends A { test T2 for m { } }
                class C extends B { test T1 for m { } }
            }",
        )
        .unwrap();
        assert!(compiled.conflicts.is_empty());
    }

    #[test]
    fn duplicate_gtp_name_reports_both_candidates() {
        let compiled = compile_source(
            "package p {
                class A { public int op() { return 1; } }
                class B extends A { test T for op { } }
                class C extends A { test T for op { } }
            }",
        )
        .unwrap();
        assert_eq!(compiled.conflicts.len(), 1);
        let diag = &compiled.conflicts[0];
        assert_eq!(diag.kind, ConflictKind::DuplicateGtpName);
        assert_eq!(diag.subject, "T");
        assert_eq!(diag.candidates.len(), 2);
        assert_eq!(diag.remedies.len(), 3);
        let rendered = diag.render(&compiled.model);
        assert!(rendered.starts_with("conflict[DuplicateGtpName] at A: 'T' candidates: B.T, C.T"));
    }

    #[test]
    fn same_test_name_on_different_methods_is_not_a_conflict() {
        let compiled = compile_source(
            "package p {
                class A { public int m() { return 1; } public int n() { return 2; } }
                class B extends A { test T for m { } }
                class C extends A { test T for n { } }
            }",
        )
        .unwrap();
        assert!(compiled.conflicts.is_empty());
    }

    #[test]
    fn method_clash_detected_only_at_the_join() {
        let compiled = compile_source(
            "package p {
                class A { public int f() { return 0; } }
                class B extends A { public int f() { return 1; } }
                class C extends A { public int f() { return 2; } }
                class D extends B, C { }
                class E extends D { }
            }",
        )
        .unwrap();
        assert_eq!(compiled.conflicts.len(), 1);
        assert_eq!(
            compiled.conflicts[0].kind,
            ConflictKind::MethodClashMultipleInheritance
        );
        assert_eq!(compiled.model.class(compiled.conflicts[0].site).name, "D");
    }

    #[test]
    fn ltp_clash_without_join_class_is_no_conflict() {
        let compiled = compile_source(
            "package p {
                class A { public int add(int x) { return x; } test T for add { } }
                class B extends A { test T for add { } }
                class C extends A { test T for add { } }
            }",
        )
        .unwrap();
        assert!(compiled.conflicts.is_empty());
    }

    #[test]
    fn select_masks_the_other_branch() {
        let compiled = compile_source(
            "package p {
                class A { public int f() { return 0; } }
                class B extends A { public int f() { return 1; } test TB for f { } }
                class C extends A { public int f() { return 2; } test TC for f { } }
                class D extends B, C { resolve f select C.f; }
            }",
        )
        .unwrap();
        assert!(compiled.conflicts.is_empty());
        let d = compiled.model.class_by_name("D").unwrap();
        let sets = &compiled.sets.per_class[&d];
        let f_sets = sets
            .props
            .iter()
            .find(|p| compiled.model.global_property(p.global_property).name == "f")
            .unwrap();
        let names: Vec<String> = f_sets
            .gtp_set
            .iter()
            .map(|g| compiled.model.global_test(g.id()).name.clone())
            .collect();
        assert_eq!(names, vec!["TC"]);
        // Non-interference: B and C keep their own sets.
        for name in ["B", "C"] {
            let class = compiled.model.class_by_name(name).unwrap();
            let class_sets = &compiled.sets.per_class[&class];
            let prop = class_sets
                .props
                .iter()
                .find(|p| compiled.model.global_property(p.global_property).name == "f")
                .unwrap();
            assert_eq!(prop.gtp_set.len(), 1);
        }
    }

    #[test]
    fn unify_keeps_both_branches() {
        let compiled = compile_source(
            "package p {
                class A { public int f() { return 0; } }
                class B extends A { public int f() { return 1; } test TB for f { } }
                class C extends A { public int f() { return 2; } test TC for f { } }
                class D extends B, C { resolve f unify; }
            }",
        )
        .unwrap();
        assert!(compiled.conflicts.is_empty());
        let d = compiled.model.class_by_name("D").unwrap();
        let f_sets = compiled.sets.per_class[&d]
            .props
            .iter()
            .find(|p| compiled.model.global_property(p.global_property).name == "f")
            .unwrap();
        let names: Vec<String> = f_sets
            .gtp_set
            .iter()
            .map(|g| compiled.model.global_test(g.id()).name.clone())
            .collect();
        assert_eq!(names, vec!["TB", "TC"]);
    }

    #[test]
    fn dangling_resolution_is_rejected() {
        let err = compile_source(
            "package p {
                class A { public int f() { return 0; } }
                class B extends A { resolve f unify; }
            }",
        )
        .unwrap_err();
        assert!(err[0].contains("UnmatchedResolution"), "{err:?}");
    }

    #[test]
    fn selecting_a_non_parent_is_rejected() {
        let err = compile_source(
            "package p {
                class A { public int f() { return 0; } }
                class B extends A { public int f() { return 1; } }
                class C extends A { public int f() { return 2; } }
                class X { public int f() { return 9; } }
                class D extends B, C { resolve f select X.f; }
            }",
        )
        .unwrap_err();
        assert!(err[0].contains("InvalidSelection"), "{err:?}");
    }

    #[test]
    fn resolution_fixpoint_never_rereports() {
        for strategy in ["unify", "select B.f", "rename B.f as fB, C.f as fC"] {
            let src = format!(
                "package p {{
                    class A {{ public int f() {{ return 0; }} }}
                    class B extends A {{ public int f() {{ return 1; }} }}
                    class C extends A {{ public int f() {{ return 2; }} }}
                    class D extends B, C {{ resolve f {strategy}; }}
                }}"
            );
            let compiled = compile_source(&src).unwrap();
            assert!(
                compiled.conflicts.is_empty(),
                "strategy {strategy} left conflicts"
            );
        }
    }

    #[test]
    fn resolution_at_a_site_covers_its_descendants() {
        let compiled = compile_source(
            "package p {
                class A { public int f() { return 0; } }
                class B extends A { public int f() { return 1; } test TB for f { } }
                class C extends A { public int f() { return 2; } test TC for f { } }
                class D extends B, C { resolve f select C.f; }
                class E extends D {
                    test Picked { assert(Current.f() == 2); print(\"e\"); }
                }
            }",
        )
        .unwrap();
        assert!(compiled.conflicts.is_empty());
        let e = compiled.model.class_by_name("E").unwrap();
        let f_sets = compiled.sets.per_class[&e]
            .props
            .iter()
            .find(|p| compiled.model.global_property(p.global_property).name == "f")
            .unwrap();
        let names: Vec<String> = f_sets
            .gtp_set
            .iter()
            .map(|g| compiled.model.global_test(g.id()).name.clone())
            .collect();
        assert_eq!(names, vec!["TC"]);
        // Instances of the descendant dispatch through the selection too.
        let outcomes = crate::runtime::run_all(&compiled.model, &compiled.plan);
        let picked = outcomes
            .iter()
            .find(|o| compiled.model.test(o.test).name == "Picked")
            .unwrap();
        assert_eq!(picked.status, crate::runtime::TestStatus::Pass);
    }

    #[test]
    fn rename_may_leave_one_branch_in_place() {
        let compiled = compile_source(
            "package p {
                class A { public int f() { return 0; } }
                class B extends A { public int f() { return 1; } }
                class C extends A { public int f() { return 2; } }
                class D extends B, C { resolve f rename B.f as fB; }
            }",
        )
        .unwrap();
        assert!(compiled.conflicts.is_empty());
        // C's version is the lone survivor of the original family at D.
        let d = compiled.model.class_by_name("D").unwrap();
        let method = crate::conflicts::dispatch_method(&compiled.model, d, "f").unwrap();
        assert_eq!(compiled.model.display_name(method.id()), "C.f");
        let renamed = crate::conflicts::dispatch_method(&compiled.model, d, "fB").unwrap();
        assert_eq!(compiled.model.display_name(renamed.id()), "B.fB");
    }

    #[test]
    fn rename_arm_must_name_a_clashing_branch() {
        let err = compile_source(
            "package p {
                class A { public int f() { return 0; } }
                class B extends A { public int f() { return 1; } }
                class C extends A { public int f() { return 2; } }
                class D extends B, C { resolve f rename A.f as fA, B.f as fB; }
            }",
        )
        .unwrap_err();
        assert!(err[0].contains("InvalidSelection"), "{err:?}");
    }
}
