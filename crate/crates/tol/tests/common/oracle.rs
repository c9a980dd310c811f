//! A deliberately naive reference for the resolved test sets.
//!
//! Everything here recurses over raw parent lists and scans full relation
//! pair sets, with no memoization and no shared code with the resolver.
//! Differential tests compare it against the production implementation on
//! randomly generated hierarchies.

use std::collections::BTreeSet;
use tol::metamodel::{
    ClassId, EntityId, EntityKind, Entry, GlobalPropId, GtcId, GtpId, LocalPropId, LtcId, LtpId,
    Relation, SealedModel, TestLevel,
};

fn pairs(model: &SealedModel, rel: Relation) -> Vec<(EntityId, EntityId)> {
    model.relations().pairs(rel).collect()
}

/// Transitive superclasses by direct recursion over parent lists.
pub fn parents_star(model: &SealedModel, c: ClassId) -> BTreeSet<ClassId> {
    let mut out = BTreeSet::new();
    for &p in &model.class(c).parents {
        if out.insert(p) {
            out.extend(parents_star(model, p));
        }
    }
    out
}

fn hierarchy(model: &SealedModel, c: ClassId) -> BTreeSet<ClassId> {
    let mut h = parents_star(model, c);
    h.insert(c);
    h
}

/// Local properties of `g` across the hierarchy of `c`.
pub fn eq_local_properties(
    model: &SealedModel,
    c: ClassId,
    g: GlobalPropId,
) -> BTreeSet<LocalPropId> {
    let h = hierarchy(model, c);
    let belongs = pairs(model, Relation::Belongs);
    let mut out = BTreeSet::new();
    for (id, entry) in model.entities() {
        let Entry::LocalProperty(p) = entry else {
            continue;
        };
        if !h.contains(&p.owner) {
            continue;
        }
        if belongs.contains(&(id, g.id())) {
            out.insert(LocalPropId::from_id(id).unwrap());
        }
    }
    out
}

/// Global test properties attached to any local of `g` in the hierarchy.
pub fn eq_global_test_properties(
    model: &SealedModel,
    c: ClassId,
    g: GlobalPropId,
) -> BTreeSet<GtpId> {
    let locals = eq_local_properties(model, c, g);
    let has = pairs(model, Relation::Has);
    let mut out = BTreeSet::new();
    for (from, to) in has {
        if to.kind == EntityKind::GlobalTestProperty && locals.iter().any(|l| l.id() == from) {
            out.insert(GtpId::from_id(to).unwrap());
        }
    }
    out
}

/// The subset of attached test properties introduced inside the hierarchy.
pub fn eq_introduced_gtps(model: &SealedModel, c: ClassId, g: GlobalPropId) -> BTreeSet<GtpId> {
    let h = hierarchy(model, c);
    let intro = pairs(model, Relation::Intro);
    eq_global_test_properties(model, c, g)
        .into_iter()
        .filter(|gtp| {
            intro.iter().any(|(d, t)| {
                *t == gtp.id()
                    && ClassId::from_id(*d)
                        .map(|d| h.contains(&d))
                        .unwrap_or(false)
            })
        })
        .collect()
}

/// Local tests of a global test property in the hierarchy, before
/// redefinition removal.
pub fn eq_ltp_complete(model: &SealedModel, c: ClassId, gt: GtpId) -> BTreeSet<LtpId> {
    let h = hierarchy(model, c);
    let belongs = pairs(model, Relation::Belongs);
    let mut out = BTreeSet::new();
    for (id, entry) in model.entities() {
        let Entry::Test(t) = entry else {
            continue;
        };
        if t.level != TestLevel::Property {
            continue;
        }
        let Ok(owner) = ClassId::from_id(t.owner) else {
            continue;
        };
        if h.contains(&owner) && belongs.contains(&(id, gt.id())) {
            out.insert(LtpId::from_id(id).unwrap());
        }
    }
    out
}

/// Effective local tests: the complete set minus everything redefined by
/// another member of the set.
pub fn eq_ltp_effective(model: &SealedModel, c: ClassId, gt: GtpId) -> BTreeSet<LtpId> {
    let complete = eq_ltp_complete(model, c, gt);
    let redef = pairs(model, Relation::Redef);
    complete
        .iter()
        .filter(|t1| {
            !complete
                .iter()
                .any(|t2| redef.contains(&(t2.id(), t1.id())))
        })
        .copied()
        .collect()
}

/// Global test classes introduced by the hierarchy.
pub fn eq_global_test_classes(model: &SealedModel, c: ClassId) -> BTreeSet<GtcId> {
    let h = hierarchy(model, c);
    let intro = pairs(model, Relation::Intro);
    let mut out = BTreeSet::new();
    for (d, t) in intro {
        if t.kind == EntityKind::GlobalTestClass
            && ClassId::from_id(d).map(|d| h.contains(&d)).unwrap_or(false)
        {
            out.insert(GtcId::from_id(t).unwrap());
        }
    }
    out
}

pub fn eq_ltc_complete(model: &SealedModel, c: ClassId) -> BTreeSet<LtcId> {
    let h = hierarchy(model, c);
    let gtcs = eq_global_test_classes(model, c);
    let belongs = pairs(model, Relation::Belongs);
    let mut out = BTreeSet::new();
    for (id, entry) in model.entities() {
        let Entry::Test(t) = entry else {
            continue;
        };
        if t.level != TestLevel::Class {
            continue;
        }
        let Ok(owner) = ClassId::from_id(t.owner) else {
            continue;
        };
        if h.contains(&owner) && gtcs.iter().any(|g| belongs.contains(&(id, g.id()))) {
            out.insert(LtcId::from_id(id).unwrap());
        }
    }
    out
}

pub fn eq_ltc_effective(model: &SealedModel, c: ClassId) -> BTreeSet<LtcId> {
    let complete = eq_ltc_complete(model, c);
    let redef = pairs(model, Relation::Redef);
    complete
        .iter()
        .filter(|t1| {
            !complete
                .iter()
                .any(|t2| redef.contains(&(t2.id(), t1.id())))
        })
        .copied()
        .collect()
}
