//! The machine-readable model dump emitted by `tol model --json`.
//!
//! Entity ids are the dense arena indices, so two runs over the same input
//! produce byte-identical output.

use crate::binder::{classify_methods, MethodClassification};
use crate::conflicts::ConflictDiagnostic;
use crate::metamodel::{Entry, Relation, Role, SealedModel, Signature, TestLevel, Visibility};
use crate::resolver::{ExecutionPlan, ResolvedTestSets, StepKind};
use serde::Serialize;

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Dump {
    packages: Vec<PackageRow>,
    classes: Vec<ClassRow>,
    properties: Vec<PropertyRow>,
    tests: Vec<TestRow>,
    relations: Vec<RelationRow>,
    classification: Vec<ClassificationRow>,
    resolved_sets: Vec<ClassSetsRow>,
    conflicts: Vec<ConflictRow>,
    plan: Vec<PlanRow>,
}

#[derive(Serialize)]
struct PackageRow {
    id: u32,
    name: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ClassRow {
    id: u32,
    name: String,
    package: u32,
    parents: Vec<u32>,
    declaration_index: u32,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PropertyRow {
    id: u32,
    kind: &'static str,
    name: String,
    role: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    introducer: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    owner: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    global: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    visibility: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    signature: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TestRow {
    id: u32,
    kind: &'static str,
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    introducer: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    owner: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    global: Option<u32>,
}

#[derive(Serialize)]
struct RelationRow {
    rel: &'static str,
    from: u32,
    to: u32,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ClassificationRow {
    class: u32,
    global_property: u32,
    classification: &'static str,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ClassSetsRow {
    class: u32,
    gtc: Vec<u32>,
    ltc: Vec<u32>,
    properties: Vec<PropSetsRow>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PropSetsRow {
    global_property: u32,
    local_properties: Vec<u32>,
    gtp: Vec<u32>,
    introduced_gtp: Vec<u32>,
    ltp_per_gtp: Vec<LtpPerGtpRow>,
}

#[derive(Serialize)]
struct LtpPerGtpRow {
    gtp: u32,
    ltp: Vec<u32>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ConflictRow {
    kind: &'static str,
    site: u32,
    subject: String,
    candidates: Vec<u32>,
    remedies: Vec<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PlanRow {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    executing_class: Option<u32>,
    test: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_property: Option<u32>,
}

pub fn render_model_dump(
    model: &SealedModel,
    sets: &ResolvedTestSets,
    plan: &ExecutionPlan,
    conflicts: &[ConflictDiagnostic],
) -> String {
    let mut packages = Vec::new();
    let mut classes = Vec::new();
    let mut properties = Vec::new();
    let mut tests = Vec::new();

    for (id, entry) in model.entities() {
        match entry {
            Entry::Package(p) => packages.push(PackageRow {
                id: id.index,
                name: p.name.clone(),
            }),
            Entry::Class(c) => classes.push(ClassRow {
                id: id.index,
                name: c.name.clone(),
                package: c.package.index(),
                parents: c.parents.iter().map(|p| p.index()).collect(),
                declaration_index: c.declaration_index,
            }),
            Entry::GlobalProperty(g) => properties.push(PropertyRow {
                id: id.index,
                kind: "GlobalProperty",
                name: g.name.clone(),
                role: role_name(g.role),
                introducer: Some(g.introducer.index()),
                owner: None,
                global: None,
                visibility: None,
                signature: None,
            }),
            Entry::LocalProperty(p) => properties.push(PropertyRow {
                id: id.index,
                kind: "LocalProperty",
                name: p.name.clone(),
                role: role_name(p.role),
                introducer: None,
                owner: Some(p.owner.index()),
                global: Some(p.global.index()),
                visibility: Some(match p.visibility {
                    Visibility::Public => "public",
                    Visibility::Private => "private",
                }),
                signature: Some(render_signature(model, &p.signature)),
            }),
            Entry::GlobalTestProperty(t) => tests.push(TestRow {
                id: id.index,
                kind: "GlobalTestProperty",
                name: t.name.clone(),
                introducer: Some(t.introducer.index()),
                owner: None,
                target: None,
                global: None,
            }),
            Entry::GlobalTestClass(t) => tests.push(TestRow {
                id: id.index,
                kind: "GlobalTestClass",
                name: t.name.clone(),
                introducer: Some(t.introducer.index()),
                owner: None,
                target: None,
                global: None,
            }),
            Entry::Test(t) => tests.push(TestRow {
                id: id.index,
                kind: match t.level {
                    TestLevel::Property => "LocalTestProperty",
                    TestLevel::Class => "LocalTestClass",
                    TestLevel::Package => "TestPackage",
                },
                name: t.name.clone(),
                introducer: None,
                owner: Some(t.owner.index),
                target: Some(t.target.index),
                global: t.global.map(|g| g.index),
            }),
        }
    }

    let mut relations = Vec::new();
    for rel in Relation::ALL {
        for (from, to) in model.relations().pairs(rel) {
            relations.push(RelationRow {
                rel: rel.name(),
                from: from.index,
                to: to.index,
            });
        }
    }

    let classification = classify_methods(model)
        .into_iter()
        .map(|((class, gp), kind)| ClassificationRow {
            class: class.index(),
            global_property: gp.index(),
            classification: classification_name(kind),
        })
        .collect();

    let resolved_sets = sets
        .per_class
        .iter()
        .map(|(class, class_sets)| ClassSetsRow {
            class: class.index(),
            gtc: class_sets.gtc_set.iter().map(|g| g.index()).collect(),
            ltc: class_sets.ltc_set.iter().map(|l| l.index()).collect(),
            properties: class_sets
                .props
                .iter()
                .map(|p| PropSetsRow {
                    global_property: p.global_property.index(),
                    local_properties: p.local_props.iter().map(|l| l.index()).collect(),
                    gtp: p.gtp_set.iter().map(|g| g.index()).collect(),
                    introduced_gtp: p.introduced_gtp_set.iter().map(|g| g.index()).collect(),
                    ltp_per_gtp: p
                        .ltp_per_gtp
                        .iter()
                        .map(|(gtp, ltps)| LtpPerGtpRow {
                            gtp: gtp.index(),
                            ltp: ltps.iter().map(|l| l.index()).collect(),
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();

    let conflicts = conflicts
        .iter()
        .map(|c| ConflictRow {
            kind: c.kind.name(),
            site: c.site.index(),
            subject: c.subject.clone(),
            candidates: c.candidates.iter().map(|e| e.index).collect(),
            remedies: c.remedies.clone(),
        })
        .collect();

    let plan = plan
        .steps
        .iter()
        .map(|s| PlanRow {
            kind: match s.kind {
                StepKind::PackageTest => "packageTest",
                StepKind::ClassTest => "classTest",
                StepKind::PropertyTest => "propertyTest",
            },
            executing_class: s.executing_class.map(|c| c.index()),
            test: s.test.index,
            target_property: s.target_property.map(|g| g.index()),
        })
        .collect();

    let dump = Dump {
        packages,
        classes,
        properties,
        tests,
        relations,
        classification,
        resolved_sets,
        conflicts,
        plan,
    };
    let mut text = serde_json::to_string_pretty(&dump).expect("dump serialization");
    text.push('\n');
    text
}

fn role_name(role: Role) -> &'static str {
    match role {
        Role::Field => "field",
        Role::Method => "method",
    }
}

fn classification_name(kind: MethodClassification) -> &'static str {
    kind.name()
}

fn render_signature(model: &SealedModel, signature: &Signature) -> String {
    match signature {
        Signature::Field { ty } => model.type_name(*ty),
        Signature::Method { params, ret } => {
            let rendered: Vec<String> = params.iter().map(|p| model.type_name(p.ty)).collect();
            let ret = ret
                .as_ref()
                .map(|t| model.type_name(*t))
                .unwrap_or_else(|| "void".to_string());
            format!("({}) -> {}", rendered.join(", "), ret)
        }
    }
}
