//! Name resolution and model construction.
//!
//! Binding interns every package, class, member, and test into the
//! metamodel: members with one (name, role) along a hierarchy join a
//! single global property with redefinition edges; a test block whose
//! name and target match an ancestor's test redefines that test, and a
//! fresh name introduces a new global test entity. Binding also performs
//! the variance checks on redefined method signatures and classifies
//! methods for the model dump.

use crate::conflicts::{RenameArm, Resolution, ResolutionArgs};
use crate::frontend::ast::{self, Block, Expr, Member, Stmt, TypeExprKind, Unit};
use crate::metamodel::{
    ClassEntry, ClassId, Ctor, EntityId, Entry, GlobalPropId, GlobalPropertyEntry, GlobalTestEntry,
    LocalPropId, Model, PackageEntry, PackageId, ParamSig, PropertyEntry, Role, SealedModel,
    Signature, TestEntry, TestLevel, TypeRef, Visibility,
};
use crate::metamodel::{EntityKind, Relation};
use crate::span::{SourceMap, Span};
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug)]
pub struct BindDiagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub span: Span,
}

impl BindDiagnostic {
    fn error(code: &'static str, message: String, span: Span) -> Self {
        BindDiagnostic {
            severity: Severity::Error,
            code,
            message,
            span,
        }
    }

    pub fn render(&self, sources: &SourceMap) -> String {
        let severity = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        format!(
            "{}: {}[{}]: {}",
            sources.display(self.span),
            severity,
            self.code,
            self.message
        )
    }
}

/// Binds a parsed unit. `Ok` carries the sealed model plus any warnings;
/// `Err` carries at least one error and prevents sealing.
pub fn bind(unit: &Unit) -> Result<(SealedModel, Vec<BindDiagnostic>), Vec<BindDiagnostic>> {
    let mut binder = Binder::default();
    binder.run(unit);
    let has_errors = binder
        .diagnostics
        .iter()
        .any(|d| d.severity == Severity::Error);
    if has_errors {
        return Err(binder.diagnostics);
    }
    match binder.model.seal() {
        Ok(sealed) => Ok((sealed, binder.diagnostics)),
        Err(err) => {
            binder.diagnostics.push(BindDiagnostic::error(
                "ModelInvalid",
                err.to_string(),
                Span::synthetic(),
            ));
            Err(binder.diagnostics)
        }
    }
}

/// Test helper and embedding convenience: lex, parse, and bind one source
/// string, panicking on any diagnostic.
pub fn bind_source(source: &str) -> SealedModel {
    let mut sources = SourceMap::new();
    let file = sources.add("<memory>");
    let tokens = crate::frontend::lex(file, source).expect("lex");
    let unit = crate::frontend::parse(&tokens).expect("parse");
    match bind(&unit) {
        Ok((model, _)) => model,
        Err(diags) => panic!(
            "bind failed: {}",
            diags
                .iter()
                .map(|d| d.render(&sources))
                .collect::<Vec<_>>()
                .join("\n")
        ),
    }
}

#[derive(Default)]
struct Binder {
    model: Model,
    diagnostics: Vec<BindDiagnostic>,
    class_ids: HashMap<String, ClassId>,
    parents: HashMap<ClassId, Vec<ClassId>>,
    ancestors: HashMap<ClassId, Vec<ClassId>>,
    /// (name, role, local, global) per class, own members only.
    own_locals: HashMap<ClassId, Vec<(String, Role, LocalPropId, GlobalPropId)>>,
    /// Global test properties by introducing class: (name, gtp, property family).
    gtp_intro: HashMap<ClassId, Vec<(String, EntityId, GlobalPropId)>>,
    /// Global test classes by introducing class.
    gtc_intro: HashMap<ClassId, Vec<(String, EntityId)>>,
    /// Property/class tests by declaring class: (name, test, global test).
    own_ptests: HashMap<ClassId, Vec<(String, EntityId, EntityId)>>,
    own_ctests: HashMap<ClassId, Vec<(String, EntityId, EntityId)>>,
    resolutions: Vec<Resolution>,
}

struct MergedPackage<'a> {
    name: String,
    tests: Vec<&'a ast::TestBlock>,
    classes: Vec<&'a ast::ClassDecl>,
}

impl Binder {
    fn run(&mut self, unit: &Unit) {
        let packages = merge_packages(unit);
        let mut package_ids = Vec::new();
        for (index, pkg) in packages.iter().enumerate() {
            let id = self
                .model
                .add_entity(Entry::Package(PackageEntry {
                    name: pkg.name.clone(),
                    declaration_index: index as u32,
                }))
                .expect("merged packages are unique");
            package_ids.push(PackageId::from_id(id).unwrap());
        }

        // Class handles are assigned up front so parent lists can point
        // forward; the model validates the handles at seal time.
        let mut class_decls: Vec<(usize, &ast::ClassDecl)> = Vec::new();
        for (pkg_index, pkg) in packages.iter().enumerate() {
            for class in &pkg.classes {
                class_decls.push((pkg_index, class));
            }
        }
        let base = packages.len() as u32;
        for (k, (_, decl)) in class_decls.iter().enumerate() {
            let predicted =
                ClassId::from_id(EntityId::new(EntityKind::Class, base + k as u32)).unwrap();
            if self.class_ids.contains_key(&decl.name.text) {
                self.error(
                    "DuplicateClass",
                    format!("class '{}' is already defined", decl.name.text),
                    decl.name.span,
                );
            } else {
                self.class_ids.insert(decl.name.text.clone(), predicted);
            }
        }
        if self.has_errors() {
            return;
        }

        for (k, (pkg_index, decl)) in class_decls.iter().enumerate() {
            let ctor = self.bind_ctor(decl);
            let parents = self.resolve_parents(decl);
            let id = self
                .model
                .add_entity(Entry::Class(ClassEntry {
                    name: decl.name.text.clone(),
                    package: package_ids[*pkg_index],
                    parents: parents.clone(),
                    declaration_index: k as u32,
                    ctor,
                    span: decl.name.span,
                }))
                .expect("class names checked above");
            let id = ClassId::from_id(id).unwrap();
            debug_assert_eq!(id.index(), base + k as u32);
            self.parents.insert(id, parents);
        }
        if self.has_errors() {
            return;
        }

        if !self.compute_ancestors(&class_decls) {
            return;
        }

        let order = self.topo_order();
        let decl_by_id: HashMap<ClassId, &ast::ClassDecl> = class_decls
            .iter()
            .enumerate()
            .map(|(k, (_, d))| {
                (
                    ClassId::from_id(EntityId::new(EntityKind::Class, base + k as u32)).unwrap(),
                    *d,
                )
            })
            .collect();

        for &class in &order {
            self.bind_members(class, decl_by_id[&class]);
        }
        for &class in &order {
            self.bind_tests(class, decl_by_id[&class]);
        }
        for &class in &order {
            self.bind_resolve_clauses(class, decl_by_id[&class]);
        }

        for (pkg_index, pkg) in packages.iter().enumerate() {
            self.bind_package_tests(package_ids[pkg_index], pkg);
        }

        // Knowledge edges: each package has its classes and package tests,
        // each class has every global property visible in its hierarchy.
        for (k, (pkg_index, _)) in class_decls.iter().enumerate() {
            let class =
                ClassId::from_id(EntityId::new(EntityKind::Class, base + k as u32)).unwrap();
            self.relate(Relation::Has, package_ids[*pkg_index].id(), class.id());
            for d in self.hierarchy(class) {
                for (_, _, _, gp) in self.own_locals.get(&d).cloned().unwrap_or_default() {
                    self.relate(Relation::Has, class.id(), gp.id());
                }
            }
        }

        self.check_nullary_ctors(&decl_by_id);

        let resolutions = std::mem::take(&mut self.resolutions);
        self.model.set_declared_resolutions(resolutions);
    }

    fn has_errors(&self) -> bool {
        self.diagnostics
            .iter()
            .any(|d| d.severity == Severity::Error)
    }

    fn error(&mut self, code: &'static str, message: String, span: Span) {
        self.diagnostics
            .push(BindDiagnostic::error(code, message, span));
    }

    fn relate(&mut self, rel: Relation, from: EntityId, to: EntityId) {
        self.model
            .relate(rel, from, to)
            .expect("binder emits admissible pairs");
    }

    fn resolve_parents(&mut self, decl: &ast::ClassDecl) -> Vec<ClassId> {
        let mut parents = Vec::new();
        for parent in &decl.parents {
            match self.class_ids.get(&parent.text) {
                Some(id) => {
                    if parents.contains(id) {
                        self.error(
                            "DuplicateParent",
                            format!("parent '{}' listed twice", parent.text),
                            parent.span,
                        );
                    } else {
                        parents.push(*id);
                    }
                }
                None => self.error(
                    "UnknownParent",
                    format!("unknown parent class '{}'", parent.text),
                    parent.span,
                ),
            }
        }
        parents
    }

    /// Transitive closure over the parent lists; reports a cycle instead of
    /// recursing forever. Returns false when binding cannot continue.
    fn compute_ancestors(&mut self, class_decls: &[(usize, &ast::ClassDecl)]) -> bool {
        let mut ids: Vec<ClassId> = self.parents.keys().copied().collect();
        ids.sort();
        for id in ids {
            let mut seen = HashSet::new();
            let mut acc = Vec::new();
            let mut queue: VecDeque<ClassId> = self.parents[&id].iter().copied().collect();
            while let Some(p) = queue.pop_front() {
                if p == id {
                    let decl = class_decls
                        .iter()
                        .find(|(_, d)| self.class_ids[&d.name.text] == id)
                        .map(|(_, d)| d.name.span)
                        .unwrap_or_else(Span::synthetic);
                    self.error(
                        "ParentCycle",
                        "class inherits from itself".to_string(),
                        decl,
                    );
                    return false;
                }
                if seen.insert(p) {
                    acc.push(p);
                    queue.extend(self.parents[&p].iter().copied());
                }
            }
            self.ancestors.insert(id, acc);
        }
        true
    }

    fn topo_order(&self) -> Vec<ClassId> {
        let mut ids: Vec<ClassId> = self.parents.keys().copied().collect();
        ids.sort();
        let mut placed: HashSet<ClassId> = HashSet::new();
        let mut order = Vec::new();
        while order.len() < ids.len() {
            for &id in &ids {
                if !placed.contains(&id) && self.parents[&id].iter().all(|p| placed.contains(p)) {
                    placed.insert(id);
                    order.push(id);
                }
            }
        }
        order
    }

    /// Ancestors-or-self, nearest first.
    fn hierarchy(&self, class: ClassId) -> Vec<ClassId> {
        let mut queue = VecDeque::from([class]);
        let mut seen = HashSet::new();
        let mut order = Vec::new();
        while let Some(d) = queue.pop_front() {
            if seen.insert(d) {
                order.push(d);
                queue.extend(self.parents[&d].iter().copied());
            }
        }
        order
    }

    fn resolve_type(&mut self, ty: &ast::TypeExpr) -> TypeRef {
        match &ty.kind {
            TypeExprKind::Int => TypeRef::Int,
            TypeExprKind::Bool => TypeRef::Bool,
            TypeExprKind::Str => TypeRef::Str,
            TypeExprKind::Color => TypeRef::Color,
            TypeExprKind::Named(name) => match self.class_ids.get(name) {
                Some(id) => TypeRef::Class(*id),
                None => {
                    self.error("UnknownType", format!("unknown type '{name}'"), ty.span);
                    TypeRef::Int
                }
            },
        }
    }

    fn resolve_params(&mut self, params: &[ast::Param]) -> Vec<ParamSig> {
        params
            .iter()
            .map(|p| ParamSig {
                name: p.name.text.clone(),
                ty: self.resolve_type(&p.ty),
            })
            .collect()
    }

    fn bind_ctor(&mut self, decl: &ast::ClassDecl) -> Option<Ctor> {
        let mut ctor = None;
        for member in &decl.members {
            if let Member::Ctor(c) = member {
                if ctor.is_some() {
                    self.error(
                        "DuplicateMember",
                        format!(
                            "class '{}' declares more than one constructor",
                            decl.name.text
                        ),
                        c.span,
                    );
                    continue;
                }
                self.check_body_names(&c.body);
                ctor = Some(Ctor {
                    visibility: vis(c.visibility),
                    params: self.resolve_params(&c.params),
                    body: self.model.add_body(c.body.clone()),
                });
            }
        }
        ctor
    }

    fn bind_members(&mut self, class: ClassId, decl: &ast::ClassDecl) {
        let mut seen: HashSet<(String, Role)> = HashSet::new();
        for (index, member) in decl.members.iter().enumerate() {
            let (role, name, span) = match member {
                Member::Field(f) => (Role::Field, &f.name, f.span),
                Member::Method(m) => (Role::Method, &m.name, m.span),
                _ => continue,
            };
            if !seen.insert((name.text.clone(), role)) {
                self.error(
                    "DuplicateMember",
                    format!("'{}' is declared twice in '{}'", name.text, decl.name.text),
                    span,
                );
                continue;
            }
            let global = self.property_family(class, &name.text, role, name.span);
            let (signature, visibility, body, field_init) = match member {
                Member::Field(f) => {
                    let init = f.init.as_ref().map(|e| {
                        self.check_expr_names(e);
                        self.model.add_field_init(e.clone())
                    });
                    (
                        Signature::Field {
                            ty: self.resolve_type(&f.ty),
                        },
                        vis(f.visibility),
                        None,
                        init,
                    )
                }
                Member::Method(m) => {
                    self.check_body_names(&m.body);
                    (
                        Signature::Method {
                            params: self.resolve_params(&m.params),
                            ret: m.ret.as_ref().map(|t| self.resolve_type(t)),
                        },
                        vis(m.visibility),
                        Some(self.model.add_body(m.body.clone())),
                        None,
                    )
                }
                _ => unreachable!(),
            };
            let local = self
                .model
                .add_entity(Entry::LocalProperty(PropertyEntry {
                    role,
                    name: name.text.clone(),
                    signature,
                    visibility,
                    owner: class,
                    global,
                    declaration_index: index as u32,
                    body,
                    field_init,
                    span: name.span,
                }))
                .expect("duplicates checked above");
            let local = LocalPropId::from_id(local).unwrap();
            self.relate(Relation::Belongs, local.id(), global.id());
            self.relate(Relation::Def, class.id(), local.id());
            for parent in self.parents[&class].clone() {
                if let Some(nearest) = self.nearest_local(parent, global) {
                    self.relate(Relation::Redef, local.id(), nearest.id());
                }
            }
            self.own_locals.entry(class).or_default().push((
                name.text.clone(),
                role,
                local,
                global,
            ));
        }
    }

    /// The global property a member joins: a fresh family when no ancestor
    /// defines (name, role), the ancestor's family otherwise.
    fn property_family(
        &mut self,
        class: ClassId,
        name: &str,
        role: Role,
        span: Span,
    ) -> GlobalPropId {
        let mut found: Vec<GlobalPropId> = Vec::new();
        for ancestor in self.ancestors[&class].clone() {
            for (n, r, _, g) in self.own_locals.get(&ancestor).cloned().unwrap_or_default() {
                if n == name && r == role && !found.contains(&g) {
                    found.push(g);
                }
            }
        }
        match found.len() {
            0 => {
                let gp = self
                    .model
                    .add_entity(Entry::GlobalProperty(GlobalPropertyEntry {
                        name: name.to_string(),
                        role,
                        introducer: class,
                    }))
                    .expect("one introduction per (class, name, role)");
                let gp = GlobalPropId::from_id(gp).unwrap();
                self.relate(Relation::Intro, class.id(), gp.id());
                gp
            }
            1 => found[0],
            _ => {
                self.error(
                    "AmbiguousRedefinition",
                    format!(
                        "'{name}' names distinct inherited properties; redefinition is ambiguous"
                    ),
                    span,
                );
                found[0]
            }
        }
    }

    /// Nearest local of `global` visible from `class` (inclusive).
    fn nearest_local(&self, class: ClassId, global: GlobalPropId) -> Option<LocalPropId> {
        for d in self.hierarchy(class) {
            for (_, _, l, g) in self.own_locals.get(&d).into_iter().flatten() {
                if *g == global {
                    return Some(*l);
                }
            }
        }
        None
    }

    fn bind_tests(&mut self, class: ClassId, decl: &ast::ClassDecl) {
        for (index, member) in decl.members.iter().enumerate() {
            match member {
                Member::PropertyTest(t) => self.bind_property_test(class, t, index as u32),
                Member::ClassTest(t) => self.bind_class_test(class, t, index as u32),
                _ => {}
            }
        }
    }

    fn bind_property_test(&mut self, class: ClassId, t: &ast::TestBlock, index: u32) {
        let target_name = t.target.as_ref().expect("property tests carry a target");
        let Some((target_local, global)) = self.find_method(class, &target_name.text) else {
            self.error(
                "UnknownTestTarget",
                format!(
                    "test '{}' targets unknown method '{}'",
                    t.name.text, target_name.text
                ),
                target_name.span,
            );
            return;
        };
        self.check_body_names(&t.body);

        // A matching name introduced anywhere in the hierarchy for the same
        // property family makes this a redefinition of that test.
        let mut matches: Vec<EntityId> = Vec::new();
        for d in self.hierarchy(class) {
            for (name, gtp, family) in self.gtp_intro.get(&d).into_iter().flatten() {
                if name == &t.name.text && *family == global && !matches.contains(gtp) {
                    matches.push(*gtp);
                }
            }
        }
        let gtp = match matches.len() {
            0 => {
                let gtp = self
                    .model
                    .add_entity(Entry::GlobalTestProperty(GlobalTestEntry {
                        name: t.name.text.clone(),
                        introducer: class,
                    }))
                    .expect("unique introduction per class");
                self.relate(Relation::Intro, class.id(), gtp);
                self.relate(Relation::Has, target_local.id(), gtp);
                self.gtp_intro
                    .entry(class)
                    .or_default()
                    .push((t.name.text.clone(), gtp, global));
                gtp
            }
            1 => matches[0],
            _ => {
                self.error(
                    "AmbiguousRedefinition",
                    format!(
                        "test '{}' matches distinct inherited tests; redefinition is ambiguous",
                        t.name.text
                    ),
                    t.name.span,
                );
                return;
            }
        };

        let body = self.model.add_body(t.body.clone());
        let Ok(ltp) = self.model.add_entity(Entry::Test(TestEntry {
            level: TestLevel::Property,
            name: t.name.text.clone(),
            owner: class.id(),
            target: global.id(),
            global: Some(gtp),
            body,
            declaration_index: index,
            span: t.name.span,
        })) else {
            self.error(
                "DuplicateTest",
                format!("test '{}' is declared twice", t.name.text),
                t.name.span,
            );
            return;
        };
        self.relate(Relation::Belongs, ltp, gtp);
        self.relate(Relation::Def, class.id(), ltp);
        for parent in self.parents[&class].clone() {
            if let Some(overridden) = self.nearest_test(parent, gtp, TestLevel::Property) {
                self.relate(Relation::Redef, ltp, overridden);
            }
        }
        self.own_ptests
            .entry(class)
            .or_default()
            .push((t.name.text.clone(), ltp, gtp));
    }

    fn bind_class_test(&mut self, class: ClassId, t: &ast::TestBlock, index: u32) {
        self.check_body_names(&t.body);
        let mut matches: Vec<EntityId> = Vec::new();
        for d in self.hierarchy(class) {
            for (name, gtc) in self.gtc_intro.get(&d).into_iter().flatten() {
                if name == &t.name.text && !matches.contains(gtc) {
                    matches.push(*gtc);
                }
            }
        }
        let gtc = match matches.len() {
            0 => {
                let gtc = self
                    .model
                    .add_entity(Entry::GlobalTestClass(GlobalTestEntry {
                        name: t.name.text.clone(),
                        introducer: class,
                    }))
                    .expect("unique introduction per class");
                self.relate(Relation::Intro, class.id(), gtc);
                self.gtc_intro
                    .entry(class)
                    .or_default()
                    .push((t.name.text.clone(), gtc));
                gtc
            }
            1 => matches[0],
            _ => {
                self.error(
                    "AmbiguousRedefinition",
                    format!(
                        "test '{}' matches distinct inherited tests; redefinition is ambiguous",
                        t.name.text
                    ),
                    t.name.span,
                );
                return;
            }
        };
        let body = self.model.add_body(t.body.clone());
        let Ok(ltc) = self.model.add_entity(Entry::Test(TestEntry {
            level: TestLevel::Class,
            name: t.name.text.clone(),
            owner: class.id(),
            target: class.id(),
            global: Some(gtc),
            body,
            declaration_index: index,
            span: t.name.span,
        })) else {
            self.error(
                "DuplicateTest",
                format!("test '{}' is declared twice", t.name.text),
                t.name.span,
            );
            return;
        };
        self.relate(Relation::Belongs, ltc, gtc);
        self.relate(Relation::Def, class.id(), ltc);
        for parent in self.parents[&class].clone() {
            if let Some(overridden) = self.nearest_test(parent, gtc, TestLevel::Class) {
                self.relate(Relation::Redef, ltc, overridden);
            }
        }
        self.own_ctests
            .entry(class)
            .or_default()
            .push((t.name.text.clone(), ltc, gtc));
    }

    fn nearest_test(&self, class: ClassId, global: EntityId, level: TestLevel) -> Option<EntityId> {
        let table = match level {
            TestLevel::Property => &self.own_ptests,
            TestLevel::Class => &self.own_ctests,
            TestLevel::Package => unreachable!(),
        };
        for d in self.hierarchy(class) {
            for (_, test, g) in table.get(&d).into_iter().flatten() {
                if *g == global {
                    return Some(*test);
                }
            }
        }
        None
    }

    fn bind_package_tests(&mut self, package: PackageId, pkg: &MergedPackage<'_>) {
        for (index, t) in pkg.tests.iter().enumerate() {
            self.check_body_names(&t.body);
            let body = self.model.add_body(t.body.clone());
            let Ok(tp) = self.model.add_entity(Entry::Test(TestEntry {
                level: TestLevel::Package,
                name: t.name.text.clone(),
                owner: package.id(),
                target: package.id(),
                global: None,
                body,
                declaration_index: index as u32,
                span: t.name.span,
            })) else {
                self.error(
                    "DuplicateTest",
                    format!("package test '{}' is declared twice", t.name.text),
                    t.name.span,
                );
                continue;
            };
            self.relate(Relation::Has, package.id(), tp);
            self.relate(Relation::Def, package.id(), tp);
        }
    }

    fn bind_resolve_clauses(&mut self, class: ClassId, decl: &ast::ClassDecl) {
        for member in &decl.members {
            let Member::Resolve(clause) = member else {
                continue;
            };
            let args = match &clause.strategy {
                ast::StrategyDecl::Unify => Some(ResolutionArgs::Unify),
                ast::StrategyDecl::Select(q) => {
                    self.resolve_class_name(&q.owner)
                        .map(|owner| ResolutionArgs::Select {
                            owner,
                            name: q.name.text.clone(),
                        })
                }
                ast::StrategyDecl::Rename(arms) => {
                    let mut resolved = Vec::new();
                    for arm in arms {
                        let Some(owner) = self.resolve_class_name(&arm.from.owner) else {
                            continue;
                        };
                        resolved.push(RenameArm {
                            owner,
                            old: arm.from.name.text.clone(),
                            new: arm.to.text.clone(),
                        });
                    }
                    Some(ResolutionArgs::Rename(resolved))
                }
            };
            if let Some(args) = args {
                self.resolutions.push(Resolution {
                    site: class,
                    subject: clause.subject.text.clone(),
                    args,
                    span: clause.span,
                });
            }
        }
    }

    fn resolve_class_name(&mut self, name: &ast::Ident) -> Option<ClassId> {
        match self.class_ids.get(&name.text) {
            Some(id) => Some(*id),
            None => {
                self.error(
                    "UnknownName",
                    format!("unknown class '{}'", name.text),
                    name.span,
                );
                None
            }
        }
    }

    fn find_method(&self, class: ClassId, name: &str) -> Option<(LocalPropId, GlobalPropId)> {
        for d in self.hierarchy(class) {
            for (n, role, l, g) in self.own_locals.get(&d).into_iter().flatten() {
                if n == name && *role == Role::Method {
                    return Some((*l, *g));
                }
            }
        }
        None
    }

    /// Tests execute against a fresh instance, so every class that can see
    /// a property or class test must be constructible without arguments.
    fn check_nullary_ctors(&mut self, decls: &HashMap<ClassId, &ast::ClassDecl>) {
        let mut ids: Vec<ClassId> = self.parents.keys().copied().collect();
        ids.sort();
        for class in ids {
            let needs_args = decls
                .get(&class)
                .and_then(|d| {
                    d.members.iter().find_map(|m| match m {
                        Member::Ctor(c) => Some(!c.params.is_empty()),
                        _ => None,
                    })
                })
                .unwrap_or(false);
            if !needs_args {
                continue;
            }
            let sees_tests = self
                .hierarchy(class)
                .into_iter()
                .any(|d| self.own_ptests.contains_key(&d) || self.own_ctests.contains_key(&d));
            if sees_tests {
                self.error(
                    "CurrentNeedsNullaryCtor",
                    format!(
                        "class '{}' sees tests but its constructor requires arguments",
                        decls[&class].name.text
                    ),
                    decls[&class].name.span,
                );
            }
        }
    }

    // -- body name validation ------------------------------------------------

    fn check_body_names(&mut self, body: &Block) {
        let stmts = body.stmts.clone();
        for stmt in &stmts {
            self.check_stmt_names(stmt);
        }
    }

    fn check_stmt_names(&mut self, stmt: &Stmt) {
        match stmt {
            Stmt::VarDecl { ty, init, .. } => {
                if let TypeExprKind::Named(name) = &ty.kind {
                    if !self.class_ids.contains_key(name) {
                        self.error("UnknownType", format!("unknown type '{name}'"), ty.span);
                    }
                }
                if let Some(e) = init {
                    self.check_expr_names(e);
                }
            }
            Stmt::Assign { target, value, .. } => {
                self.check_expr_names(target);
                self.check_expr_names(value);
            }
            Stmt::Expr { expr, .. }
            | Stmt::Print { value: expr, .. }
            | Stmt::Assert { cond: expr, .. } => self.check_expr_names(expr),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                ..
            } => {
                self.check_expr_names(cond);
                self.check_body_names(then_branch);
                if let Some(eb) = else_branch {
                    self.check_body_names(eb);
                }
            }
            Stmt::Return { value, .. } => {
                if let Some(e) = value {
                    self.check_expr_names(e);
                }
            }
        }
    }

    fn check_expr_names(&mut self, expr: &Expr) {
        match expr {
            Expr::New { class, args, .. } => {
                if !self.class_ids.contains_key(&class.text) {
                    self.error(
                        "UnknownType",
                        format!("unknown class '{}'", class.text),
                        class.span,
                    );
                }
                for a in args {
                    self.check_expr_names(a);
                }
            }
            Expr::InstanceOf { expr, class, .. } => {
                if !self.class_ids.contains_key(&class.text) {
                    self.error(
                        "UnknownType",
                        format!("unknown class '{}'", class.text),
                        class.span,
                    );
                }
                self.check_expr_names(expr);
            }
            Expr::Field { recv, .. } => self.check_expr_names(recv),
            Expr::Call { recv, args, .. } => {
                if let Some(r) = recv {
                    self.check_expr_names(r);
                }
                for a in args {
                    self.check_expr_names(a);
                }
            }
            Expr::SuperCall { args, .. } => {
                for a in args {
                    self.check_expr_names(a);
                }
            }
            Expr::ClassnameOf { expr, .. } => self.check_expr_names(expr),
            Expr::Binary { lhs, rhs, .. } => {
                self.check_expr_names(lhs);
                self.check_expr_names(rhs);
            }
            _ => {}
        }
    }
}

fn vis(v: ast::VisibilityDecl) -> Visibility {
    match v {
        ast::VisibilityDecl::Public => Visibility::Public,
        ast::VisibilityDecl::Private => Visibility::Private,
    }
}

fn merge_packages(unit: &Unit) -> Vec<MergedPackage<'_>> {
    let mut order: Vec<MergedPackage<'_>> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for pkg in &unit.packages {
        let slot = *index.entry(pkg.name.text.as_str()).or_insert_with(|| {
            order.push(MergedPackage {
                name: pkg.name.text.clone(),
                tests: Vec::new(),
                classes: Vec::new(),
            });
            order.len() - 1
        });
        order[slot].tests.extend(pkg.tests.iter());
        order[slot].classes.extend(pkg.classes.iter());
    }
    order
}

// ---------------------------------------------------------------------------
// Variance checking on redefined method signatures.

/// Checks every method redefinition edge: the redefining return type must
/// be the same type or a subclass, and every parameter the same type or a
/// superclass.
pub fn check_type_safety(model: &SealedModel) -> Vec<BindDiagnostic> {
    let mut diagnostics = Vec::new();
    for (redefiner, redefined) in model.relations().pairs(Relation::Redef) {
        let (Ok(l2), Ok(l1)) = (
            LocalPropId::from_id(redefiner),
            LocalPropId::from_id(redefined),
        ) else {
            continue;
        };
        let new = model.local_property(l2);
        let old = model.local_property(l1);
        let (
            Signature::Method {
                params: new_params,
                ret: new_ret,
            },
            Signature::Method {
                params: old_params,
                ret: old_ret,
            },
        ) = (&new.signature, &old.signature)
        else {
            continue;
        };
        let covariant = match (new_ret, old_ret) {
            (None, None) => true,
            (Some(n), Some(o)) => model.is_subtype(*n, *o),
            _ => false,
        };
        if !covariant {
            diagnostics.push(BindDiagnostic::error(
                "CovarianceViolation",
                format!(
                    "'{}' redefines '{}' with return type '{}', which is not '{}' or a subclass",
                    model.display_name(l2.id()),
                    model.display_name(l1.id()),
                    render_ret(model, new_ret),
                    render_ret(model, old_ret),
                ),
                new.span,
            ));
        }
        if new_params.len() != old_params.len() {
            diagnostics.push(BindDiagnostic::error(
                "ContravarianceViolation",
                format!(
                    "'{}' redefines '{}' with {} parameters instead of {}",
                    model.display_name(l2.id()),
                    model.display_name(l1.id()),
                    new_params.len(),
                    old_params.len(),
                ),
                new.span,
            ));
            continue;
        }
        for (new_p, old_p) in new_params.iter().zip(old_params) {
            if !model.is_subtype(old_p.ty, new_p.ty) {
                diagnostics.push(BindDiagnostic::error(
                    "ContravarianceViolation",
                    format!(
                        "'{}' narrows parameter '{}' to '{}', which is not '{}' or a superclass",
                        model.display_name(l2.id()),
                        old_p.name,
                        model.type_name(new_p.ty),
                        model.type_name(old_p.ty),
                    ),
                    new.span,
                ));
            }
        }
    }
    diagnostics
}

fn render_ret(model: &SealedModel, ret: &Option<TypeRef>) -> String {
    match ret {
        Some(t) => model.type_name(*t),
        None => "void".to_string(),
    }
}

// ---------------------------------------------------------------------------
// Method classification metadata.

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MethodClassification {
    /// Present in the class only through inheritance.
    Inherited,
    /// Redefinition whose body never calls the overridden version.
    RedefNoSuper,
    /// Redefinition that calls up via `super`.
    RedefWithSuper,
    /// First definition in its hierarchy.
    New,
}

impl MethodClassification {
    pub fn name(self) -> &'static str {
        match self {
            MethodClassification::Inherited => "inherited",
            MethodClassification::RedefNoSuper => "redefNoSuper",
            MethodClassification::RedefWithSuper => "redefWithSuper",
            MethodClassification::New => "new",
        }
    }
}

/// Classifies every (class, method family) pair visible in the model.
/// Informational only; the resolver re-runs inherited tests regardless.
pub fn classify_methods(
    model: &SealedModel,
) -> BTreeMap<(ClassId, GlobalPropId), MethodClassification> {
    let mut out = BTreeMap::new();
    for class in model.classes() {
        for gp in crate::resolver::visible_global_properties(model, class) {
            if model.global_property(gp).role != Role::Method {
                continue;
            }
            let own = model
                .own_local_properties(class)
                .into_iter()
                .find(|l| model.local_property(*l).global == gp);
            let classification = match own {
                None => MethodClassification::Inherited,
                Some(local) => {
                    let inherited_elsewhere = model.ancestors(class).any(|d| {
                        model
                            .own_local_properties(d)
                            .iter()
                            .any(|l| model.local_property(*l).global == gp)
                    });
                    if !inherited_elsewhere {
                        MethodClassification::New
                    } else {
                        let prop = model.local_property(local);
                        let calls_super = prop
                            .body
                            .map(|b| block_calls_super(model.body(b), &prop.name))
                            .unwrap_or(false);
                        if calls_super {
                            MethodClassification::RedefWithSuper
                        } else {
                            MethodClassification::RedefNoSuper
                        }
                    }
                }
            };
            out.insert((class, gp), classification);
        }
    }
    out
}

fn block_calls_super(block: &Block, name: &str) -> bool {
    block.stmts.iter().any(|s| stmt_calls_super(s, name))
}

fn stmt_calls_super(stmt: &Stmt, name: &str) -> bool {
    match stmt {
        Stmt::VarDecl { init, .. } => init.as_ref().is_some_and(|e| expr_calls_super(e, name)),
        Stmt::Assign { target, value, .. } => {
            expr_calls_super(target, name) || expr_calls_super(value, name)
        }
        Stmt::Expr { expr, .. }
        | Stmt::Print { value: expr, .. }
        | Stmt::Assert { cond: expr, .. } => expr_calls_super(expr, name),
        Stmt::If {
            cond,
            then_branch,
            else_branch,
            ..
        } => {
            expr_calls_super(cond, name)
                || block_calls_super(then_branch, name)
                || else_branch
                    .as_ref()
                    .is_some_and(|b| block_calls_super(b, name))
        }
        Stmt::Return { value, .. } => value.as_ref().is_some_and(|e| expr_calls_super(e, name)),
    }
}

fn expr_calls_super(expr: &Expr, name: &str) -> bool {
    match expr {
        Expr::SuperCall { name: n, args, .. } => {
            n.text == name || args.iter().any(|a| expr_calls_super(a, name))
        }
        Expr::Field { recv, .. } => expr_calls_super(recv, name),
        Expr::Call { recv, args, .. } => {
            recv.as_ref().is_some_and(|r| expr_calls_super(r, name))
                || args.iter().any(|a| expr_calls_super(a, name))
        }
        Expr::New { args, .. } => args.iter().any(|a| expr_calls_super(a, name)),
        Expr::ClassnameOf { expr, .. } | Expr::InstanceOf { expr, .. } => {
            expr_calls_super(expr, name)
        }
        Expr::Binary { lhs, rhs, .. } => expr_calls_super(lhs, name) || expr_calls_super(rhs, name),
        _ => false,
    }
}
