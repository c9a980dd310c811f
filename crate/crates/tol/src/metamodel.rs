//! The immutable entity/relation store at the heart of the toolchain.
//!
//! A `Model` is built entity by entity during binding, then sealed into a
//! `SealedModel` that validates every structural invariant (acyclic class
//! graph, functional `belongs` and `intro`, acyclic `redef`) and precomputes
//! the transitive superclass sets the resolver queries.
//!
//! Nine entity kinds exist: packages, classes, global/local properties,
//! global/local test properties, global/local test classes, and package
//! tests. Five relations connect them: `redef`, `has`, `intro`, `belongs`,
//! and `def`.

use crate::conflicts::{AppliedResolution, Resolution};
use crate::frontend::ast::{Block, Expr};
use crate::span::Span;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EntityKind {
    Package,
    Class,
    GlobalProperty,
    LocalProperty,
    GlobalTestProperty,
    LocalTestProperty,
    GlobalTestClass,
    LocalTestClass,
    TestPackage,
}

impl EntityKind {
    pub fn name(self) -> &'static str {
        match self {
            EntityKind::Package => "Package",
            EntityKind::Class => "Class",
            EntityKind::GlobalProperty => "GlobalProperty",
            EntityKind::LocalProperty => "LocalProperty",
            EntityKind::GlobalTestProperty => "GlobalTestProperty",
            EntityKind::LocalTestProperty => "LocalTestProperty",
            EntityKind::GlobalTestClass => "GlobalTestClass",
            EntityKind::LocalTestClass => "LocalTestClass",
            EntityKind::TestPackage => "TestPackage",
        }
    }
}

/// Handle to one entity: its kind plus a dense index into the entity
/// arena. Indices are allocated in insertion order and never reused, so
/// they double as stable ids in the JSON dump.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EntityId {
    pub kind: EntityKind,
    pub index: u32,
}

impl EntityId {
    pub fn new(kind: EntityKind, index: u32) -> Self {
        EntityId { kind, index }
    }
}

macro_rules! typed_id {
    ($name:ident, $kind:ident) => {
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
        pub struct $name(EntityId);

        impl $name {
            pub fn id(self) -> EntityId {
                self.0
            }

            pub fn index(self) -> u32 {
                self.0.index
            }

            pub fn from_id(id: EntityId) -> Result<Self, ModelError> {
                if id.kind == EntityKind::$kind {
                    Ok($name(id))
                } else {
                    Err(ModelError::KindMismatch {
                        expected: EntityKind::$kind,
                        got: id.kind,
                    })
                }
            }
        }
    };
}

typed_id!(PackageId, Package);
typed_id!(ClassId, Class);
typed_id!(GlobalPropId, GlobalProperty);
typed_id!(LocalPropId, LocalProperty);
typed_id!(GtpId, GlobalTestProperty);
typed_id!(LtpId, LocalTestProperty);
typed_id!(GtcId, GlobalTestClass);
typed_id!(LtcId, LocalTestClass);
typed_id!(TestPackageId, TestPackage);

/// Handle to a statement block owned by the model (method, constructor,
/// or test body).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BodyId(pub u32);

/// Handle to a field initializer expression owned by the model.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ExprId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Role {
    Field,
    Method,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Visibility {
    Public,
    Private,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TestLevel {
    Property,
    Class,
    Package,
}

/// A resolved type in signatures: a built-in or a bound class.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TypeRef {
    Int,
    Bool,
    Str,
    Color,
    Class(ClassId),
}

#[derive(Clone, Debug)]
pub struct ParamSig {
    pub name: String,
    pub ty: TypeRef,
}

#[derive(Clone, Debug)]
pub enum Signature {
    Field {
        ty: TypeRef,
    },
    Method {
        params: Vec<ParamSig>,
        ret: Option<TypeRef>,
    },
}

#[derive(Clone, Debug)]
pub struct Ctor {
    pub visibility: Visibility,
    pub params: Vec<ParamSig>,
    pub body: BodyId,
}

#[derive(Clone, Debug)]
pub struct PackageEntry {
    pub name: String,
    pub declaration_index: u32,
}

#[derive(Clone, Debug)]
pub struct ClassEntry {
    pub name: String,
    pub package: PackageId,
    /// Direct parents in declaration order; must be duplicate-free and,
    /// across the whole model, acyclic.
    pub parents: Vec<ClassId>,
    pub declaration_index: u32,
    pub ctor: Option<Ctor>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct GlobalPropertyEntry {
    pub name: String,
    pub role: Role,
    pub introducer: ClassId,
}

#[derive(Clone, Debug)]
pub struct PropertyEntry {
    pub role: Role,
    pub name: String,
    pub signature: Signature,
    pub visibility: Visibility,
    pub owner: ClassId,
    pub global: GlobalPropId,
    pub declaration_index: u32,
    pub body: Option<BodyId>,
    pub field_init: Option<ExprId>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct GlobalTestEntry {
    pub name: String,
    pub introducer: ClassId,
}

#[derive(Clone, Debug)]
pub struct TestEntry {
    pub level: TestLevel,
    pub name: String,
    /// The class (property/class tests) or package (package tests) whose
    /// body declares this test.
    pub owner: EntityId,
    /// Global property for property tests, class for class tests, package
    /// for package tests.
    pub target: EntityId,
    /// Global test entity this local test belongs to; absent for package
    /// tests, which have no global/local split.
    pub global: Option<EntityId>,
    pub body: BodyId,
    pub declaration_index: u32,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum Entry {
    Package(PackageEntry),
    Class(ClassEntry),
    GlobalProperty(GlobalPropertyEntry),
    LocalProperty(PropertyEntry),
    GlobalTestProperty(GlobalTestEntry),
    GlobalTestClass(GlobalTestEntry),
    Test(TestEntry),
}

impl Entry {
    fn kind(&self) -> EntityKind {
        match self {
            Entry::Package(_) => EntityKind::Package,
            Entry::Class(_) => EntityKind::Class,
            Entry::GlobalProperty(_) => EntityKind::GlobalProperty,
            Entry::LocalProperty(_) => EntityKind::LocalProperty,
            Entry::GlobalTestProperty(_) => EntityKind::GlobalTestProperty,
            Entry::GlobalTestClass(_) => EntityKind::GlobalTestClass,
            Entry::Test(t) => match t.level {
                TestLevel::Property => EntityKind::LocalTestProperty,
                TestLevel::Class => EntityKind::LocalTestClass,
                TestLevel::Package => EntityKind::TestPackage,
            },
        }
    }

    fn name(&self) -> &str {
        match self {
            Entry::Package(e) => &e.name,
            Entry::Class(e) => &e.name,
            Entry::GlobalProperty(e) => &e.name,
            Entry::LocalProperty(e) => &e.name,
            Entry::GlobalTestProperty(e) | Entry::GlobalTestClass(e) => &e.name,
            Entry::Test(e) => &e.name,
        }
    }

    fn owner(&self) -> Option<EntityId> {
        match self {
            Entry::Package(_) => None,
            Entry::Class(e) => Some(e.package.id()),
            Entry::GlobalProperty(e) => Some(e.introducer.id()),
            Entry::LocalProperty(e) => Some(e.owner.id()),
            Entry::GlobalTestProperty(e) | Entry::GlobalTestClass(e) => Some(e.introducer.id()),
            Entry::Test(e) => Some(e.owner),
        }
    }

    fn role(&self) -> Option<Role> {
        match self {
            Entry::GlobalProperty(e) => Some(e.role),
            Entry::LocalProperty(e) => Some(e.role),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Relation {
    Redef,
    Has,
    Intro,
    Belongs,
    Def,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::Redef => "redef",
            Relation::Has => "has",
            Relation::Intro => "intro",
            Relation::Belongs => "belongs",
            Relation::Def => "def",
        }
    }

    pub const ALL: [Relation; 5] = [
        Relation::Redef,
        Relation::Has,
        Relation::Intro,
        Relation::Belongs,
        Relation::Def,
    ];
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("duplicate {kind} '{name}' in the same scope", kind = .kind.name())]
    DuplicateEntity { kind: EntityKind, name: String },
    #[error("expected a {expected} handle, got {got}", expected = .expected.name(), got = .got.name())]
    KindMismatch {
        expected: EntityKind,
        got: EntityKind,
    },
    #[error("{relation} does not admit ({from}, {to}) endpoints", relation = .relation.name(), from = .from.name(), to = .to.name())]
    InadmissiblePair {
        relation: Relation,
        from: EntityKind,
        to: EntityKind,
    },
    #[error("relating {from:?} to {to:?} would make redef cyclic")]
    RelationCycle { from: EntityId, to: EntityId },
    #[error("unknown entity handle {0:?}")]
    UnknownEntity(EntityId),
    #[error("model is invalid: {}", .reasons.iter().map(|r| r.message.as_str()).collect::<Vec<_>>().join("; "))]
    ModelInvalid { reasons: Vec<InvalidReason> },
}

/// One structural violation found while sealing, with the entities at fault.
#[derive(Clone, Debug)]
pub struct InvalidReason {
    pub message: String,
    pub entities: Vec<EntityId>,
}

/// Set-valued relation storage. Pairs are deduplicated and iterate in
/// (from, to) index order, which is insertion-independent and stable.
#[derive(Clone, Debug, Default)]
pub struct RelationStore {
    sets: BTreeMap<Relation, BTreeSet<(EntityId, EntityId)>>,
}

impl RelationStore {
    fn insert(&mut self, rel: Relation, from: EntityId, to: EntityId) {
        self.sets.entry(rel).or_default().insert((from, to));
    }

    pub fn contains(&self, rel: Relation, from: EntityId, to: EntityId) -> bool {
        self.sets
            .get(&rel)
            .map(|s| s.contains(&(from, to)))
            .unwrap_or(false)
    }

    pub fn pairs(&self, rel: Relation) -> impl Iterator<Item = (EntityId, EntityId)> + '_ {
        self.sets.get(&rel).into_iter().flatten().copied()
    }

    /// All `to` endpoints for pairs whose `from` matches.
    pub fn targets(&self, rel: Relation, from: EntityId) -> Vec<EntityId> {
        self.pairs(rel)
            .filter(|(f, _)| *f == from)
            .map(|(_, t)| t)
            .collect()
    }

    /// All `from` endpoints for pairs whose `to` matches.
    pub fn sources(&self, rel: Relation, to: EntityId) -> Vec<EntityId> {
        self.pairs(rel)
            .filter(|(_, t)| *t == to)
            .map(|(f, _)| f)
            .collect()
    }
}

fn admissible(rel: Relation, from: EntityKind, to: EntityKind) -> bool {
    use EntityKind::*;
    match rel {
        Relation::Redef => {
            from == to && matches!(from, LocalProperty | LocalTestProperty | LocalTestClass)
        }
        Relation::Has => matches!(
            (from, to),
            (Package, TestPackage)
                | (Package, Class)
                | (Class, GlobalProperty)
                | (LocalProperty, GlobalTestProperty)
        ),
        Relation::Intro => matches!(
            (from, to),
            (Class, GlobalProperty) | (Class, GlobalTestProperty) | (Class, GlobalTestClass)
        ),
        Relation::Belongs => matches!(
            (from, to),
            (LocalProperty, GlobalProperty)
                | (LocalTestProperty, GlobalTestProperty)
                | (LocalTestClass, GlobalTestClass)
        ),
        Relation::Def => matches!(
            (from, to),
            (Class, LocalProperty)
                | (Class, LocalTestProperty)
                | (Class, LocalTestClass)
                | (Package, TestPackage)
        ),
    }
}

/// A model under construction. Single-threaded by design; `seal` consumes
/// it, so a sealed model can never be mutated again.
#[derive(Clone, Debug, Default)]
pub struct Model {
    entities: Vec<Entry>,
    names: HashMap<(EntityKind, Option<EntityId>, String, Option<Role>), EntityId>,
    relations: RelationStore,
    bodies: Vec<Block>,
    field_inits: Vec<Expr>,
    declared_resolutions: Vec<Resolution>,
}

impl Model {
    pub fn new() -> Self {
        Model::default()
    }

    /// Inserts an entity and returns its fresh handle. The (kind, owner,
    /// name) triple, refined by role for properties, must be unique.
    pub fn add_entity(&mut self, entry: Entry) -> Result<EntityId, ModelError> {
        let kind = entry.kind();
        let key = (kind, entry.owner(), entry.name().to_string(), entry.role());
        if self.names.contains_key(&key) {
            return Err(ModelError::DuplicateEntity {
                kind,
                name: entry.name().to_string(),
            });
        }
        let id = EntityId::new(kind, self.entities.len() as u32);
        self.names.insert(key, id);
        self.entities.push(entry);
        Ok(id)
    }

    /// Records a relation pair. Repeats are idempotent. Endpoints must
    /// exist, their kinds must be admissible for the relation, and a
    /// `redef` pair must not close a cycle (self-loops included).
    pub fn relate(
        &mut self,
        rel: Relation,
        from: EntityId,
        to: EntityId,
    ) -> Result<(), ModelError> {
        self.check_exists(from)?;
        self.check_exists(to)?;
        if !admissible(rel, from.kind, to.kind) {
            return Err(ModelError::InadmissiblePair {
                relation: rel,
                from: from.kind,
                to: to.kind,
            });
        }
        if rel == Relation::Redef && (from == to || self.redef_reaches(from, to)) {
            return Err(ModelError::RelationCycle { from, to });
        }
        self.relations.insert(rel, from, to);
        Ok(())
    }

    /// True when `start` is reachable from `goal` along existing redef
    /// edges, i.e. adding (start -> goal) would close a cycle.
    fn redef_reaches(&self, start: EntityId, goal: EntityId) -> bool {
        let mut stack = vec![goal];
        let mut seen = BTreeSet::new();
        while let Some(node) = stack.pop() {
            if node == start {
                return true;
            }
            if seen.insert(node) {
                stack.extend(self.relations.targets(Relation::Redef, node));
            }
        }
        false
    }

    fn check_exists(&self, id: EntityId) -> Result<(), ModelError> {
        match self.entities.get(id.index as usize) {
            Some(e) if e.kind() == id.kind => Ok(()),
            Some(_) => Err(ModelError::KindMismatch {
                expected: id.kind,
                got: self.entities[id.index as usize].kind(),
            }),
            None => Err(ModelError::UnknownEntity(id)),
        }
    }

    pub fn add_body(&mut self, body: Block) -> BodyId {
        let id = BodyId(self.bodies.len() as u32);
        self.bodies.push(body);
        id
    }

    pub fn add_field_init(&mut self, expr: Expr) -> ExprId {
        let id = ExprId(self.field_inits.len() as u32);
        self.field_inits.push(expr);
        id
    }

    pub fn set_declared_resolutions(&mut self, resolutions: Vec<Resolution>) {
        self.declared_resolutions = resolutions;
    }

    pub fn entity(&self, id: EntityId) -> Option<&Entry> {
        self.entities
            .get(id.index as usize)
            .filter(|e| e.kind() == id.kind)
    }

    pub fn entity_mut(&mut self, id: EntityId) -> Option<&mut Entry> {
        self.entities
            .get_mut(id.index as usize)
            .filter(|e| e.kind() == id.kind)
    }

    pub fn relations_mut(&mut self) -> &mut RelationStore {
        &mut self.relations
    }

    pub fn entity_ids_of_kind(&self, kind: EntityKind) -> Vec<EntityId> {
        self.entities
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind() == kind)
            .map(|(i, _)| EntityId::new(kind, i as u32))
            .collect()
    }

    /// Ancestors-or-self along the parent lists, nearest first. Building
    /// phase only; sealed models use the memoized closure instead.
    pub fn hierarchy_of(&self, class: ClassId) -> Vec<ClassId> {
        let mut queue = std::collections::VecDeque::from([class]);
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        while let Some(d) = queue.pop_front() {
            if !seen.insert(d) {
                continue;
            }
            order.push(d);
            if let Some(Entry::Class(c)) = self.entity(d.id()) {
                queue.extend(c.parents.iter().copied());
            }
        }
        order
    }

    /// Global property families of the locals `class` declares itself.
    pub fn locals_of(&self, class: ClassId) -> Vec<EntityId> {
        let mut out = Vec::new();
        for entry in &self.entities {
            if let Entry::LocalProperty(p) = entry {
                if p.owner == class && !out.contains(&p.global.id()) {
                    out.push(p.global.id());
                }
            }
        }
        out
    }

    /// Removes a relation pair; used when a resolution rewires the model.
    pub fn unrelate(&mut self, rel: Relation, from: EntityId, to: EntityId) {
        if let Some(set) = self.relations.sets.get_mut(&rel) {
            set.remove(&(from, to));
        }
    }

    /// Validates every structural invariant and freezes the model.
    pub fn seal(self) -> Result<SealedModel, ModelError> {
        let mut reasons = Vec::new();
        let class_count = self.entities.len();

        // Parent lists: endpoints exist, are classes, and are duplicate-free.
        for (idx, entry) in self.entities.iter().enumerate() {
            if let Entry::Class(c) = entry {
                let id = EntityId::new(EntityKind::Class, idx as u32);
                let mut seen = BTreeSet::new();
                for p in &c.parents {
                    if !seen.insert(p.index()) {
                        reasons.push(InvalidReason {
                            message: format!("class '{}' lists a parent twice", c.name),
                            entities: vec![id, p.id()],
                        });
                    }
                    match self.entities.get(p.index() as usize) {
                        Some(Entry::Class(_)) => {}
                        _ => reasons.push(InvalidReason {
                            message: format!("class '{}' has an unknown parent handle", c.name),
                            entities: vec![id, p.id()],
                        }),
                    }
                }
            }
        }

        // Subclass graph must be a DAG: no class may reach itself.
        let mut ancestors: HashMap<u32, BTreeSet<u32>> = HashMap::new();
        if reasons.is_empty() {
            let mut visiting = vec![0u8; class_count]; // 0 new, 1 open, 2 done
            for idx in 0..class_count {
                if matches!(self.entities[idx], Entry::Class(_)) {
                    self.close_ancestors(idx as u32, &mut visiting, &mut ancestors, &mut reasons);
                }
            }
        }

        // belongs is total and functional on every local entity; intro is
        // functional on global tests.
        for (idx, entry) in self.entities.iter().enumerate() {
            let id = EntityId::new(entry.kind(), idx as u32);
            match entry.kind() {
                EntityKind::LocalProperty
                | EntityKind::LocalTestProperty
                | EntityKind::LocalTestClass => {
                    let n = self.relations.targets(Relation::Belongs, id).len();
                    if n != 1 {
                        reasons.push(InvalidReason {
                            message: format!(
                                "local entity '{}' must belong to exactly one global entity, found {}",
                                entry.name(),
                                n
                            ),
                            entities: vec![id],
                        });
                    }
                }
                EntityKind::GlobalTestProperty | EntityKind::GlobalTestClass => {
                    let n = self.relations.sources(Relation::Intro, id).len();
                    if n != 1 {
                        reasons.push(InvalidReason {
                            message: format!(
                                "global test '{}' must be introduced by exactly one class, found {}",
                                entry.name(),
                                n
                            ),
                            entities: vec![id],
                        });
                    }
                }
                _ => {}
            }
        }

        // Name identity is what joins a family: every local entity carries
        // its global entity's name.
        for (from, to) in self.relations.pairs(Relation::Belongs) {
            let (Some(local), Some(global)) = (self.entity(from), self.entity(to)) else {
                continue;
            };
            if local.name() != global.name() {
                reasons.push(InvalidReason {
                    message: format!(
                        "local entity '{}' belongs to a global entity named '{}'",
                        local.name(),
                        global.name()
                    ),
                    entities: vec![from, to],
                });
            }
        }

        // redef acyclicity is enforced on insertion; re-check here so that
        // hand-built models cannot slip through a different construction path.
        if let Some(cycle) = self.find_redef_cycle() {
            reasons.push(InvalidReason {
                message: "redef contains a cycle".to_string(),
                entities: cycle,
            });
        }

        if !reasons.is_empty() {
            return Err(ModelError::ModelInvalid { reasons });
        }

        let mut depths: HashMap<u32, u32> = HashMap::new();
        for idx in 0..self.entities.len() {
            if matches!(self.entities[idx], Entry::Class(_)) {
                self.class_depth(idx as u32, &mut depths);
            }
        }

        Ok(SealedModel {
            inner: self,
            ancestors,
            depths,
            applied_resolutions: Vec::new(),
        })
    }

    fn close_ancestors(
        &self,
        idx: u32,
        visiting: &mut [u8],
        ancestors: &mut HashMap<u32, BTreeSet<u32>>,
        reasons: &mut Vec<InvalidReason>,
    ) {
        if visiting[idx as usize] == 2 {
            return;
        }
        if visiting[idx as usize] == 1 {
            reasons.push(InvalidReason {
                message: "class hierarchy contains a cycle".to_string(),
                entities: vec![EntityId::new(EntityKind::Class, idx)],
            });
            return;
        }
        visiting[idx as usize] = 1;
        let mut acc = BTreeSet::new();
        if let Some(Entry::Class(c)) = self.entities.get(idx as usize) {
            for p in &c.parents {
                if acc.contains(&p.index()) {
                    continue;
                }
                self.close_ancestors(p.index(), visiting, ancestors, reasons);
                if p.index() == idx || ancestors.get(&p.index()).is_some_and(|a| a.contains(&idx)) {
                    reasons.push(InvalidReason {
                        message: format!("class '{}' is its own ancestor", c.name),
                        entities: vec![EntityId::new(EntityKind::Class, idx)],
                    });
                    continue;
                }
                acc.insert(p.index());
                if let Some(pa) = ancestors.get(&p.index()) {
                    acc.extend(pa.iter().copied());
                }
            }
        }
        ancestors.insert(idx, acc);
        visiting[idx as usize] = 2;
    }

    fn class_depth(&self, idx: u32, depths: &mut HashMap<u32, u32>) -> u32 {
        if let Some(d) = depths.get(&idx) {
            return *d;
        }
        let d = match &self.entities[idx as usize] {
            Entry::Class(c) => c
                .parents
                .iter()
                .map(|p| self.class_depth(p.index(), depths) + 1)
                .max()
                .unwrap_or(0),
            _ => 0,
        };
        depths.insert(idx, d);
        d
    }

    fn find_redef_cycle(&self) -> Option<Vec<EntityId>> {
        let nodes: BTreeSet<EntityId> = self
            .relations
            .pairs(Relation::Redef)
            .flat_map(|(a, b)| [a, b])
            .collect();
        let mut state: BTreeMap<EntityId, u8> = BTreeMap::new();
        for &node in &nodes {
            if self.redef_dfs(node, &mut state) {
                return Some(vec![node]);
            }
        }
        None
    }

    fn redef_dfs(&self, node: EntityId, state: &mut BTreeMap<EntityId, u8>) -> bool {
        match state.get(&node) {
            Some(1) => return true,
            Some(2) => return false,
            _ => {}
        }
        state.insert(node, 1);
        for next in self.relations.targets(Relation::Redef, node) {
            if self.redef_dfs(next, state) {
                return true;
            }
        }
        state.insert(node, 2);
        false
    }
}

/// An immutable, validated model. Deeply immutable, so any number of
/// threads may read it concurrently without locking.
#[derive(Clone, Debug)]
pub struct SealedModel {
    inner: Model,
    ancestors: HashMap<u32, BTreeSet<u32>>,
    depths: HashMap<u32, u32>,
    applied_resolutions: Vec<AppliedResolution>,
}

impl SealedModel {
    pub fn entity(&self, id: EntityId) -> &Entry {
        self.inner
            .entity(id)
            .unwrap_or_else(|| panic!("dangling or wrong-kind handle {id:?}"))
    }

    pub fn entity_count(&self) -> usize {
        self.inner.entities.len()
    }

    pub fn entities(&self) -> impl Iterator<Item = (EntityId, &Entry)> {
        self.inner
            .entities
            .iter()
            .enumerate()
            .map(|(i, e)| (EntityId::new(e.kind(), i as u32), e))
    }

    pub fn relations(&self) -> &RelationStore {
        &self.inner.relations
    }

    pub fn body(&self, id: BodyId) -> &Block {
        &self.inner.bodies[id.0 as usize]
    }

    pub fn field_init(&self, id: ExprId) -> &Expr {
        &self.inner.field_inits[id.0 as usize]
    }

    pub fn declared_resolutions(&self) -> &[Resolution] {
        &self.inner.declared_resolutions
    }

    pub fn applied_resolutions(&self) -> &[AppliedResolution] {
        &self.applied_resolutions
    }

    pub fn with_applied_resolutions(mut self, applied: Vec<AppliedResolution>) -> Self {
        self.applied_resolutions = applied;
        self
    }

    /// Clones the underlying store back into building phase, dropping the
    /// memoized closure data. Used by resolution rewrites.
    pub fn to_builder(&self) -> Model {
        self.inner.clone()
    }

    // -- typed accessors ----------------------------------------------------

    pub fn package(&self, id: PackageId) -> &PackageEntry {
        match self.entity(id.id()) {
            Entry::Package(e) => e,
            _ => unreachable!(),
        }
    }

    pub fn class(&self, id: ClassId) -> &ClassEntry {
        match self.entity(id.id()) {
            Entry::Class(e) => e,
            _ => unreachable!(),
        }
    }

    pub fn global_property(&self, id: GlobalPropId) -> &GlobalPropertyEntry {
        match self.entity(id.id()) {
            Entry::GlobalProperty(e) => e,
            _ => unreachable!(),
        }
    }

    pub fn local_property(&self, id: LocalPropId) -> &PropertyEntry {
        match self.entity(id.id()) {
            Entry::LocalProperty(e) => e,
            _ => unreachable!(),
        }
    }

    pub fn global_test(&self, id: EntityId) -> &GlobalTestEntry {
        match self.entity(id) {
            Entry::GlobalTestProperty(e) | Entry::GlobalTestClass(e) => e,
            _ => panic!("not a global test handle: {id:?}"),
        }
    }

    pub fn test(&self, id: EntityId) -> &TestEntry {
        match self.entity(id) {
            Entry::Test(e) => e,
            _ => panic!("not a test handle: {id:?}"),
        }
    }

    pub fn packages(&self) -> Vec<PackageId> {
        self.by_kind(EntityKind::Package)
            .map(|id| PackageId::from_id(id).unwrap())
            .collect()
    }

    pub fn classes(&self) -> Vec<ClassId> {
        self.by_kind(EntityKind::Class)
            .map(|id| ClassId::from_id(id).unwrap())
            .collect()
    }

    pub fn global_properties(&self) -> Vec<GlobalPropId> {
        self.by_kind(EntityKind::GlobalProperty)
            .map(|id| GlobalPropId::from_id(id).unwrap())
            .collect()
    }

    fn by_kind(&self, kind: EntityKind) -> impl Iterator<Item = EntityId> + '_ {
        self.entities()
            .filter(move |(id, _)| id.kind == kind)
            .map(|(id, _)| id)
    }

    /// Transitive superclasses of `c`, excluding `c` itself.
    pub fn ancestors(&self, c: ClassId) -> impl Iterator<Item = ClassId> + '_ {
        self.ancestors
            .get(&c.index())
            .into_iter()
            .flatten()
            .map(|&i| ClassId::from_id(EntityId::new(EntityKind::Class, i)).unwrap())
    }

    pub fn ancestors_or_self(&self, c: ClassId) -> Vec<ClassId> {
        let mut all: Vec<ClassId> = self.ancestors(c).collect();
        all.push(c);
        all.sort();
        all
    }

    pub fn is_ancestor_or_self(&self, maybe_ancestor: ClassId, c: ClassId) -> bool {
        maybe_ancestor == c
            || self
                .ancestors
                .get(&c.index())
                .is_some_and(|a| a.contains(&maybe_ancestor.index()))
    }

    /// Longest parent-path distance from a root class.
    pub fn depth(&self, c: ClassId) -> u32 {
        self.depths.get(&c.index()).copied().unwrap_or(0)
    }

    /// Whether `a` is `b` or a subclass of `b`.
    pub fn is_subclass_or_eq(&self, a: ClassId, b: ClassId) -> bool {
        self.is_ancestor_or_self(b, a)
    }

    /// Subtype check used by the variance rules; built-ins only relate to
    /// themselves.
    pub fn is_subtype(&self, a: TypeRef, b: TypeRef) -> bool {
        match (a, b) {
            (TypeRef::Class(a), TypeRef::Class(b)) => self.is_subclass_or_eq(a, b),
            _ => a == b,
        }
    }

    /// Local properties declared by class `d` itself, in declaration order.
    pub fn own_local_properties(&self, d: ClassId) -> Vec<LocalPropId> {
        let mut props: Vec<LocalPropId> = self
            .entities()
            .filter_map(|(id, e)| match e {
                Entry::LocalProperty(p) if p.owner == d => Some(LocalPropId::from_id(id).unwrap()),
                _ => None,
            })
            .collect();
        props.sort_by_key(|p| self.local_property(*p).declaration_index);
        props
    }

    /// Local tests (property or class level) declared by class `d`.
    pub fn own_tests(&self, d: ClassId, level: TestLevel) -> Vec<EntityId> {
        let mut tests: Vec<EntityId> = self
            .entities()
            .filter_map(|(id, e)| match e {
                Entry::Test(t) if t.owner == d.id() && t.level == level => Some(id),
                _ => None,
            })
            .collect();
        tests.sort_by_key(|id| self.test(*id).declaration_index);
        tests
    }

    pub fn class_by_name(&self, name: &str) -> Option<ClassId> {
        self.classes()
            .into_iter()
            .find(|c| self.class(*c).name == name)
    }

    /// Display name for any entity, qualified by its owner class where that
    /// helps (`Cow.lastFoodEaten`).
    pub fn display_name(&self, id: EntityId) -> String {
        match self.entity(id) {
            Entry::Package(e) => e.name.clone(),
            Entry::Class(e) => e.name.clone(),
            Entry::GlobalProperty(e) => e.name.clone(),
            Entry::LocalProperty(e) => {
                format!("{}.{}", self.class(e.owner).name, e.name)
            }
            Entry::GlobalTestProperty(e) | Entry::GlobalTestClass(e) => {
                format!("{}.{}", self.class(e.introducer).name, e.name)
            }
            Entry::Test(e) => {
                let owner = match self.entity(e.owner) {
                    Entry::Class(c) => c.name.clone(),
                    Entry::Package(p) => p.name.clone(),
                    _ => "?".to_string(),
                };
                format!("{owner}.{}", e.name)
            }
        }
    }

    pub fn type_name(&self, ty: TypeRef) -> String {
        match ty {
            TypeRef::Int => "int".to_string(),
            TypeRef::Bool => "bool".to_string(),
            TypeRef::Str => "string".to_string(),
            TypeRef::Color => "Color".to_string(),
            TypeRef::Class(c) => self.class(c).name.clone(),
        }
    }
}
