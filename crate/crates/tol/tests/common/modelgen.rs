//! Random TOL program generation for differential testing.
//!
//! Programs are built deterministically from a pool of random words, so a
//! proptest shrink replays the same construction with smaller inputs.
//! Hierarchies stay within the differential-test envelope: at most ten
//! classes, three parents per class, and three introduced test properties
//! per method family.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

pub const MAX_CLASSES: usize = 10;
pub const MAX_PARENTS: usize = 3;
pub const MAX_TESTS_PER_PROPERTY: usize = 3;

struct Pool<'a> {
    data: &'a [u32],
    cursor: usize,
}

impl<'a> Pool<'a> {
    fn next(&mut self) -> u32 {
        let v = self.data.get(self.cursor).copied().unwrap_or(0);
        self.cursor += 1;
        v
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> Option<T> {
        if items.is_empty() {
            None
        } else {
            Some(items[self.next() as usize % items.len()])
        }
    }
}

#[derive(Default)]
struct ClassState {
    parents: Vec<usize>,
    ancestors: BTreeSet<usize>,
    methods: BTreeSet<String>,
    /// Test properties introduced here: (test name, target method).
    gtp_intro: Vec<(String, String)>,
    /// Class tests introduced here.
    gtc_intro: Vec<String>,
    declared_tests: BTreeSet<String>,
}

/// Builds one random program with `class_count` classes, consuming
/// randomness from `data`.
pub fn build_program(class_count: usize, data: &[u32]) -> String {
    let class_count = class_count.clamp(1, MAX_CLASSES);
    let mut pool = Pool { data, cursor: 0 };
    let mut classes: Vec<ClassState> = Vec::new();
    let mut fresh_method = 0usize;
    let mut fresh_test = 0usize;
    let mut fresh_class_test = 0usize;
    let mut tests_per_method: BTreeMap<String, usize> = BTreeMap::new();

    let mut body = String::new();
    if pool.next() % 2 == 1 {
        body.push_str("    test PkgSmoke { print(\"pkg\"); }\n");
    }

    for i in 0..class_count {
        let mut state = ClassState::default();
        if i > 0 {
            let max = MAX_PARENTS.min(i);
            let count = pool.next() as usize % (max + 1);
            let mut available: Vec<usize> = (0..i).collect();
            for _ in 0..count {
                if available.is_empty() {
                    break;
                }
                let idx = pool.next() as usize % available.len();
                state.parents.push(available.remove(idx));
            }
        }
        for &p in &state.parents {
            state.ancestors.insert(p);
            let more: Vec<usize> = classes[p].ancestors.iter().copied().collect();
            state.ancestors.extend(more);
        }

        let inherited_methods: Vec<String> = state
            .ancestors
            .iter()
            .flat_map(|&a| classes[a].methods.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();

        let mut members = String::new();
        let method_actions = pool.next() as usize % 3;
        for _ in 0..method_actions {
            let redefinable: Vec<&String> = inherited_methods
                .iter()
                .filter(|m| !state.methods.contains(*m))
                .collect();
            let redef = pool.next() % 2 == 1 && !redefinable.is_empty();
            let name = if redef {
                redefinable[pool.next() as usize % redefinable.len()].clone()
            } else {
                fresh_method += 1;
                format!("m{fresh_method}")
            };
            if state.methods.contains(&name) {
                continue;
            }
            let _ = writeln!(
                members,
                "        public int {name}() {{ return {}; }}",
                pool.next() % 10
            );
            state.methods.insert(name);
        }

        let visible_methods: Vec<String> = state
            .methods
            .iter()
            .cloned()
            .chain(inherited_methods.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();

        let test_actions = pool.next() as usize % 3;
        for _ in 0..test_actions {
            // Redefine an inherited test property, or introduce a new one.
            let inherited_tests: Vec<(String, String)> = state
                .ancestors
                .iter()
                .flat_map(|&a| classes[a].gtp_intro.iter().cloned())
                .filter(|(name, _)| !state.declared_tests.contains(name))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let redef = pool.next() % 2 == 1 && !inherited_tests.is_empty();
            if redef {
                let (name, target) =
                    inherited_tests[pool.next() as usize % inherited_tests.len()].clone();
                let _ = writeln!(
                    members,
                    "        test {name} for {target} {{ print(\"r\"); }}"
                );
                state.declared_tests.insert(name);
            } else {
                let targets: Vec<&String> = visible_methods
                    .iter()
                    .filter(|m| {
                        tests_per_method.get(*m).copied().unwrap_or(0) < MAX_TESTS_PER_PROPERTY
                    })
                    .collect();
                let Some(target) = pool.pick(&targets) else {
                    continue;
                };
                fresh_test += 1;
                let name = format!("T{fresh_test}");
                let _ = writeln!(
                    members,
                    "        test {name} for {target} {{ print(\"t\"); }}"
                );
                *tests_per_method.entry(target.clone()).or_default() += 1;
                state.gtp_intro.push((name.clone(), target.clone()));
                state.declared_tests.insert(name);
            }
        }

        let class_test_actions = pool.next() as usize % 3;
        for _ in 0..class_test_actions {
            let inherited: Vec<String> = state
                .ancestors
                .iter()
                .flat_map(|&a| classes[a].gtc_intro.iter().cloned())
                .filter(|name| !state.declared_tests.contains(name))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let redef = pool.next() % 2 == 1 && !inherited.is_empty();
            let name = if redef {
                inherited[pool.next() as usize % inherited.len()].clone()
            } else {
                fresh_class_test += 1;
                let name = format!("K{fresh_class_test}");
                state.gtc_intro.push(name.clone());
                name
            };
            if state.declared_tests.contains(&name) {
                continue;
            }
            let _ = writeln!(members, "        test {name} {{ print(\"k\"); }}");
            state.declared_tests.insert(name);
        }

        let parent_list = if state.parents.is_empty() {
            String::new()
        } else {
            let names: Vec<String> = state.parents.iter().map(|p| format!("C{p}")).collect();
            format!(" extends {}", names.join(", "))
        };
        let _ = writeln!(body, "    class C{i}{parent_list} {{\n{members}    }}");
        classes.push(state);
    }

    format!("package generated {{\n{body}}}\n")
}

/// Same envelope restricted to single-parent trees with globally unique
/// test names; used by the conflict soundness property.
pub fn build_tree_program(class_count: usize, data: &[u32]) -> String {
    let class_count = class_count.clamp(1, MAX_CLASSES);
    let mut pool = Pool { data, cursor: 0 };
    let mut methods_by_class: Vec<Vec<String>> = Vec::new();
    let mut parent_of: Vec<Option<usize>> = Vec::new();
    let mut fresh = 0usize;
    let mut body = String::new();

    for i in 0..class_count {
        let parent = if i > 0 && !pool.next().is_multiple_of(4) {
            Some(pool.next() as usize % i)
        } else {
            None
        };
        parent_of.push(parent);
        let mut inherited = Vec::new();
        let mut walk = parent;
        while let Some(p) = walk {
            inherited.extend(methods_by_class[p].iter().cloned());
            walk = parent_of[p];
        }

        let mut own = Vec::new();
        let mut members = String::new();
        for _ in 0..(pool.next() as usize % 3) {
            let redefinable: Vec<&String> =
                inherited.iter().filter(|m| !own.contains(*m)).collect();
            if pool.next() % 2 == 1 && !redefinable.is_empty() {
                let name = redefinable[pool.next() as usize % redefinable.len()].clone();
                let _ = writeln!(members, "        public int {name}() {{ return 1; }}");
                own.push(name);
            } else {
                fresh += 1;
                let name = format!("m{fresh}");
                let _ = writeln!(members, "        public int {name}() {{ return 1; }}");
                own.push(name);
            }
        }
        let visible: Vec<String> = own
            .iter()
            .cloned()
            .chain(inherited.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for _ in 0..(pool.next() as usize % 3) {
            if let Some(target) = pool.pick(&visible.iter().collect::<Vec<_>>()) {
                fresh += 1;
                let _ = writeln!(
                    members,
                    "        test U{fresh} for {target} {{ print(\"u\"); }}"
                );
            }
        }
        let extends = match parent {
            Some(p) => format!(" extends C{p}"),
            None => String::new(),
        };
        let _ = writeln!(body, "    class C{i}{extends} {{\n{members}    }}");
        methods_by_class.push(own);
    }
    format!("package generated {{\n{body}}}\n")
}
