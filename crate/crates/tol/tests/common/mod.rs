// Shared by several test binaries; not every binary uses every helper.
#![allow(dead_code)]

pub mod modelgen;
pub mod oracle;

use std::path::PathBuf;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_source(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture readable")
}

pub fn tol_binary() -> &'static str {
    env!("CARGO_BIN_EXE_tol")
}

pub fn all_fixture_files() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .expect("fixtures directory")
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "tol"))
        .collect();
    files.sort();
    files
}
