//! Shared fixtures for the benchmarks.

use std::path::{Path, PathBuf};

use kstab_core::caserunner::{load_case, Case};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn case(rel: &str) -> Case {
    load_case(&corpus_dir().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}
