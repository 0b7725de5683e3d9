#![allow(dead_code)]

use std::path::{Path, PathBuf};

use quantikz::cli::sidecar_sheet;
use quantikz::pipeline::{compile, Compiled};
use quantikz::render::emit_json;
use quantikz::style::StyleSheet;

pub fn dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

/// Corpus circuits in name order.
pub fn corpus() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "qtz"))
        .collect();
    files.sort();
    files
}

pub fn stem(p: &Path) -> String {
    p.file_stem().unwrap().to_string_lossy().into_owned()
}

/// Compiles a file the way `qtkz render` does, sidecar styles included.
pub fn compile_file(p: &Path) -> Compiled {
    let src = std::fs::read_to_string(p).unwrap();
    let sheet = sidecar_sheet(p, &StyleSheet::default()).unwrap();
    compile(&src, &sheet).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn golden_path(p: &Path) -> PathBuf {
    dir("golden").join(format!("{}.json", stem(p)))
}

/// The JSON scene as the CLI writes it.
pub fn json_of(p: &Path) -> String {
    emit_json(&compile_file(p).scene) + "\n"
}

pub fn compile_src(src: &str) -> Compiled {
    compile(src, &StyleSheet::default()).unwrap_or_else(|e| panic!("{e}\n{src}"))
}
