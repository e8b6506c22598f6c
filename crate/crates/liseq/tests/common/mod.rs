#![allow(dead_code)]

pub mod arb;

use std::path::{Path, PathBuf};

use liseq::lang::{parse_param, ParamProgram};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// `(name, source, program)` for each `*.pp` in `dir`, sorted by name.
pub fn load(dir: &Path) -> Vec<(String, String, ParamProgram)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pp"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|f| {
            let name = f.file_stem().unwrap().to_string_lossy().into_owned();
            let src = std::fs::read_to_string(&f).unwrap();
            let prog = parse_param(&src).unwrap_or_else(|d| panic!("{}", d.render(&name)));
            (name, src, prog)
        })
        .collect()
}

pub fn corpus() -> Vec<(String, String, ParamProgram)> {
    load(&corpus_dir())
}
