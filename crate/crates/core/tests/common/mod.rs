#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::fs;
use std::path::PathBuf;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// `(file name, contents)` of every `.dkg` in a corpus subdirectory, sorted.
pub fn read_dir(sub: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(corpus_dir().join(sub))
        .unwrap_or_else(|e| panic!("corpus/{sub}: {e}"))
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "dkg"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

pub fn valid_corpus() -> Vec<(String, String)> {
    read_dir("valid")
}

pub fn read(path: &str) -> String {
    fs::read_to_string(corpus_dir().join(path)).unwrap_or_else(|e| panic!("corpus/{path}: {e}"))
}

/// Planted `(code, line, col)` from a `// expect: CODE@L:C` first line.
pub fn planted(text: &str) -> (String, u32, u32) {
    let first = text.lines().next().unwrap_or_default();
    let spec = first.strip_prefix("// expect: ").expect("seeded files start with an expect line");
    let (code, pos) = spec.trim().split_once('@').expect("CODE@L:C");
    let (line, col) = pos.split_once(':').expect("L:C");
    (code.to_string(), line.parse().unwrap(), col.parse().unwrap())
}

pub fn seeded_corpus() -> Vec<(String, String)> {
    read_dir("seeded")
}

pub fn demo_sources() -> Vec<kdecl::retrieval::DemoSource> {
    serde_json::from_str(&read("demos/demos.json")).expect("demo corpus parses")
}

pub fn demo_store() -> kdecl::retrieval::DemoStore {
    let embedder = kdecl::retrieval::NgramEmbedder::new(kdecl::retrieval::DEFAULT_DIMENSION);
    kdecl::retrieval::DemoStore::build(&embedder, &demo_sources()).expect("demo store builds")
}

pub fn session_script(name: &str) -> kdecl::pipeline::SessionScript {
    serde_json::from_str(&read(&format!("sessions/{name}/script.json"))).expect("script parses")
}

pub fn session_responses(name: &str) -> std::collections::BTreeMap<String, Vec<String>> {
    serde_json::from_str(&read(&format!("sessions/{name}/responses.json"))).expect("responses parse")
}
