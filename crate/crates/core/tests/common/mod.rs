#![allow(dead_code)]

use std::path::PathBuf;

use num_complex::Complex64;
use serde::Deserialize;

use schottky_zeta::{GroupSpec, SchottkyGroup};

#[derive(Deserialize)]
struct SpecFile {
    #[allow(dead_code)]
    schema: String,
    #[serde(flatten)]
    group: GroupSpec,
}

pub const CORPUS: [&str; 4] = [
    "genus1_q0.1.json",
    "genus2_complex.json",
    "genus2_real.json",
    "genus3_real.json",
];

pub fn corpus(name: &str) -> SchottkyGroup {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", name].iter().collect();
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let spec: SpecFile = serde_json::from_str(&text).expect("corpus spec parses");
    SchottkyGroup::build(&spec.group).expect("corpus group builds")
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
