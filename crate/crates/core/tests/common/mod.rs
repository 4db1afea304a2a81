#![allow(dead_code)]

use std::path::PathBuf;
use trusskit::explore::TangleBundle;
use trusskit::io::{parse, Document};
use trusskit::tangle::TanglePresentation;

pub const FIXTURES: &[&str] = &[
    "pt", "pt2", "cap", "strand", "circle", "bifur", "stacked", "side", "wiggle2", "stacked_side",
];

pub fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

pub fn text(name: &str) -> String {
    std::fs::read_to_string(path(name)).unwrap()
}

pub fn doc(name: &str) -> Document {
    parse(&text(name)).unwrap()
}

pub fn tangle(name: &str) -> TanglePresentation {
    match doc(name) {
        Document::Tangle(t) => t,
        d => panic!("{name} is a {}", d.kind()),
    }
}

pub fn certificate(name: &str) -> TangleBundle {
    match doc(name) {
        Document::Certificate(t) | Document::Bundle(t) => t,
        d => panic!("{name} is a {}", d.kind()),
    }
}
