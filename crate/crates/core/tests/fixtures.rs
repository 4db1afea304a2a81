mod common;

use common::tangle;
use std::collections::BTreeMap;
use trusskit::diagram::is_manifold_diagram;
use trusskit::explore::{is_coherence, is_path};
use trusskit::poset::Verdict;
use trusskit::tangle::*;

const TANGLES: &[&str] = &["pt", "pt2", "cap", "strand", "circle", "stacked", "side", "wiggle2", "braid"];

fn profile(name: &str) -> BTreeMap<String, usize> {
    let r = is_tangle(&tangle(name));
    assert_eq!(r.verdict, Verdict::Yes, "{name}: {:?}", r.failure);
    r.tdim
}

fn map(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

#[test]
fn basic_singularities() {
    assert_eq!(profile("pt"), map(&[("1", 0)]));
    assert_eq!(profile("pt2"), map(&[("1-1", 0)]));
    assert_eq!(profile("cap"), map(&[("0-1", 1), ("0-3", 1), ("1-1", 0)]));
    for f in ["pt", "pt2", "cap", "wiggle2"] {
        assert!(is_singularity(&tangle(f)), "{f}");
    }
    for f in ["strand", "circle", "braid"] {
        assert!(!is_singularity(&tangle(f)), "{f}");
    }
}

#[test]
fn bifurcation_is_rejected_at_the_branch() {
    let r = is_tangle(&tangle("bifur"));
    assert_eq!(r.verdict, Verdict::No);
    assert_eq!(r.failure.unwrap().0.as_deref(), Some("1-1"));
}

#[test]
fn cusp_profile() {
    let p = profile("wiggle2");
    assert_eq!(p.len(), 13);
    assert_eq!(p.values().filter(|&&k| k == 0).count(), 1);
    assert_eq!(p["1-1-1"], 0);
    assert_eq!(p["0-1-3"], 1);
    assert_eq!(p["0-3-1"], 1);
}

#[test]
fn transversal_strata_are_diagrams() {
    for f in TANGLES {
        let st = tstr(&tangle(f)).unwrap();
        let r = is_manifold_diagram(&st);
        assert!(r.verdict, "{f}: {:?}", r.failure);
    }
}

#[test]
fn compactified_tangles_stay_tangles() {
    for f in ["pt2", "cap", "strand", "circle"] {
        let c = compactify_tangle(&tangle(f)).unwrap();
        assert!(c.bundle().is_closed());
        assert_eq!(is_compact_tangle(&c).verdict, Verdict::Yes, "{f}");
    }
}

#[test]
fn euler_characteristics() {
    let c = cell_structure(&tangle("circle")).unwrap();
    let d = dual_cell_structure(&tangle("circle")).unwrap();
    assert_eq!((c.euler, d.euler), (0, 0));
    assert_eq!(c.cellular, Verdict::Yes);
    assert_eq!(cell_structure(&tangle("strand")).unwrap().euler, 1);
    assert_eq!(cell_structure(&tangle("cap")).unwrap().euler, 1);
}

#[test]
fn braid_is_a_coherence() {
    let b = tangle("braid");
    assert_eq!(is_path(&b), Ok(()));
    assert_eq!(is_coherence(&b), Ok(()));
    // the cap has a singular point, so it is at most a path
    assert!(is_coherence(&tangle("cap")).is_err());
}

#[test]
fn complexity_counts_q() {
    let got: Vec<usize> = ["pt", "pt2", "cap", "circle", "wiggle2", "braid"]
        .iter()
        .map(|f| tangle(f).complexity())
        .collect();
    assert_eq!(got, vec![1, 1, 3, 4, 13, 6]);
}

#[test]
fn cone_at_the_cone_point() {
    let cap = tangle("cap");
    let x = cap.bundle().top().index_of("1-1").unwrap();
    let cone = normal_singularity_at(&cap, x).unwrap();
    assert_eq!(cone.complexity(), 3);
    assert!(is_singularity(&cone));
}
