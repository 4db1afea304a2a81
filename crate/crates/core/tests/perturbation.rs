mod common;

use common::{certificate, tangle};
use std::ops::ControlFlow;
use trusskit::explore::*;

#[test]
fn shipped_certificate_verifies() {
    let c = certificate("stacked_side");
    assert_eq!(verify_perturbation(&c), Ok(()));
    assert_eq!(special(&c), tangle("stacked"));
    assert_eq!(generic(&c), tangle("side"));
    assert!(!strictly_simpler(&c));
}

#[test]
fn search_rediscovers_side_perturbation() {
    let st = tangle("stacked");
    let side = tangle("side");
    let b = Bounds {
        max_generic_q: 3,
        max_total: 15,
        max_nodes: u64::MAX,
    };
    let mut seen = false;
    let complete = for_each_perturbation(&st, b, &mut |tb| {
        assert_eq!(verify_perturbation(tb), Ok(()));
        if generic(tb) == side {
            seen = true;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    assert!(complete);
    assert!(seen);
}

fn collect(tp: &trusskit::tangle::TanglePresentation, b: Bounds) -> Vec<TangleBundle> {
    let mut out = Vec::new();
    assert!(for_each_perturbation(tp, b, &mut |tb| {
        out.push(tb.clone());
        ControlFlow::Continue(())
    }));
    out
}

fn small() -> Bounds {
    Bounds {
        max_generic_q: 2,
        max_total: 7,
        max_nodes: u64::MAX,
    }
}

#[test]
fn composition_is_unital() {
    let mut all = vec![certificate("stacked_side")];
    all.extend(collect(&tangle("pt2"), small()));
    assert!(all.len() > 2);
    for p in &all {
        let l = identity_perturbation(&special(p));
        let r = identity_perturbation(&generic(p));
        assert_eq!(&compose_perturbations(&l, p).unwrap(), p);
        assert_eq!(&compose_perturbations(p, &r).unwrap(), p);
    }
}

#[test]
fn composition_is_associative() {
    let mut triples = 0;
    for p in collect(&tangle("pt2"), small()) {
        for q in collect(&generic(&p), small()) {
            let pq = compose_perturbations(&p, &q).unwrap();
            assert_eq!(verify_perturbation(&pq), Ok(()));
            for r in collect(&generic(&q), small()) {
                let qr = compose_perturbations(&q, &r).unwrap();
                let a = compose_perturbations(&pq, &r).unwrap();
                let b = compose_perturbations(&p, &qr).unwrap();
                assert_eq!(a, b);
                triples += 1;
            }
        }
    }
    assert!(triples > 1, "{triples}");
}

#[test]
fn mismatched_fibers_do_not_compose() {
    let c = certificate("stacked_side");
    assert_eq!(compose_perturbations(&c, &c), Err(ExploreError::FibersMismatch));
}
