//! One line per acceptance criterion. Expected values come from small
//! brute-force oracles written here, not from the library under test.

mod common;

use common::{certificate, path, tangle, text, FIXTURES};
use std::ops::ControlFlow;
use std::process::Command;
use std::time::{Duration, Instant};
use trusskit::diagram::{is_cell_diagram, is_cell_diagram_direct, is_manifold_diagram};
use trusskit::explore::*;
use trusskit::io::{parse, serialize, Document};
use trusskit::poset::{is_cellular, recognize_sphere, Poset, Verdict};
use trusskit::strat::{coarsening_violations, enumerate_coarsenings, normalize, strat_equal, StratTruss};
use trusskit::tangle::*;
use trusskit::truss::Bundle;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn trusses(n: usize, max: usize) -> Vec<Bundle> {
    enumerate(n, max, Filter::Trusses, 1000)
        .unwrap()
        .into_iter()
        .filter_map(|e| match e {
            Enumerated::Truss(b) => Some(b),
            _ => None,
        })
        .collect()
}

fn strats(n: usize, max: usize, k: usize) -> Vec<StratTruss> {
    enumerate(n, max, Filter::Stratified { max_strata: k }, 1000)
        .unwrap()
        .into_iter()
        .filter_map(|e| match e {
            Enumerated::Strat(s) => Some(s),
            _ => None,
        })
        .collect()
}

fn tangles(n: usize, max: usize, m: usize) -> Vec<TanglePresentation> {
    enumerate(n, max, Filter::Tangles { m }, 1000)
        .unwrap()
        .into_iter()
        .filter_map(|e| match e {
            Enumerated::Tangle(t) => Some(t),
            _ => None,
        })
        .collect()
}

fn fixture_tangles() -> Vec<(&'static str, TanglePresentation)> {
    ["pt", "pt2", "cap", "strand", "circle", "stacked", "side", "wiggle2", "braid"]
        .into_iter()
        .map(|f| (f, tangle(f)))
        .collect()
}

fn fixture_bundles() -> Vec<(&'static str, Bundle)> {
    FIXTURES
        .iter()
        .map(|&f| {
            let b = match common::doc(f) {
                Document::Tangle(t) => t.bundle().clone(),
                Document::Certificate(t) | Document::Bundle(t) => t.bundle().clone(),
                d => panic!("{f}: {}", d.kind()),
            };
            (f, b)
        })
        .chain([("interval", match common::doc("interval") {
            Document::Strat(s) => s.bundle().clone(),
            _ => unreachable!(),
        })])
        .collect()
}

/// Strings over {R, S} of length `k` that alternate.
fn alternating_strings(k: usize) -> Vec<String> {
    (0..1u32 << k)
        .map(|m| (0..k).map(|i| if m >> i & 1 == 1 { 'S' } else { 'R' }).collect::<String>())
        .filter(|s| !s.contains("RR") && !s.contains("SS"))
        .collect()
}

fn c1() -> Check {
    for k in 1..=8 {
        let found: Vec<String> = trusses(1, k)
            .iter()
            .filter(|b| b.top().len() == k)
            .map(|b| b.fiber(1, 0).to_string())
            .collect();
        let mut want = alternating_strings(k);
        let mut got = found.clone();
        want.sort();
        got.sort();
        ensure(got == want && got.len() == 2, || format!("size {k}: {got:?} vs {want:?}"))?;
        let open = found.iter().filter(|s| s.starts_with('R') && s.ends_with('R')).count();
        let closed = found.iter().filter(|s| s.starts_with('S') && s.ends_with('S')).count();
        let expect = usize::from(k % 2 == 1);
        ensure(open == expect && closed == expect, || format!("size {k}: {open} open, {closed} closed"))?;
    }
    Ok("2 per size, k = 1..8".into())
}

fn c2() -> Check {
    let mut all: Vec<(String, Bundle)> = Vec::new();
    for n in 1..=3 {
        all.extend(trusses(n, 6).into_iter().map(|b| (format!("n={n}"), b)));
    }
    all.extend(fixture_bundles().into_iter().map(|(f, b)| (f.to_string(), b)));
    for (what, b) in &all {
        let d = b.dual();
        ensure(&d.dual() == b, || format!("{what}: dual twice differs"))?;
        ensure(d.is_open() == b.is_closed() && d.is_closed() == b.is_open(), || {
            format!("{what}: open/closed not swapped")
        })?;
    }
    Ok(format!("{} trusses", all.len()))
}

fn c3() -> Check {
    let suite = strats(2, 7, 3);
    for s in &suite {
        let cs = enumerate_coarsenings(s, 1 << 20).map_err(|e| e.to_string())?;
        let valid: Vec<_> = cs.iter().filter(|c| coarsening_violations(c).is_empty()).collect();
        let min = valid.iter().map(|c| c.target.bundle().top().len()).min().expect("identity");
        let minimal: Vec<_> = valid.iter().filter(|c| c.target.bundle().top().len() == min).collect();
        ensure(minimal.windows(2).all(|w| strat_equal(&w[0].target, &w[1].target)), || {
            "minimal coarsening target is not unique".into()
        })?;
        let (nf, _) = normalize(s);
        ensure(strat_equal(&nf, &minimal[0].target), || "normal form is not the minimal target".into())?;
        let (again, w) = normalize(&nf);
        ensure(w.is_identity() && strat_equal(&again, &nf), || "normalize is not idempotent".into())?;
    }
    Ok(format!("{} stratified 2-trusses", suite.len()))
}

fn c4() -> Check {
    let suite: Vec<StratTruss> = strats(2, 7, 3).into_iter().filter(|s| s.bundle().is_open()).collect();
    let mut undecided = 0;
    for s in &suite {
        let (c, _) = s.compactify().map_err(|e| e.to_string())?;
        ensure(c.bundle().is_closed(), || "compactification is not closed".into())?;
        let (back, _) = c.interior().map_err(|e| e.to_string())?;
        ensure(
            back.bundle().structure() == s.bundle().structure() && back.labeling() == s.labeling(),
            || "interior of compactification differs".into(),
        )?;
        match is_cellular(c.bundle().top(), &c.bundle().cell_dims()) {
            Verdict::Yes => {}
            Verdict::Unknown => undecided += 1,
            Verdict::No => return Err("compactified top poset is not cellular".into()),
        }
    }
    Ok(format!("{} open stratified trusses, {undecided} undecided", suite.len()))
}

fn c5() -> Check {
    let mut all: Vec<(String, TanglePresentation)> = Vec::new();
    for m in 0..=1 {
        all.extend(tangles(2, 9, m).into_iter().map(|t| (format!("m={m}"), t)));
    }
    all.extend(fixture_tangles().into_iter().map(|(f, t)| (f.to_string(), t)));
    for (what, t) in &all {
        let st = tstr(t).map_err(|e| format!("{what}: {e}"))?;
        let r = is_manifold_diagram(&st);
        ensure(r.verdict, || format!("{what}: {:?}", r.failure))?;
    }
    Ok(format!("{} tangles", all.len()))
}

fn c6() -> Check {
    let mut all: Vec<StratTruss> = strats(2, 7, 3);
    all.extend(strats(1, 7, 3));
    all.extend(fixture_tangles().into_iter().map(|(_, t)| t.strat()));
    let mut yes = 0;
    for s in &all {
        let m = is_manifold_diagram(s).verdict;
        let d = s.dual();
        let c = is_cell_diagram(&d).map_err(|e| e.to_string())?.verdict;
        ensure(m == c, || "manifold diagram and dual cell diagram verdicts differ".into())?;
        ensure(is_cell_diagram_direct(&d).verdict == c, || "facetality computations disagree".into())?;
        yes += usize::from(m);
    }
    Ok(format!("{} stratified trusses, {yes} diagrams", all.len()))
}

fn c7() -> Check {
    let named = |pairs: &[(&str, usize)]| pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    let pt2 = tangle("pt2");
    ensure(pt2.m() == 0 && pt2.bundle().n() == 2 && is_singularity(&pt2), || "PT2".into())?;
    let pt = is_tangle(&tangle("pt"));
    ensure(pt.verdict == Verdict::Yes && pt.tdim == named(&[("1", 0)]), || format!("point: {:?}", pt.tdim))?;
    let cap = is_tangle(&tangle("cap"));
    ensure(
        cap.verdict == Verdict::Yes && cap.tdim == named(&[("1-1", 0), ("0-1", 1), ("0-3", 1)]),
        || format!("cap: {:?}", cap.tdim),
    )?;
    let b = is_tangle(&tangle("bifur"));
    ensure(
        b.verdict == Verdict::No && b.failure.as_ref().and_then(|f| f.0.as_deref()) == Some("1-1"),
        || format!("bifur: {:?}", b.failure),
    )?;
    Ok("PT2, point, cap, BIFUR".into())
}

fn c8() -> Check {
    let w = tangle("wiggle2");
    let b = Bounds {
        max_generic_q: 4,
        max_total: 16,
        max_nodes: u64::MAX,
    };
    let shipped = path("wiggle2_perturbation");
    let cert = match search_perturbation(&w, b) {
        SearchOutcome::Found(c) => c,
        SearchOutcome::None => return Err("search exhausted max_generic_q = 4, max_total = 16: none".into()),
        SearchOutcome::Inconclusive => return Err("search inconclusive".into()),
    };
    ensure(verify_perturbation(&cert).is_ok() && strictly_simpler(&cert), || "found certificate does not verify".into())?;
    ensure(shipped.exists(), || "no shipped certificate".into())?;
    let c = certificate("wiggle2_perturbation");
    ensure(verify_perturbation(&c).is_ok(), || "shipped certificate does not verify".into())?;
    Ok("certificate found and verified".into())
}

fn c9() -> Check {
    let b = Bounds {
        max_generic_q: 3,
        max_total: 16,
        max_nodes: u64::MAX,
    };
    match search_perturbation(&tangle("cap"), b) {
        SearchOutcome::None => Ok("none within max_generic_q = 3, max_total = 16".into()),
        SearchOutcome::Found(_) => Err("found a perturbation".into()),
        SearchOutcome::Inconclusive => Err("inconclusive".into()),
    }
}

fn c10() -> Check {
    let small = Bounds {
        max_generic_q: 2,
        max_total: 7,
        max_nodes: u64::MAX,
    };
    let collect = |tp: &TanglePresentation| {
        let mut out = Vec::new();
        for_each_perturbation(tp, small, &mut |tb| {
            out.push(tb.clone());
            ControlFlow::Continue(())
        });
        out
    };
    let compose = |a: &TangleBundle, b: &TangleBundle| -> Result<TangleBundle, String> {
        let c = compose_perturbations(a, b).map_err(|e| e.to_string())?;
        verify_perturbation(&c)?;
        Ok(c)
    };
    let mut ps = vec![certificate("stacked_side")];
    ps.extend(collect(&tangle("pt2")));
    for p in &ps {
        let l = identity_perturbation(&special(p));
        let r = identity_perturbation(&generic(p));
        ensure(&compose(&l, p)? == p && &compose(p, &r)? == p, || "not unital".into())?;
    }
    let mut triples = 0;
    for p in collect(&tangle("pt2")) {
        for q in collect(&generic(&p)) {
            let pq = compose(&p, &q)?;
            for r in collect(&generic(&q)) {
                let qr = compose(&q, &r)?;
                ensure(compose(&pq, &r)? == compose(&p, &qr)?, || "not associative".into())?;
                triples += 1;
            }
        }
    }
    Ok(format!("{} perturbations, {triples} composable triples", ps.len()))
}

fn c11() -> Check {
    let c = cell_structure(&tangle("circle")).map_err(|e| e.to_string())?;
    let d = dual_cell_structure(&tangle("circle")).map_err(|e| e.to_string())?;
    ensure(c.euler == 0 && d.euler == 0, || format!("circle: {} / {}", c.euler, d.euler))?;
    let s = cell_structure(&tangle("strand")).map_err(|e| e.to_string())?;
    ensure(s.euler == 1, || format!("strand: {}", s.euler))?;
    let mut closed = 0;
    for m in 0..=1 {
        for t in tangles(2, 13, m) {
            let c = cell_structure(&t).map_err(|e| e.to_string())?;
            // no cells on the boundary of the cube
            if c.poset.len() != t.complexity() {
                continue;
            }
            let d = dual_cell_structure(&t).map_err(|e| e.to_string())?;
            ensure(c.euler == d.euler, || "euler characteristics differ".into())?;
            closed += 1;
        }
    }
    Ok(format!("circle 0/0, strand 1, {closed} closed enumerated tangles"))
}

fn c12() -> Check {
    let sphere = |p: &Poset, d: i64, want: Verdict| -> Result<(), String> {
        let got = recognize_sphere(p, d);
        ensure(got == want, || format!("{:?} as S^{d}: {got}", p.names()))
    };
    let empty = Poset::anonymous(0, &[]).unwrap();
    let antichain = Poset::anonymous(2, &[]).unwrap();
    let crown = Poset::anonymous(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
    let simplex_boundary = |k: usize| {
        // proper nonempty faces of the k-simplex, ordered by inclusion
        let faces: Vec<u32> = (1..(1u32 << (k + 1)) - 1).collect();
        let mut edges = Vec::new();
        for (i, &a) in faces.iter().enumerate() {
            for (j, &b) in faces.iter().enumerate() {
                if a != b && a & b == a && (b & !a).count_ones() == 1 {
                    edges.push((i, j));
                }
            }
        }
        Poset::anonymous(faces.len(), &edges).unwrap()
    };
    sphere(&empty, -1, Verdict::Yes)?;
    sphere(&antichain, 0, Verdict::Yes)?;
    sphere(&crown, 1, Verdict::Yes)?;
    sphere(&simplex_boundary(3), 2, Verdict::Yes)?;
    sphere(&simplex_boundary(2), 1, Verdict::Yes)?;
    let chain = Poset::anonymous(3, &[(0, 1), (1, 2)]).unwrap();
    let point = Poset::anonymous(1, &[]).unwrap();
    for d in 0..=2 {
        sphere(&chain, d, Verdict::No)?;
        sphere(&point, d, Verdict::No)?;
    }
    sphere(&crown, 0, Verdict::No)?;
    sphere(&simplex_boundary(4), 3, Verdict::Unknown)?;
    sphere(&chain, 3, Verdict::Unknown)?;
    Ok("positives, negatives and d >= 3".into())
}

fn c13() -> Check {
    let bin = env!("CARGO_BIN_EXE_trusskit");
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let fx = |f: &str| path(f).to_string_lossy().into_owned();
    for f in FIXTURES.iter().copied().chain(["interval"]) {
        let t = text(f);
        ensure(serialize(&parse(&t).map_err(|e| e.to_string())?) == t, || format!("{f}: library round trip"))?;
        let o = run(&["validate", "--canonical", &fx(f)]);
        ensure(o.stdout == t.as_bytes(), || format!("{f}: CLI round trip"))?;
    }
    for f in ["pt2", "cap", "circle", "interval"] {
        let golden = path(f).with_file_name("golden").join(format!("{f}.svg"));
        let o = run(&["render", &fx(f)]);
        ensure(o.stdout == std::fs::read(golden).unwrap(), || format!("{f}: svg differs from golden"))?;
    }
    let codes: &[(&[&str], i32)] = &[
        (&["check-tangle", "CAP"], 0),
        (&["check-tangle", "BIFUR"], 1),
        (&["perturb", "verify", "STACKED_SIDE"], 0),
        (&["perturb", "search", "PT", "--max-q", "2", "--max-total", "5"], 1),
        (&["stable", "PT", "--max-q", "2", "--max-total", "5"], 0),
        (&["render", "BRAID"], 65),
        (&["validate", "/nonexistent/x.json"], 65),
        (&["no-such-command"], 64),
        (&["check-tangle"], 64),
    ];
    for (args, want) in codes {
        let args: Vec<String> = args
            .iter()
            .map(|a| if a.chars().all(|c| c.is_ascii_uppercase() || c == '_') { fx(&a.to_lowercase()) } else { a.to_string() })
            .collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let got = run(&args).status.code();
        ensure(got == Some(*want), || format!("{args:?}: exit {got:?}, expected {want}"))?;
    }
    Ok(format!("{} fixtures, 4 golden files, {} exit codes", FIXTURES.len() + 1, codes.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check, u64); 13] = [
        ("enumeration counts", c1, 1),
        ("duality", c2, 60),
        ("normalization soundness", c3, 600),
        ("compactification round trip", c4, 300),
        ("tangles refine to diagrams", c5, 300),
        ("diagram/cell duality", c6, 300),
        ("fixture verdicts", c7, 1),
        ("instability of the double wiggle", c8, 600),
        ("bounded stability of the cap", c9, 600),
        ("perturbation composition", c10, 60),
        ("euler characteristics", c11, 60),
        ("sphere recognition", c12, 1),
        ("cli", c13, 60),
    ];
    let mut passed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let dt = t.elapsed();
        let r = match r {
            Ok(note) if dt > Duration::from_secs(*limit) => Err(format!("{note}; over the {limit}s limit")),
            r => r,
        };
        let (tag, note) = match &r {
            Ok(n) => ("PASS", n),
            Err(n) => ("FAIL", n),
        };
        passed += usize::from(r.is_ok());
        println!("{tag} {:>2} {name} ({:.2}s): {note}", i + 1, dt.as_secs_f64());
    }
    println!("{passed}/{} criteria passed", criteria.len());
}
