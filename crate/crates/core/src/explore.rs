//! Tangle bundles over finite posets, perturbations, bounded perturbation
//! search, and exhaustive enumeration of small trusses.

use crate::poset::{recognize_disk, Poset, Verdict};
use crate::strat::{StratError, StratTruss};
use crate::tangle::{indicator_poset, is_singularity, is_tangle, tdim_map, TanglePresentation};
use crate::truss::{check_bordism, Bundle, Dim, Fiber, LevelBordisms, Rel, TrussError};
use serde::Serialize;
use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExploreError {
    #[error("size bound exceeded: {0}")]
    SizeBoundExceeded(String),
    #[error("generic fiber of the first perturbation differs from the special fiber of the second")]
    FibersMismatch,
    #[error("not a perturbation: {0}")]
    NotAPerturbation(String),
    #[error("Q is not up-closed at {0}")]
    NotClosed(String),
    #[error(transparent)]
    Truss(#[from] TrussError),
    #[error(transparent)]
    Strat(#[from] StratError),
}

/// A truss bundle with a closed subposet `Q` of its top total poset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangleBundle {
    bundle: Bundle,
    q: Vec<bool>,
    m: usize,
}

impl TangleBundle {
    pub fn new(bundle: Bundle, q: Vec<bool>, m: usize) -> Result<TangleBundle, ExploreError> {
        let top = bundle.top();
        assert_eq!(q.len(), top.len());
        for &(x, y) in top.covers() {
            if q[x] && !q[y] {
                return Err(ExploreError::NotClosed(top.name(x).to_string()));
            }
        }
        Ok(TangleBundle { bundle, q, m })
    }

    /// `base × T` with `Q` pulled back.
    pub fn constant(base: Poset, tp: &TanglePresentation) -> TangleBundle {
        let bundle = Bundle::bare(base).product(tp.bundle());
        let k = tp.q().len();
        let q = (0..bundle.top().len()).map(|x| tp.q()[x % k]).collect();
        TangleBundle { bundle, q, m: tp.m() }
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn q(&self) -> &[bool] {
        &self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q_elements(&self) -> Vec<usize> {
        (0..self.q.len()).filter(|&x| self.q[x]).collect()
    }

    /// The tangle over a base element, with the top map back into `self`.
    pub fn fiber(&self, b: usize) -> (TanglePresentation, Vec<usize>) {
        let r = self.bundle.fiber_over_base(b).expect("fibers over base elements exist");
        let map = r.maps[self.bundle.n()].clone();
        let q = map.iter().map(|&x| self.q[x]).collect();
        let tp = TanglePresentation::new(r.bundle, q, self.m).expect("restriction of a closed set");
        (tp, map)
    }

    /// Labels in `base × [out -> in]`, so strata stay inside base fibers.
    pub fn strat(&self) -> StratTruss {
        let lp = self.bundle.base().product(&indicator_poset());
        let n = self.bundle.n();
        let labels = (0..self.q.len())
            .map(|x| self.bundle.base_of(n, x) * 2 + usize::from(self.q[x]))
            .collect();
        StratTruss::new(self.bundle.clone(), lp, labels).expect("product labeling is monotone")
    }
}

/// Every fiber over a base element must be an `m`-tangle.
pub fn is_tangle_bundle(tb: &TangleBundle) -> Result<(), String> {
    let base = tb.bundle.base();
    for b in 0..base.len() {
        let (tp, _) = tb.fiber(b);
        let r = is_tangle(&tp);
        if r.verdict != Verdict::Yes {
            let why = r.failure.map(|f| f.1).unwrap_or_default();
            return Err(format!("fiber over {} is not a tangle: {why}", base.name(b)));
        }
    }
    Ok(())
}

/// Fiber transition condition: for every `c < b` and `x` in `Q` over `b`,
/// the part of `Q` over `c` below `x` compactifies to an `m`-disk; also every
/// element of `Q` over `c` lies below some element of `Q` over `b`.
pub fn is_fiber_bundle(tb: &TangleBundle) -> (Verdict, Option<String>) {
    if let Err(e) = is_tangle_bundle(tb) {
        return (Verdict::No, Some(e));
    }
    let bd = &tb.bundle;
    let n = bd.n();
    let base = bd.base();
    let top = bd.top();
    let mut verdict = Verdict::Yes;
    let mut note = None;
    for b in 0..base.len() {
        for c in base.down_set(b).ones().filter(|&c| c != b) {
            for y in tb.q_elements().into_iter().filter(|&y| bd.base_of(n, y) == c) {
                let covered = tb
                    .q_elements()
                    .into_iter()
                    .any(|x| bd.base_of(n, x) == b && top.le(y, x));
                if !covered {
                    return (
                        Verdict::No,
                        Some(format!("{} is not below Q over {}", top.name(y), base.name(b))),
                    );
                }
            }
            for x in tb.q_elements().into_iter().filter(|&x| bd.base_of(n, x) == b) {
                let v = transition_disk(tb, x, c);
                if v == Verdict::No {
                    return (
                        Verdict::No,
                        Some(format!("generic fiber below {} over {} is not a disk", top.name(x), base.name(c))),
                    );
                }
                if v == Verdict::Unknown && note.is_none() {
                    note = Some(format!("disk recognition undecided below {}", top.name(x)));
                }
                verdict = verdict.and(v);
            }
        }
    }
    (verdict, note)
}

fn transition_disk(tb: &TangleBundle, x: usize, c: usize) -> Verdict {
    let bd = &tb.bundle;
    let n = bd.n();
    let nb = match bd.neighborhood(x) {
        Ok(r) => r,
        Err(_) => return Verdict::No,
    };
    let Some(cc) = nb.maps[0].iter().position(|&b| b == c) else {
        return Verdict::No;
    };
    let fib = match nb.bundle.fiber_over_base(cc) {
        Ok(r) => r,
        Err(_) => return Verdict::No,
    };
    let q: Vec<bool> = fib.maps[n].iter().map(|&y| tb.q[nb.maps[n][y]]).collect();
    let Ok(comp) = fib.bundle.compactify() else {
        return Verdict::No;
    };
    let top = comp.bundle.top();
    let qbar: Vec<usize> = (0..top.len()).filter(|&y| q[comp.cr[n][y]]).collect();
    if qbar.is_empty() {
        return Verdict::No;
    }
    recognize_disk(&top.induced(&qbar), tb.m as i64)
}

/// A path: an `(m+1)`-tangle `(n+1)`-truss that is a fiber bundle of
/// `m`-tangles over its level-1 total poset.
pub fn is_path(tp: &TanglePresentation) -> Result<(), String> {
    let r = is_tangle(tp);
    if r.verdict != Verdict::Yes {
        return Err(r.failure.map(|f| f.1).unwrap_or_else(|| "not a tangle".into()));
    }
    if tp.m() == 0 || tp.bundle().n() == 0 {
        return Err("paths need m >= 1 and at least one level".into());
    }
    let b = tp.bundle().truncate_above(1).map_err(|e| e.to_string())?;
    let tb = TangleBundle::new(b, tp.q().to_vec(), tp.m() - 1).map_err(|e| e.to_string())?;
    match is_fiber_bundle(&tb) {
        (Verdict::Yes, _) => Ok(()),
        (v, why) => Err(why.unwrap_or_else(|| format!("fiber bundle check: {v}"))),
    }
}

/// A path without singular points.
pub fn is_coherence(tp: &TanglePresentation) -> Result<(), String> {
    is_path(tp)?;
    let td = tdim_map(tp).map_err(|e| e.to_string())?;
    match td.iter().find(|(_, &k)| k == 0) {
        Some((&x, _)) => Err(format!("singular point {}", tp.bundle().top().name(x))),
        None => Ok(()),
    }
}

/// The base `0 <- 1` of perturbations.
pub fn simplex1() -> Poset {
    Poset::build(&["0", "1"], &[("1", "0")]).unwrap()
}

fn simplex2() -> Poset {
    Poset::build(&["0", "1", "2"], &[("1", "0"), ("2", "1")]).unwrap()
}

pub fn special(tb: &TangleBundle) -> TanglePresentation {
    tb.fiber(0).0
}

pub fn generic(tb: &TangleBundle) -> TanglePresentation {
    tb.fiber(1).0
}

/// Tangle bundle over `0 <- 1` whose generic fiber surjects onto the special one.
pub fn verify_perturbation(tb: &TangleBundle) -> Result<(), String> {
    let base = tb.bundle.base();
    if base.len() != 2 || !base.lt(1, 0) {
        return Err("base is not 0 <- 1".into());
    }
    is_tangle_bundle(tb)?;
    let bd = &tb.bundle;
    let n = bd.n();
    let top = bd.top();
    let qs = tb.q_elements();
    for &x in &qs {
        if bd.base_of(n, x) != 0 {
            continue;
        }
        if !qs.iter().any(|&y| bd.base_of(n, y) == 1 && top.le(y, x)) {
            return Err(format!("{} is not hit by the generic fiber", top.name(x)));
        }
    }
    Ok(())
}

/// `[1]^op × T`.
pub fn identity_perturbation(tp: &TanglePresentation) -> TangleBundle {
    TangleBundle::constant(simplex1(), tp)
}

pub fn is_constant_perturbation(tb: &TangleBundle) -> bool {
    let s = special(tb);
    identity_perturbation(&s) == *tb
}

/// Every generic point is strictly simpler than the special fiber.
pub fn strictly_simpler(tb: &TangleBundle) -> bool {
    let s = special(tb).complexity();
    let g = generic(tb);
    let top = g.bundle().top();
    let w = g.q_elements();
    w.iter()
        .all(|&x| w.iter().filter(|&&y| top.le(y, x)).count() < s)
}

/// Glue two perturbations `A ~> B` and `B ~> C` over `0 <- 1 <- 2` and keep
/// the outer arrow.
pub fn compose_perturbations(p1: &TangleBundle, p2: &TangleBundle) -> Result<TangleBundle, ExploreError> {
    let b1 = generic(p1);
    let b2 = special(p2);
    if b1.bundle().structure() != b2.bundle().structure() || b1.q() != b2.q() || p1.m != p2.m {
        return Err(ExploreError::FibersMismatch);
    }
    let (x, y) = (&p1.bundle, &p2.bundle);
    let n = x.n();
    let mut levels = Vec::new();
    // per level: number of elements over 0 in p1, and over 0 in p2
    let mut a_prev = 1;
    let mut b_prev = 1;
    for i in 1..=n {
        let mut fibers: Vec<Fiber> = x.fibers(i).to_vec();
        fibers.extend(y.fibers(i)[b_prev..].iter().cloned());
        let a_i: usize = x.fibers(i)[..a_prev].iter().map(|f| f.len()).sum();
        let b_i: usize = y.fibers(i)[..b_prev].iter().map(|f| f.len()).sum();
        let mut edges: BTreeSet<(usize, usize)> = x.total(i).covers().iter().copied().collect();
        for &(u, v) in y.total(i).covers() {
            edges.insert((u + a_i, v + a_i));
        }
        levels.push((fibers, edges.into_iter().collect::<Vec<_>>()));
        a_prev = a_i;
        b_prev = b_i;
    }
    let whole = Bundle::from_orders(simplex2(), levels)?;
    let mut q = p1.q.clone();
    q.extend(p2.q[b_prev..].iter().copied());
    let keep: Vec<Vec<bool>> = (0..=n)
        .map(|i| (0..whole.total(i).len()).map(|z| whole.base_of(i, z) != 1).collect())
        .collect();
    let r = whole.restrict(&keep)?;
    let q_out = r.maps[n].iter().map(|&z| q[z]).collect();
    let out = TangleBundle::new(r.bundle.with_base(simplex1())?, q_out, p1.m)?;
    verify_perturbation(&out).map_err(ExploreError::NotAPerturbation)?;
    Ok(out)
}

/// Bounds for perturbation search.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Bounds {
    pub max_generic_q: usize,
    pub max_total: usize,
    /// search nodes before giving up as inconclusive
    pub max_nodes: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_generic_q: 4,
            max_total: 16,
            max_nodes: 2_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found(Box<TangleBundle>),
    None,
    Inconclusive,
}

/// All bordisms from `src` to `tgt`.
pub fn all_bordisms(src: &Fiber, tgt: &Fiber) -> Vec<Rel> {
    let ss = src.singulars();
    let ts = tgt.singulars();
    let sr = src.regulars();
    let tr = tgt.regulars();
    let mut out = BTreeSet::new();
    for f in monotone_maps(ss.len(), ts.len()) {
        for g in monotone_maps(tr.len(), sr.len()) {
            let mut base = Rel::empty(src.len(), tgt.len());
            for (k, &t) in ss.iter().enumerate() {
                base.set(t, ts[f[k]]);
            }
            for (k, &s) in tr.iter().enumerate() {
                base.set(sr[g[k]], s);
            }
            let base = base.closed(src, tgt);
            let extras: Vec<(usize, usize)> = sr
                .iter()
                .flat_map(|&t| ts.iter().map(move |&s| (t, s)))
                .filter(|&(t, s)| !base.get(t, s))
                .collect();
            if extras.len() > 16 {
                continue;
            }
            for mask in 0u32..(1 << extras.len()) {
                let mut r = base.clone();
                for (k, &(t, s)) in extras.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        r.set(t, s);
                    }
                }
                let r = r.closed(src, tgt);
                if check_bordism(src, tgt, &r).is_ok() {
                    out.insert(r.pairs());
                }
            }
        }
    }
    out.into_iter()
        .map(|p| Rel::from_pairs(src.len(), tgt.len(), &p))
        .collect()
}

/// Weakly increasing maps `{0..k} -> {0..l}`.
fn monotone_maps(k: usize, l: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if l == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(k: usize, l: usize, lo: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in lo..l {
            cur.push(v);
            go(k, l, v, cur, out);
            cur.pop();
        }
    }
    go(k, l, 0, &mut cur, &mut out);
    out
}

#[derive(Default)]
struct BordCache(BTreeMap<(String, String), Rc<[Rel]>>);

impl BordCache {
    fn get(&mut self, a: &Fiber, b: &Fiber) -> Rc<[Rel]> {
        self.0
            .entry((a.to_string(), b.to_string()))
            .or_insert_with(|| all_bordisms(a, b).into())
            .clone()
    }
}

/// Which trusses to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Filter {
    Trusses,
    Open,
    Closed,
    Stratified { max_strata: usize },
    Tangles { m: usize },
}

/// One enumerated object.
#[derive(Clone, Debug)]
pub enum Enumerated {
    Truss(Bundle),
    Strat(StratTruss),
    Tangle(TanglePresentation),
}

/// Fibers of length at most `max`, optionally open or closed only.
fn fibers_up_to(max: usize, open: Option<bool>) -> Vec<Fiber> {
    let mut v = Vec::new();
    for len in 1..=max {
        for first in [Dim::R, Dim::S] {
            let f = Fiber::alternating(first, len);
            match open {
                Some(true) if !f.is_open() => continue,
                Some(false) if !f.is_closed() => continue,
                _ => {}
            }
            v.push(f);
        }
    }
    v
}

/// Exhaustive enumeration of `n`-trusses with at most `max_size` top
/// elements, in a fixed order.
pub fn for_each_truss(
    n: usize,
    max_size: usize,
    open: Option<bool>,
    visit: &mut dyn FnMut(&Bundle) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let cache = RefCell::new(BordCache::default());
    let nodes = Cell::new(0);
    let choices = fibers_up_to(max_size, open);
    extend_levels(&Bundle::point(), Vec::new(), n, max_size, &choices, &cache, &nodes, visit)
}

#[allow(clippy::too_many_arguments)]
fn extend_levels(
    cur: &Bundle,
    levels: Vec<LevelBordisms>,
    n: usize,
    max_size: usize,
    choices: &[Fiber],
    cache: &RefCell<BordCache>,
    nodes: &Cell<u64>,
    visit: &mut dyn FnMut(&Bundle) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if cur.n() == n {
        return visit(cur);
    }
    let prev = cur.total(cur.n()).clone();
    let fixed = vec![None; prev.len()];
    let mut fill = Fill::new(&prev, &fixed, BTreeMap::new(), choices, max_size, cache, nodes, u64::MAX);
    fill.run(&mut |lv| {
        let mut all = levels.clone();
        all.push(lv);
        match Bundle::from_bordisms(cur.base().clone(), all.clone()) {
            Ok(b) => extend_levels(&b, all, n, max_size, choices, cache, nodes, visit),
            Err(_) => ControlFlow::Continue(()),
        }
    })
}

/// Chooses the fibers and bordisms of one new level over `prev`, element by
/// element from the top down. Composites are checked as soon as both legs
/// are known, so path dependence prunes early.
struct Fill<'a> {
    prev: &'a Poset,
    order: Vec<usize>,
    /// free elements after each position in `order`
    free_after: Vec<usize>,
    fixed: &'a [Option<Fiber>],
    fixed_rel: BTreeMap<(usize, usize), Rel>,
    choices: &'a [Fiber],
    budget: usize,
    cache: &'a RefCell<BordCache>,
    nodes: &'a Cell<u64>,
    limit: u64,
    fibers: Vec<Option<Fiber>>,
    /// `rels[a][d]` for every `d` strictly above `a`
    rels: Vec<BTreeMap<usize, Rel>>,
}

impl<'a> Fill<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        prev: &'a Poset,
        fixed: &'a [Option<Fiber>],
        fixed_rel: BTreeMap<(usize, usize), Rel>,
        choices: &'a [Fiber],
        budget: usize,
        cache: &'a RefCell<BordCache>,
        nodes: &'a Cell<u64>,
        limit: u64,
    ) -> Fill<'a> {
        let k = prev.len();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&a| prev.up_set(a).count_ones(..));
        let mut free_after = vec![0; k];
        for i in (0..k.saturating_sub(1)).rev() {
            free_after[i] = free_after[i + 1] + usize::from(fixed[order[i + 1]].is_none());
        }
        Fill {
            prev,
            order,
            free_after,
            fixed,
            fixed_rel,
            choices,
            budget,
            cache,
            nodes,
            limit,
            fibers: vec![None; k],
            rels: vec![BTreeMap::new(); k],
        }
    }

    fn run(&mut self, visit: &mut dyn FnMut(LevelBordisms) -> ControlFlow<()>) -> ControlFlow<()> {
        self.element(0, 0, visit)
    }

    fn element(
        &mut self,
        pos: usize,
        spent: usize,
        visit: &mut dyn FnMut(LevelBordisms) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if pos == self.order.len() {
            let fibers: Vec<Fiber> = self.fibers.iter().map(|f| f.clone().expect("filled")).collect();
            let bords = self
                .prev
                .covers()
                .iter()
                .map(|&(a, c)| ((a, c), self.rels[a][&c].generators(&fibers[a], &fibers[c])))
                .collect();
            return visit((fibers, bords));
        }
        let a = self.order[pos];
        let opts: Vec<(Fiber, usize)> = match &self.fixed[a] {
            Some(f) => vec![(f.clone(), 0)],
            None => self
                .choices
                .iter()
                .filter(|f| spent + f.len() + self.free_after[pos] <= self.budget)
                .map(|f| (f.clone(), f.len()))
                .collect(),
        };
        let covers = self.prev.upper_covers(a);
        for (f, cost) in opts {
            self.fibers[a] = Some(f);
            self.cover(pos, a, &covers, 0, BTreeMap::new(), spent + cost, visit)?;
        }
        self.fibers[a] = None;
        ControlFlow::Continue(())
    }

    #[allow(clippy::too_many_arguments)]
    fn cover(
        &mut self,
        pos: usize,
        a: usize,
        covers: &[usize],
        j: usize,
        acc: BTreeMap<usize, Rel>,
        spent: usize,
        visit: &mut dyn FnMut(LevelBordisms) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        self.nodes.set(self.nodes.get() + 1);
        if self.nodes.get() > self.limit {
            return ControlFlow::Break(());
        }
        if j == covers.len() {
            self.rels[a] = acc;
            let r = self.element(pos + 1, spent, visit);
            self.rels[a] = BTreeMap::new();
            return r;
        }
        let c = covers[j];
        let opts: Rc<[Rel]> = match self.fixed_rel.get(&(a, c)) {
            Some(r) => Rc::from(vec![r.clone()]),
            None => {
                let fa = self.fibers[a].as_ref().expect("filled");
                let fc = self.fibers[c].as_ref().expect("above is filled first");
                self.cache.borrow_mut().get(fa, fc)
            }
        };
        'next: for r in opts.iter() {
            let mut acc = acc.clone();
            acc.insert(c, r.clone());
            for (&d, rcd) in &self.rels[c] {
                let comp = r.compose(rcd);
                match acc.get(&d) {
                    Some(e) if *e != comp => continue 'next,
                    Some(_) => {}
                    None => {
                        acc.insert(d, comp);
                    }
                }
            }
            self.cover(pos, a, covers, j + 1, acc, spent, visit)?;
        }
        ControlFlow::Continue(())
    }
}

/// Set partitions of `0..k` into connected blocks with an acyclic quotient,
/// as labelings by block (blocks numbered by least element).
fn stratifications(p: &Poset, max_blocks: usize) -> Vec<(Poset, Vec<usize>)> {
    let k = p.len();
    let mut out = Vec::new();
    let mut lab = Vec::with_capacity(k);
    fn go(p: &Poset, k: usize, max: usize, used: usize, lab: &mut Vec<usize>, out: &mut Vec<(Poset, Vec<usize>)>) {
        if lab.len() == k {
            let blocks = used;
            let members: Vec<Vec<usize>> = (0..blocks)
                .map(|b| (0..k).filter(|&x| lab[x] == b).collect())
                .collect();
            if members.iter().any(|m| p.components(m).len() != 1) {
                return;
            }
            let mut edges = BTreeSet::new();
            for &(x, y) in p.covers() {
                if lab[x] != lab[y] {
                    edges.insert((lab[x], lab[y]));
                }
            }
            let edges: Vec<(usize, usize)> = edges.into_iter().collect();
            if let Ok(lp) = Poset::anonymous(blocks, &edges) {
                out.push((lp, lab.clone()));
            }
            return;
        }
        for b in 0..=used.min(max.saturating_sub(1)) {
            if b == used && used == max {
                continue;
            }
            lab.push(b);
            go(p, k, max, used.max(b + 1), lab, out);
            lab.pop();
        }
    }
    go(p, k, max_blocks, 0, &mut lab, &mut out);
    out
}

/// Up-closed subsets of a poset, as indicator vectors.
pub fn up_sets(p: &Poset, max_size: usize) -> Vec<Vec<bool>> {
    let k = p.len();
    let mut out = Vec::new();
    let order = p.linear_extension();
    // decide elements from the top down; an element may join only if its
    // upper covers are in
    fn go(p: &Poset, order: &[usize], i: usize, cur: &mut Vec<bool>, size: usize, max: usize, out: &mut Vec<Vec<bool>>) {
        if i == order.len() {
            out.push(cur.clone());
            return;
        }
        let x = order[order.len() - 1 - i];
        go(p, order, i + 1, cur, size, max, out);
        if size < max && p.upper_covers(x).iter().all(|&y| cur[y]) {
            cur[x] = true;
            go(p, order, i + 1, cur, size + 1, max, out);
            cur[x] = false;
        }
    }
    let mut cur = vec![false; k];
    go(p, &order, 0, &mut cur, 0, max_size, &mut out);
    out
}

/// Exhaustive, duplicate-free enumeration; errors if `max_size` exceeds `guard`.
pub fn enumerate(n: usize, max_size: usize, filter: Filter, guard: usize) -> Result<Vec<Enumerated>, ExploreError> {
    if max_size > guard {
        return Err(ExploreError::SizeBoundExceeded(format!("{max_size} > {guard}")));
    }
    let open = match filter {
        Filter::Open | Filter::Tangles { .. } => Some(true),
        Filter::Closed => Some(false),
        _ => None,
    };
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let _ = for_each_truss(n, max_size, open, &mut |b: &Bundle| {
        match filter {
            Filter::Trusses | Filter::Open | Filter::Closed => {
                if seen.insert(format!("{:?}", b.structure())) {
                    out.push(Enumerated::Truss(b.clone()));
                }
            }
            Filter::Stratified { max_strata } => {
                for (lp, lab) in stratifications(b.top(), max_strata) {
                    if let Ok(st) = StratTruss::new(b.clone(), lp, lab) {
                        out.push(Enumerated::Strat(st));
                    }
                }
            }
            Filter::Tangles { m } => {
                for q in up_sets(b.top(), b.top().len()) {
                    let tp = TanglePresentation::new(b.clone(), q, m).expect("up-closed");
                    if is_tangle(&tp).verdict == Verdict::Yes {
                        out.push(Enumerated::Tangle(tp));
                    }
                }
            }
        }
        ControlFlow::Continue(())
    });
    Ok(out)
}

struct Search<'a> {
    special: &'a TanglePresentation,
    generic: Bundle,
    ws: Vec<Vec<bool>>,
    bounds: Bounds,
    nodes: &'a Cell<u64>,
    cache: &'a RefCell<BordCache>,
}

/// Visit perturbations of `tp` whose generic fiber has at most
/// `max_generic_q` points of `Q` and at most `max_total` top elements.
/// Generic tangles are enumerated first; cross bordisms are searched only
/// for those. Returns `false` if the node budget cut the search short.
pub fn for_each_perturbation(
    tp: &TanglePresentation,
    bounds: Bounds,
    visit: &mut dyn FnMut(&TangleBundle) -> ControlFlow<()>,
) -> bool {
    let nodes = Cell::new(0);
    let cache = RefCell::new(BordCache::default());
    let m = tp.m();
    let _ = for_each_truss(tp.bundle().n(), bounds.max_total, Some(true), &mut |g: &Bundle| {
        nodes.set(nodes.get() + 1);
        if nodes.get() > bounds.max_nodes {
            return ControlFlow::Break(());
        }
        let ws: Vec<Vec<bool>> = up_sets(g.top(), bounds.max_generic_q)
            .into_iter()
            .filter(|w| w.iter().any(|&v| v))
            .filter(|w| {
                let t = TanglePresentation::new(g.clone(), w.clone(), m).expect("up-closed");
                is_tangle(&t).verdict == Verdict::Yes
            })
            .collect();
        if ws.is_empty() {
            return ControlFlow::Continue(());
        }
        let s = Search {
            special: tp,
            generic: g.clone(),
            ws,
            bounds,
            nodes: &nodes,
            cache: &cache,
        };
        s.level(Vec::new(), visit)
    });
    nodes.get() <= bounds.max_nodes
}

impl Search<'_> {
    fn level(
        &self,
        levels: Vec<LevelBordisms>,
        visit: &mut dyn FnMut(&TangleBundle) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let sp = self.special.bundle();
        let g = &self.generic;
        let cur = Bundle::from_bordisms(simplex1(), levels.clone()).expect("validated on the way");
        let i = cur.n();
        if i == sp.n() {
            return self.finish(&cur, visit);
        }
        let prev = cur.total(i).clone();
        let ns = sp.total(i).len();
        let mut fixed: Vec<Option<Fiber>> = sp.fibers(i + 1).iter().cloned().map(Some).collect();
        fixed.extend(g.fibers(i + 1).iter().cloned().map(Some));
        let mut fixed_rel: BTreeMap<(usize, usize), Rel> = sp
            .total(i)
            .covers()
            .iter()
            .map(|&(a, c)| ((a, c), sp.rel(i + 1, a, c)))
            .collect();
        for &(a, c) in g.total(i).covers() {
            fixed_rel.insert((a + ns, c + ns), g.rel(i + 1, a, c));
        }
        let mut fill = Fill::new(&prev, &fixed, fixed_rel, &[], 0, self.cache, self.nodes, self.bounds.max_nodes);
        fill.run(&mut |lv| {
            let mut all = levels.clone();
            all.push(lv);
            if Bundle::from_bordisms(simplex1(), all.clone()).is_err() {
                return ControlFlow::Continue(());
            }
            self.level(all, visit)
        })
    }

    fn finish(&self, b: &Bundle, visit: &mut dyn FnMut(&TangleBundle) -> ControlFlow<()>) -> ControlFlow<()> {
        let sp = self.special;
        let ns = sp.bundle().top().len();
        let top = b.top();
        let sq = sp.q_elements();
        for w in &self.ws {
            let hit = sq
                .iter()
                .all(|&x| (0..w.len()).any(|y| w[y] && top.le(ns + y, x)));
            if !hit {
                continue;
            }
            let mut q = sp.q().to_vec();
            q.extend(w.iter().copied());
            let Ok(tb) = TangleBundle::new(b.clone(), q, sp.m()) else {
                continue;
            };
            if verify_perturbation(&tb).is_ok() {
                visit(&tb)?;
            }
        }
        ControlFlow::Continue(())
    }
}

/// Bounded search for a perturbation into strictly simpler tangles.
pub fn search_perturbation(tp: &TanglePresentation, bounds: Bounds) -> SearchOutcome {
    if !is_singularity(tp) {
        return SearchOutcome::None;
    }
    let mut best: Option<TangleBundle> = None;
    let complete = for_each_perturbation(tp, bounds, &mut |tb| {
        if strictly_simpler(tb) {
            let better = match &best {
                None => true,
                Some(b) => generic(tb).complexity() < generic(b).complexity(),
            };
            if better {
                best = Some(tb.clone());
                if generic(tb).complexity() == 1 {
                    return ControlFlow::Break(());
                }
            }
        }
        ControlFlow::Continue(())
    });
    match best {
        Some(b) => SearchOutcome::Found(Box::new(b)),
        None if complete => SearchOutcome::None,
        None => SearchOutcome::Inconclusive,
    }
}

#[derive(Clone, Debug)]
pub enum Stability {
    StableWithinBounds { inductively_stable: Option<bool> },
    Unstable(Box<TangleBundle>),
    Inconclusive,
}

/// Stability by bounded search; with `inductive`, also check that every
/// perturbation to a stable singularity is constant.
pub fn stability(tp: &TanglePresentation, bounds: Bounds, inductive: bool) -> Stability {
    match search_perturbation(tp, bounds) {
        SearchOutcome::Found(c) => Stability::Unstable(c),
        SearchOutcome::Inconclusive => Stability::Inconclusive,
        SearchOutcome::None => {
            if !inductive {
                return Stability::StableWithinBounds {
                    inductively_stable: None,
                };
            }
            let mut ok = true;
            let mut inconclusive = false;
            let complete = for_each_perturbation(tp, bounds, &mut |tb| {
                if is_constant_perturbation(tb) {
                    return ControlFlow::Continue(());
                }
                let g = generic(tb);
                if !is_singularity(&g) {
                    return ControlFlow::Continue(());
                }
                match search_perturbation(&g, bounds) {
                    SearchOutcome::None => {
                        ok = false;
                        ControlFlow::Break(())
                    }
                    SearchOutcome::Inconclusive => {
                        inconclusive = true;
                        ControlFlow::Continue(())
                    }
                    SearchOutcome::Found(_) => ControlFlow::Continue(()),
                }
            });
            if ok && (inconclusive || !complete) {
                return Stability::Inconclusive;
            }
            Stability::StableWithinBounds {
                inductively_stable: Some(ok),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bordisms_rsr_to_rsr() {
        let f = Fiber::parse("RSR").unwrap();
        // identity, and the two creations are not allowed (singular must map)
        let all = all_bordisms(&f, &f);
        assert!(all.contains(&Rel::identity(&f)));
        for r in &all {
            assert!(check_bordism(&f, &f, r).is_ok());
        }
    }

    #[test]
    fn one_truss_counts() {
        for k in 1..=6 {
            let all = enumerate(1, k, Filter::Trusses, 100).unwrap().len();
            assert_eq!(all, 2 * k);
        }
    }

    #[test]
    fn identity_perturbation_verifies() {
        let tp = TanglePresentation::from_elements(Bundle::one("RSR").unwrap(), &[1], 0).unwrap();
        let id = identity_perturbation(&tp);
        assert_eq!(verify_perturbation(&id), Ok(()));
        assert!(is_constant_perturbation(&id));
        let c = compose_perturbations(&id, &id).unwrap();
        assert_eq!(c, id);
    }

    #[test]
    fn point_is_stable() {
        let tp = TanglePresentation::from_elements(Bundle::one("RSR").unwrap(), &[1], 0).unwrap();
        let b = Bounds {
            max_generic_q: 3,
            max_total: 5,
            max_nodes: 100_000,
        };
        assert!(matches!(search_perturbation(&tp, b), SearchOutcome::None));
    }

    #[test]
    fn up_sets_of_chain() {
        let p = Poset::chain(&["a", "b", "c"]);
        assert_eq!(up_sets(&p, 3).len(), 4);
    }
}
