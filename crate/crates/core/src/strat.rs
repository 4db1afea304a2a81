//! Labeled (stratified) trusses, coarsenings and normal forms.

use crate::poset::{cc_split, CcSplit, Poset, PosetError};
use crate::truss::{Bundle, Dim, Fiber, Restricted, TrussError};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StratError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Truss(#[from] TrussError),
    #[error("labeling has {got} entries, expected {want}")]
    LabelCount { got: usize, want: usize },
    #[error("stratum {0} crosses base fibers")]
    StratumCrossesFibers(usize),
    #[error("coarsening enumeration bound exceeded ({0} candidates)")]
    SizeBoundExceeded(usize),
    #[error("no common refinement of the sides")]
    NoCommonRefinement,
}

/// A truss bundle with a monotone labeling of its top total poset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratTruss {
    bundle: Bundle,
    label_poset: Poset,
    labeling: Vec<usize>,
    split: CcSplit,
}

impl StratTruss {
    pub fn new(bundle: Bundle, label_poset: Poset, labeling: Vec<usize>) -> Result<StratTruss, StratError> {
        let top = bundle.top();
        if labeling.len() != top.len() {
            return Err(StratError::LabelCount {
                got: labeling.len(),
                want: top.len(),
            });
        }
        let split = cc_split(top, &labeling, &label_poset)?;
        if !bundle.is_truss() {
            let n = bundle.n();
            let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
            for x in 0..top.len() {
                let b = bundle.base_of(n, x);
                if *owner.entry(split.chr[x]).or_insert(b) != b {
                    return Err(StratError::StratumCrossesFibers(split.chr[x]));
                }
            }
        }
        Ok(StratTruss {
            bundle,
            label_poset,
            labeling,
            split,
        })
    }

    /// Every element carries the same label.
    pub fn constant(bundle: Bundle) -> StratTruss {
        let n = bundle.top().len();
        StratTruss::new(bundle, Poset::singleton("x"), vec![0; n]).unwrap()
    }

    /// Labeling by the characteristic map onto strata.
    pub fn canonical(&self) -> StratTruss {
        StratTruss::new(self.bundle.clone(), self.split.entr.clone(), self.split.chr.clone())
            .expect("strata labeling is monotone")
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn label_poset(&self) -> &Poset {
        &self.label_poset
    }

    pub fn labeling(&self) -> &[usize] {
        &self.labeling
    }

    pub fn label_name(&self, x: usize) -> &str {
        self.label_poset.name(self.labeling[x])
    }

    pub fn strata(&self) -> &[usize] {
        &self.split.chr
    }

    pub fn stratum_of(&self, x: usize) -> usize {
        self.split.chr[x]
    }

    pub fn num_strata(&self) -> usize {
        self.split.entr.len()
    }

    pub fn entr(&self) -> &Poset {
        &self.split.entr
    }

    pub fn stratum_label(&self, s: usize) -> usize {
        self.split.cons[s]
    }

    pub fn stratum_members(&self, s: usize) -> Vec<usize> {
        (0..self.split.chr.len()).filter(|&x| self.split.chr[x] == s).collect()
    }

    /// Pull the labeling back along a restriction.
    pub fn restricted(&self, r: &Restricted) -> StratTruss {
        let top = &r.maps[r.maps.len() - 1];
        let labels = top.iter().map(|&x| self.labeling[x]).collect();
        StratTruss::new(r.bundle.clone(), self.label_poset.clone(), labels)
            .expect("restriction of a labeling is a labeling")
    }

    pub fn with_bundle(&self, bundle: Bundle) -> Result<StratTruss, StratError> {
        StratTruss::new(bundle, self.label_poset.clone(), self.labeling.clone())
    }

    pub fn neighborhood(&self, x: usize) -> Result<(StratTruss, Restricted), StratError> {
        let r = self.bundle.neighborhood(x)?;
        Ok((self.restricted(&r), r))
    }

    pub fn closure_up(&self, x: usize) -> Result<(StratTruss, Restricted), StratError> {
        let r = self.bundle.closure_up(x)?;
        Ok((self.restricted(&r), r))
    }

    /// Dual bundle, labels into the opposite label poset.
    pub fn dual(&self) -> StratTruss {
        StratTruss::new(self.bundle.dual(), self.label_poset.opposite(), self.labeling.clone())
            .expect("dual labeling is monotone")
    }

    /// Constant extension by a truss on top.
    pub fn product(&self, t: &Bundle) -> StratTruss {
        let b = self.bundle.product(t);
        let m = t.top().len();
        let labels = (0..b.top().len()).map(|x| self.labeling[x / m]).collect();
        StratTruss::new(b, self.label_poset.clone(), labels).unwrap()
    }

    pub fn compactify(&self) -> Result<(StratTruss, crate::truss::Compactified), StratError> {
        let c = self.bundle.compactify()?;
        let n = self.bundle.n();
        let labels = c.cr[n].iter().map(|&x| self.labeling[x]).collect();
        let st = StratTruss::new(c.bundle.clone(), self.label_poset.clone(), labels)?;
        Ok((st, c))
    }

    pub fn interior(&self) -> Result<(StratTruss, Restricted), StratError> {
        let r = self.bundle.interior()?;
        Ok((self.restricted(&r), r))
    }
}

/// Stratified equality: same bundle structure and same strata.
pub fn strat_equal(a: &StratTruss, b: &StratTruss) -> bool {
    a.bundle.structure() == b.bundle.structure() && a.split.chr == b.split.chr
}

/// A map of stratified trusses given by level-wise element assignments.
#[derive(Clone, Debug)]
pub struct Coarsening {
    pub source: StratTruss,
    pub target: StratTruss,
    /// `maps[i][x]` for level `i`, level 0 being the base
    pub maps: Vec<Vec<usize>>,
}

impl Coarsening {
    pub fn identity(st: &StratTruss) -> Coarsening {
        let b = st.bundle();
        Coarsening {
            source: st.clone(),
            target: st.clone(),
            maps: (0..=b.n()).map(|i| (0..b.total(i).len()).collect()).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.maps.iter().all(|m| m.iter().enumerate().all(|(i, &j)| i == j))
            && self.source.bundle().structure() == self.target.bundle().structure()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Coarsening) -> Coarsening {
        let maps = self
            .maps
            .iter()
            .zip(&next.maps)
            .map(|(a, b)| a.iter().map(|&x| b[x]).collect())
            .collect();
        Coarsening {
            source: self.source.clone(),
            target: next.target.clone(),
            maps,
        }
    }
}

/// Check every coarsening clause; returns the list of violations.
pub fn coarsening_violations(f: &Coarsening) -> Vec<String> {
    let mut errs = Vec::new();
    let (s, t) = (f.source.bundle(), f.target.bundle());
    let n = s.n();
    if t.n() != n || f.maps.len() != n + 1 {
        return vec!["level counts differ".into()];
    }
    if f.maps[0].iter().enumerate().any(|(i, &j)| i != j) || s.base().len() != t.base().len() {
        errs.push("base is not fixed".into());
    }
    for i in 1..=n {
        let m = &f.maps[i];
        if m.len() != s.total(i).len() || m.iter().any(|&y| y >= t.total(i).len()) {
            errs.push(format!("level {i}: assignment out of range"));
            continue;
        }
        let mut hit = vec![false; t.total(i).len()];
        for &y in m {
            hit[y] = true;
        }
        if hit.iter().any(|h| !h) {
            errs.push(format!("level {i}: not surjective"));
        }
        for x in 0..m.len() {
            let (a, p) = s.owner(i, x);
            let (b, q) = t.owner(i, m[x]);
            if f.maps[i - 1][a] != b {
                errs.push(format!("level {i}: does not commute with projection at {x}"));
                continue;
            }
            if s.dim(i, x) == Dim::R && t.dim(i, m[x]) != Dim::R {
                errs.push(format!("level {i}: not cocellular at {x}"));
            }
            let (la, lb) = (s.fiber(i, a).len(), t.fiber(i, b).len());
            if (p == 0 && q != 0) || (p == la - 1 && q != lb - 1) {
                errs.push(format!("level {i}: endpoint not preserved at {x}"));
            }
            if (p == 0 || p == la - 1) && s.dim(i, x) != t.dim(i, m[x]) {
                errs.push(format!("level {i}: endpoint dim changed at {x}"));
            }
            if p + 1 < la {
                let (_, q2) = t.owner(i, m[x + 1]);
                if q2 < q {
                    errs.push(format!("level {i}: not frame monotone at {x}"));
                }
            }
        }
        for &(x, y) in s.total(i).covers() {
            if !t.total(i).le(m[x], m[y]) {
                errs.push(format!("level {i}: not monotone on {x} <= {y}"));
            }
        }
    }
    if errs.is_empty() {
        let top = &f.maps[n];
        if f.source.label_poset() == f.target.label_poset() {
            for x in 0..top.len() {
                if f.source.labeling()[x] != f.target.labeling()[top[x]] {
                    errs.push(format!("label changes at {x}"));
                    break;
                }
            }
        }
        let (es, et) = (f.source.entr(), f.target.entr());
        let mut smap = vec![usize::MAX; es.len()];
        let mut ok = es.len() == et.len();
        for x in 0..top.len() {
            let (a, b) = (f.source.stratum_of(x), f.target.stratum_of(top[x]));
            if smap[a] == usize::MAX {
                smap[a] = b;
            } else if smap[a] != b {
                ok = false;
            }
        }
        if ok {
            let img: BTreeSet<usize> = smap.iter().copied().collect();
            ok = img.len() == es.len()
                && (0..es.len()).all(|a| (0..es.len()).all(|b| es.le(a, b) == et.le(smap[a], smap[b])));
        }
        if !ok {
            errs.push("entrance path posets are not isomorphic".into());
        }
    }
    errs
}

pub fn is_coarsening(f: &Coarsening) -> bool {
    coarsening_violations(f).is_empty()
}

/// Quotient deleting the given singular elements (per level, sets of
/// interior singular elements). Returns `None` if no valid coarsening
/// with these deletions exists.
pub fn quotient(st: &StratTruss, deletions: &[BTreeSet<usize>]) -> Option<Coarsening> {
    let s = st.bundle();
    let n = s.n();
    let mut maps: Vec<Vec<usize>> = vec![(0..s.base().len()).collect()];
    let mut levels = Vec::new();
    let mut tprev_len = s.base().len();
    for i in 1..=n {
        let del = &deletions[i];
        let prev_map = &maps[i - 1];
        // target fiber and position map per source fiber
        let mut tfib: Vec<Option<Fiber>> = vec![None; tprev_len];
        let mut pos: Vec<Vec<usize>> = Vec::with_capacity(prev_map.len());
        for (a, &ta) in prev_map.iter().enumerate() {
            let f = s.fiber(i, a);
            let mut dims = Vec::new();
            let mut pm = Vec::with_capacity(f.len());
            for p in 0..f.len() {
                let x = s.element(i, a, p);
                if del.contains(&x) && (p == 0 || p + 1 == f.len() || f.is_regular(p)) {
                    return None;
                }
                let merged = p > 0
                    && (del.contains(&x) || del.contains(&s.element(i, a, p - 1)));
                if !merged {
                    dims.push(f.dim(p));
                }
                pm.push(dims.len() - 1);
            }
            let g = Fiber::from_dims(dims).ok()?;
            match &tfib[ta] {
                Some(h) if h != &g => return None,
                _ => tfib[ta] = Some(g),
            }
            pos.push(pm);
        }
        let fibers: Vec<Fiber> = tfib.into_iter().collect::<Option<Vec<_>>>()?;
        let mut off = Vec::with_capacity(fibers.len());
        let mut o = 0;
        for f in &fibers {
            off.push(o);
            o += f.len();
        }
        let mut map = vec![0; s.total(i).len()];
        for x in 0..map.len() {
            let (a, p) = s.owner(i, x);
            map[x] = off[prev_map[a]] + pos[a][p];
        }
        let mut edges = BTreeSet::new();
        for &(x, y) in s.total(i).covers() {
            if map[x] != map[y] {
                edges.insert((map[x], map[y]));
            }
        }
        levels.push((fibers, edges.into_iter().collect::<Vec<_>>()));
        tprev_len = o;
        maps.push(map);
    }
    let tb = Bundle::from_orders(s.base().clone(), levels).ok()?;
    let mut labels = vec![usize::MAX; tb.top().len()];
    for (x, &y) in maps[n].iter().enumerate() {
        let l = st.labeling()[x];
        if labels[y] != usize::MAX && labels[y] != l {
            return None;
        }
        labels[y] = l;
    }
    let target = StratTruss::new(tb, st.label_poset().clone(), labels).ok()?;
    let f = Coarsening {
        source: st.clone(),
        target,
        maps,
    };
    is_coarsening(&f).then_some(f)
}

/// Interior singular elements at level `i`.
fn interior_singulars(b: &Bundle, i: usize) -> Vec<usize> {
    (0..b.total(i).len())
        .filter(|&x| {
            let (a, p) = b.owner(i, x);
            let len = b.fiber(i, a).len();
            b.dim(i, x) == Dim::S && p != 0 && p + 1 != len
        })
        .collect()
}

/// Exhaustive list of all coarsenings out of `st` (test oracle).
pub fn enumerate_coarsenings(st: &StratTruss, max_candidates: usize) -> Result<Vec<Coarsening>, StratError> {
    let b = st.bundle();
    let n = b.n();
    let cands: Vec<Vec<usize>> = (0..=n)
        .map(|i| if i == 0 { Vec::new() } else { interior_singulars(b, i) })
        .collect();
    let bits: usize = cands.iter().map(|c| c.len()).sum();
    if bits >= 63 || (1usize << bits) > max_candidates {
        return Err(StratError::SizeBoundExceeded(1usize.checked_shl(bits as u32).unwrap_or(usize::MAX)));
    }
    let flat: Vec<(usize, usize)> = cands
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&x| (i, x)))
        .collect();
    let mut out = Vec::new();
    for mask in 0..(1usize << bits) {
        let mut del = vec![BTreeSet::new(); n + 1];
        for (k, &(i, x)) in flat.iter().enumerate() {
            if mask >> k & 1 == 1 {
                del[i].insert(x);
            }
        }
        if let Some(c) = quotient(st, &del) {
            out.push(c);
        }
    }
    Ok(out)
}

/// Candidate elementary collapse at a singular element `x` of level `i`:
/// delete `x` together with every singular of level `i` below it.
fn elementary(st: &StratTruss, i: usize, x: usize) -> Option<Coarsening> {
    let b = st.bundle();
    let n = b.n();
    let t = b.total(i);
    let mut del = vec![BTreeSet::new(); n + 1];
    for y in t.down_set(x).ones() {
        if b.dim(i, y) == Dim::S {
            del[i].insert(y);
        }
    }
    quotient(st, &del)
}

/// Normal form by repeated elementary collapses, least level-descending
/// candidate first.
pub fn normalize(st: &StratTruss) -> (StratTruss, Coarsening) {
    let mut witness = Coarsening::identity(st);
    let mut cur = st.clone();
    'outer: loop {
        let b = cur.bundle().clone();
        for i in (1..=b.n()).rev() {
            for x in interior_singulars(&b, i) {
                if let Some(c) = elementary(&cur, i, x) {
                    witness = witness.then(&c);
                    cur = c.target;
                    continue 'outer;
                }
            }
        }
        break;
    }
    (cur, witness)
}

/// Normal form by batch deletion, one level at a time from the top down.
pub fn normalize_descending(st: &StratTruss) -> (StratTruss, Coarsening) {
    let mut witness = Coarsening::identity(st);
    let mut cur = st.clone();
    loop {
        let mut changed = false;
        for i in (1..=cur.bundle().n()).rev() {
            let b = cur.bundle().clone();
            let n = b.n();
            // greatest deletable set: drop candidates that fail alone or whose
            // lower singulars are not deletable
            let mut cand: BTreeSet<usize> = interior_singulars(&b, i)
                .into_iter()
                .filter(|&x| elementary(&cur, i, x).is_some())
                .collect();
            loop {
                let t = b.total(i);
                let keep: BTreeSet<usize> = cand
                    .iter()
                    .copied()
                    .filter(|&x| t.down_set(x).ones().all(|y| b.dim(i, y) == Dim::R || cand.contains(&y)))
                    .collect();
                if keep == cand {
                    break;
                }
                cand = keep;
            }
            if cand.is_empty() {
                continue;
            }
            let mut del = vec![BTreeSet::new(); n + 1];
            del[i] = cand;
            if let Some(c) = quotient(&cur, &del) {
                witness = witness.then(&c);
                cur = c.target;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // finish any leftovers greedily
    let (nf, w) = normalize(&cur);
    (nf, witness.then(&w))
}

pub fn is_normalized(st: &StratTruss) -> bool {
    normalize(st).1.is_identity()
}

/// Subdivide top-level regular elements into `2k+1` pieces along a sheet.
fn subdivide_top(st: &StratTruss, x: usize, k: usize) -> Option<StratTruss> {
    if k == 0 {
        return Some(st.clone());
    }
    let b = st.bundle();
    let n = b.n();
    let prev = b.total(n - 1);
    // sheet: regular top elements linked by cofunction pairs across covers
    let mut sheet = BTreeSet::from([x]);
    let mut stack = vec![x];
    while let Some(y) = stack.pop() {
        let (a, _) = b.owner(n, y);
        for c in prev.upper_covers(a).into_iter().chain(prev.lower_covers(a)) {
            let (lo, hi) = if prev.le(a, c) { (a, c) } else { (c, a) };
            let r = b.rel(n, lo, hi);
            let mut linked = Vec::new();
            for (t, s) in r.pairs() {
                let (u, v) = (b.element(n, lo, t), b.element(n, hi, s));
                if b.dim(n, u) == Dim::R && b.dim(n, v) == Dim::R {
                    if u == y {
                        linked.push(v);
                    }
                    if v == y {
                        linked.push(u);
                    }
                }
            }
            if linked.len() != 1 {
                return None;
            }
            if sheet.insert(linked[0]) {
                stack.push(linked[0]);
            }
        }
    }
    let extra = 2 * k;
    let mut levels: Vec<(Vec<Fiber>, Vec<(usize, usize)>)> = Vec::new();
    for i in 1..n {
        levels.push((b.fibers(i).to_vec(), b.total(i).covers().to_vec()));
    }
    // new positions
    let mut newpos: Vec<(usize, usize)> = Vec::new(); // per old element: range in new fiber
    let mut fibers = Vec::new();
    let mut o = 0;
    for a in 0..prev.len() {
        let f = b.fiber(n, a);
        let mut dims = Vec::new();
        for p in 0..f.len() {
            let e = b.element(n, a, p);
            let start = dims.len();
            dims.push(f.dim(p));
            if sheet.contains(&e) {
                for j in 0..extra {
                    dims.push(if j % 2 == 0 { Dim::S } else { Dim::R });
                }
            }
            newpos.push((o + start, o + dims.len()));
        }
        o += dims.len();
        fibers.push(Fiber::from_dims(dims).ok()?);
    }
    let mut edges = Vec::new();
    for (fi, f) in fibers.iter().enumerate() {
        let base = newpos[b.element(n, fi, 0)].0;
        for (u, v) in f.covers() {
            edges.push((base + u, base + v));
        }
    }
    for &(a, c) in prev.covers() {
        let r = b.rel(n, a, c);
        for (t, s) in r.pairs() {
            let (u, v) = (b.element(n, a, t), b.element(n, c, s));
            let (ru, rv) = (newpos[u], newpos[v]);
            if sheet.contains(&u) && sheet.contains(&v) {
                for j in 0..=extra {
                    edges.push((ru.0 + j, rv.0 + j));
                }
            } else if sheet.contains(&u) {
                // v is a singular next to the regular that u is linked to
                let y = r
                    .pairs()
                    .into_iter()
                    .find(|&(t2, s2)| t2 == t && b.dim(n, b.element(n, c, s2)) == Dim::R)
                    .map(|(_, s2)| s2);
                let left = y.map(|y| s < y).unwrap_or(true);
                edges.push((if left { ru.0 } else { ru.1 - 1 }, rv.0));
            } else {
                edges.push((ru.0, rv.0));
            }
        }
    }
    levels.push((fibers, edges));
    let nb = Bundle::from_orders(b.base().clone(), levels).ok()?;
    let mut labels = vec![0; nb.top().len()];
    for (old, &(lo, hi)) in newpos.iter().enumerate() {
        for l in labels.iter_mut().take(hi).skip(lo) {
            *l = st.labeling()[old];
        }
    }
    StratTruss::new(nb, st.label_poset().clone(), labels).ok()
}

/// Labeled 1-truss reduced by deleting singulars whose neighbours share its label.
fn reduced_runs(f: &Fiber, labels: &[usize]) -> Vec<(Dim, usize, usize)> {
    // (dim, label, number of source regulars merged)
    let mut out: Vec<(Dim, usize, usize)> = Vec::new();
    let mut p = 0;
    while p < f.len() {
        if f.is_regular(p) {
            let mut count = 1;
            let mut q = p;
            while q + 2 < f.len() && labels[q + 1] == labels[p] && labels[q + 2] == labels[p] {
                q += 2;
                count += 1;
            }
            out.push((Dim::R, labels[p], count));
            p = q + 1;
        } else {
            out.push((Dim::S, labels[p], 1));
            p += 1;
        }
    }
    out
}

/// Make the `k`-sides of `a` (plus) and `b` (minus) agree, refining top-level
/// regular regions if needed.
pub fn match_sides(a: &StratTruss, b: &StratTruss, k: usize) -> Result<(StratTruss, StratTruss), StratError> {
    let side = |x: &StratTruss, plus: bool| -> Result<StratTruss, StratError> {
        let r = x.bundle().side(k, plus)?;
        Ok(x.restricted(&r))
    };
    let (sa, sb) = (side(a, true)?, side(b, false)?);
    if strat_equal(&sa.canonical(), &sb.canonical()) && sa.labeling() == sb.labeling() {
        return Ok((a.clone(), b.clone()));
    }
    let n = a.bundle().n();
    if n == 0 || b.bundle().n() != n || k == 1 && n == 1 {
        return Err(StratError::NoCommonRefinement);
    }
    let (ba, bb) = (sa.bundle(), sb.bundle());
    if ba.truncate_below(n - 1)?.structure() != bb.truncate_below(n - 1)?.structure() {
        return Err(StratError::NoCommonRefinement);
    }
    let ra = a.bundle().side(k, true)?;
    let rb = b.bundle().side(k, false)?;
    let mut na = a.clone();
    let mut nb = b.clone();
    let mut subdiv_a: Vec<(usize, usize)> = Vec::new();
    let mut subdiv_b: Vec<(usize, usize)> = Vec::new();
    for c in 0..ba.total(n - 1).len() {
        let (fa, fb) = (ba.fiber(n, c), bb.fiber(n, c));
        let la: Vec<usize> = (0..fa.len()).map(|p| sa.labeling()[ba.element(n, c, p)]).collect();
        let lb: Vec<usize> = (0..fb.len()).map(|p| sb.labeling()[bb.element(n, c, p)]).collect();
        let (xa, xb) = (reduced_runs(fa, &la), reduced_runs(fb, &lb));
        let key = |v: &[(Dim, usize, usize)]| v.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>();
        if key(&xa) != key(&xb) {
            return Err(StratError::NoCommonRefinement);
        }
        // walk runs; position of each run's first regular element
        let (mut pa, mut pb) = (0, 0);
        for (u, v) in xa.iter().zip(&xb) {
            let (wa, wb) = (2 * u.2 - 1, 2 * v.2 - 1);
            if u.0 == Dim::R && u.2 != v.2 {
                if u.2 < v.2 {
                    subdiv_a.push((ra.maps[n][ba.element(n, c, pa)], v.2 - u.2));
                } else {
                    subdiv_b.push((rb.maps[n][bb.element(n, c, pb)], u.2 - v.2));
                }
            }
            pa += wa;
            pb += wb;
        }
    }
    // apply from the highest element down so earlier indices stay valid
    subdiv_a.sort();
    subdiv_b.sort();
    for &(x, kk) in subdiv_a.iter().rev() {
        na = subdivide_top(&na, x, kk).ok_or(StratError::NoCommonRefinement)?;
    }
    for &(x, kk) in subdiv_b.iter().rev() {
        nb = subdivide_top(&nb, x, kk).ok_or(StratError::NoCommonRefinement)?;
    }
    let (sa, sb) = (side(&na, true)?, side(&nb, false)?);
    if sa.bundle().structure() == sb.bundle().structure() && sa.labeling() == sb.labeling() {
        Ok((na, nb))
    } else {
        Err(StratError::NoCommonRefinement)
    }
}

/// Glue two stratified trusses with equal sides; labels must share a label poset.
pub fn glue_strat(a: &StratTruss, b: &StratTruss, k: usize) -> Result<StratTruss, StratError> {
    let g = Bundle::glue(a.bundle(), b.bundle(), k)?;
    let n = g.bundle.n();
    let mut labels = vec![0; g.bundle.top().len()];
    for (x, &y) in g.map_a[n].iter().enumerate() {
        labels[y] = a.labeling()[x];
    }
    for (x, &y) in g.map_b[n].iter().enumerate() {
        labels[y] = b.labeling()[x];
    }
    StratTruss::new(g.bundle, a.label_poset().clone(), labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(f: &str, labels: &[usize], lp: &Poset) -> StratTruss {
        StratTruss::new(Bundle::one(f).unwrap(), lp.clone(), labels.to_vec()).unwrap()
    }

    fn apb() -> Poset {
        Poset::build(&["a", "p", "b"], &[("a", "p"), ("b", "p")]).unwrap()
    }

    #[test]
    fn strata_counts() {
        assert_eq!(labeled("RSR", &[0, 1, 2], &apb()).num_strata(), 3);
        assert_eq!(StratTruss::constant(Bundle::one("RSR").unwrap()).num_strata(), 1);
    }

    #[test]
    fn collapse_constant() {
        let x = StratTruss::constant(Bundle::one("RSR").unwrap());
        let (nf, w) = normalize(&x);
        assert_eq!(nf.bundle().fiber(1, 0).to_string(), "R");
        assert!(is_coarsening(&w));
        let all = enumerate_coarsenings(&x, 1 << 10).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn distinct_labels_block() {
        let x = labeled("RSR", &[0, 1, 2], &apb());
        assert!(is_normalized(&x));
        assert_eq!(enumerate_coarsenings(&x, 1 << 10).unwrap().len(), 1);
    }

    #[test]
    fn five_constant() {
        let x = StratTruss::constant(Bundle::one("RSRSR").unwrap());
        assert_eq!(enumerate_coarsenings(&x, 1 << 10).unwrap().len(), 4);
    }

    #[test]
    fn subdivided_sides_match() {
        let lp = Poset::build(&["o", "i"], &[("o", "i")]).unwrap();
        let id1 = |f: &str, l: &[usize]| {
            let b = Bundle::one("R").unwrap().product(&Bundle::one(f).unwrap());
            StratTruss::new(b, lp.clone(), l.to_vec()).unwrap()
        };
        let a = id1("RSR", &[0, 1, 0]);
        let b = id1("RSRSR", &[0, 1, 0, 0, 0]);
        let (a2, b2) = match_sides(&a, &b, 2).unwrap();
        assert_eq!(a2.bundle().fiber(2, 0).to_string(), "RSRSR");
        assert_eq!(b2, b);
    }
}
