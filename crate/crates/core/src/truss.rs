//! 1-trusses, bordisms between them, and towers of 1-truss bundles.
//!
//! A bundle stores, per level, one fiber for each element of the previous
//! total poset together with the full order on the level's elements. Elements
//! of a level are numbered fiber by fiber in the order of the previous level,
//! so numbering agrees with the lexicographic order on element paths.

use crate::poset::{ClosureMode, Poset, PosetError};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrussError {
    #[error("empty fiber")]
    EmptyFiber,
    #[error("fiber `{0}` is not alternating")]
    NotAlternating(String),
    #[error("bad character `{0}` in fiber string")]
    BadFiberChar(char),
    #[error("invalid bordism over {key}: {reason}")]
    BadBordism { key: String, reason: String },
    #[error("composites disagree between {from} and {to}")]
    PathDependence { from: String, to: String },
    #[error("order on fiber over {0} differs from the fiber order")]
    FiberOrder(String),
    #[error("order does not project monotonically: {0} <= {1}")]
    NotFibered(String, String),
    #[error("missing bordism over cover {0}")]
    MissingBordism(String),
    #[error("{0} is not a cover")]
    UnknownCover(String),
    #[error("level {0} out of range")]
    LevelOutOfRange(usize),
    #[error("invalid element path {0}")]
    InvalidPath(String),
    #[error("not a subtruss: {0}")]
    NotASubtruss(String),
    #[error("sides do not match")]
    SidesMismatch,
    #[error("bundle is not open")]
    NotOpen,
    #[error("bundle is not closed")]
    NotClosed,
    #[error(transparent)]
    Poset(#[from] PosetError),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Dim {
    S,
    R,
}

impl Dim {
    pub fn value(self) -> i64 {
        match self {
            Dim::S => 0,
            Dim::R => 1,
        }
    }

    pub fn flip(self) -> Dim {
        match self {
            Dim::S => Dim::R,
            Dim::R => Dim::S,
        }
    }
}

/// A 1-truss: alternating singular/regular elements in frame order.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Fiber(Vec<Dim>);

impl Fiber {
    pub fn parse(s: &str) -> Result<Fiber, TrussError> {
        let dims = s
            .chars()
            .map(|c| match c {
                'S' => Ok(Dim::S),
                'R' => Ok(Dim::R),
                c => Err(TrussError::BadFiberChar(c)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Fiber::from_dims(dims)
    }

    pub fn from_dims(dims: Vec<Dim>) -> Result<Fiber, TrussError> {
        if dims.is_empty() {
            return Err(TrussError::EmptyFiber);
        }
        if dims.windows(2).any(|w| w[0] == w[1]) {
            let s: String = dims.iter().map(|d| if *d == Dim::S { 'S' } else { 'R' }).collect();
            return Err(TrussError::NotAlternating(s));
        }
        Ok(Fiber(dims))
    }

    /// Alternating fiber of length `len` starting with `first`.
    pub fn alternating(first: Dim, len: usize) -> Fiber {
        let dims = (0..len).map(|i| if i % 2 == 0 { first } else { first.flip() }).collect();
        Fiber(dims)
    }

    pub fn point_open() -> Fiber {
        Fiber(vec![Dim::R])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dims(&self) -> &[Dim] {
        &self.0
    }

    pub fn dim(&self, i: usize) -> Dim {
        self.0[i]
    }

    pub fn is_singular(&self, i: usize) -> bool {
        self.0[i] == Dim::S
    }

    pub fn is_regular(&self, i: usize) -> bool {
        self.0[i] == Dim::R
    }

    /// Entrance path order: regular elements lie below their singular neighbours.
    pub fn le(&self, i: usize, j: usize) -> bool {
        i == j || (i.abs_diff(j) == 1 && self.is_regular(i) && self.is_singular(j))
    }

    pub fn is_open(&self) -> bool {
        self.0[0] == Dim::R && self.0[self.len() - 1] == Dim::R
    }

    pub fn is_closed(&self) -> bool {
        self.0[0] == Dim::S && self.0[self.len() - 1] == Dim::S
    }

    pub fn dual(&self) -> Fiber {
        Fiber(self.0.iter().map(|d| d.flip()).collect())
    }

    pub fn singulars(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_singular(i)).collect()
    }

    pub fn regulars(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_regular(i)).collect()
    }

    /// Covers `(r, s)` of the fiber poset.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for i in 1..self.len() {
            if self.is_regular(i - 1) {
                v.push((i - 1, i));
            } else {
                v.push((i, i - 1));
            }
        }
        v
    }

    pub fn slice(&self, lo: usize, hi: usize) -> Result<Fiber, TrussError> {
        Fiber::from_dims(self.0[lo..hi].to_vec())
    }

    pub fn concat_shared(&self, other: &Fiber) -> Fiber {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0[1..]);
        Fiber(v)
    }

    /// `R..R` becomes `SR..RS`.
    pub fn compactified(&self) -> Fiber {
        let mut v = vec![Dim::S];
        v.extend_from_slice(&self.0);
        v.push(Dim::S);
        Fiber(v)
    }
}

impl fmt::Display for Fiber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            f.write_str(if *d == Dim::S { "S" } else { "R" })?;
        }
        Ok(())
    }
}

/// A Boolean relation between the elements of two fibers.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Rel {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl Rel {
    pub fn empty(rows: usize, cols: usize) -> Rel {
        Rel {
            rows,
            cols,
            bits: vec![false; rows * cols],
        }
    }

    pub fn from_pairs(rows: usize, cols: usize, pairs: &[(usize, usize)]) -> Rel {
        let mut r = Rel::empty(rows, cols);
        for &(t, s) in pairs {
            r.set(t, s);
        }
        r
    }

    /// The fiber order of `f`, the identity bordism.
    pub fn identity(f: &Fiber) -> Rel {
        let n = f.len();
        let mut r = Rel::empty(n, n);
        for i in 0..n {
            for j in 0..n {
                if f.le(i, j) {
                    r.set(i, j);
                }
            }
        }
        r
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, t: usize, s: usize) -> bool {
        self.bits[t * self.cols + s]
    }

    pub fn set(&mut self, t: usize, s: usize) {
        self.bits[t * self.cols + s] = true;
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for t in 0..self.rows {
            for s in 0..self.cols {
                if self.get(t, s) {
                    v.push((t, s));
                }
            }
        }
        v
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn compose(&self, other: &Rel) -> Rel {
        assert_eq!(self.cols, other.rows);
        let mut r = Rel::empty(self.rows, other.cols);
        for t in 0..self.rows {
            for u in 0..self.cols {
                if self.get(t, u) {
                    for s in 0..other.cols {
                        if other.get(u, s) {
                            r.set(t, s);
                        }
                    }
                }
            }
        }
        r
    }

    pub fn transpose(&self) -> Rel {
        let mut r = Rel::empty(self.cols, self.rows);
        for (t, s) in self.pairs() {
            r.set(s, t);
        }
        r
    }

    /// Close under `t' <= t` in the source and `s <= s'` in the target.
    pub fn closed(&self, src: &Fiber, tgt: &Fiber) -> Rel {
        let mut r = self.clone();
        for (t, s) in self.pairs() {
            for t2 in 0..src.len() {
                if src.le(t2, t) {
                    for s2 in 0..tgt.len() {
                        if tgt.le(s, s2) {
                            r.set(t2, s2);
                        }
                    }
                }
            }
        }
        r
    }

    /// Generating pairs: those not implied by closure from other pairs.
    pub fn generators(&self, src: &Fiber, tgt: &Fiber) -> Vec<(usize, usize)> {
        self.pairs()
            .into_iter()
            .filter(|&(t, s)| {
                !self.pairs().iter().any(|&(t2, s2)| {
                    (t2, s2) != (t, s) && src.le(t, t2) && tgt.le(s2, s)
                })
            })
            .collect()
    }

    /// The relation between compactified fibers.
    pub fn compactified(&self, src: &Fiber, tgt: &Fiber) -> Rel {
        let (a, b) = (self.rows, self.cols);
        let mut r = Rel::empty(a + 2, b + 2);
        for (t, s) in self.pairs() {
            r.set(t + 1, s + 1);
        }
        r.set(0, 0);
        r.set(a + 1, b + 1);
        r.closed(&src.compactified(), &tgt.compactified())
    }
}

/// Check the bordism axioms for `r` from `src` to `tgt`.
pub fn check_bordism(src: &Fiber, tgt: &Fiber, r: &Rel) -> Result<(), String> {
    if r.rows != src.len() || r.cols != tgt.len() {
        return Err("relation shape does not match fibers".into());
    }
    if &r.closed(src, tgt) != r {
        return Err("relation is not closed".into());
    }
    for t in src.singulars() {
        let img: Vec<usize> = (0..tgt.len()).filter(|&s| r.get(t, s)).collect();
        let sing: Vec<usize> = img.iter().copied().filter(|&s| tgt.is_singular(s)).collect();
        if sing.len() != 1 || img.len() != 1 {
            return Err(format!("singular {t} does not map to exactly one singular"));
        }
    }
    for s in tgt.regulars() {
        let pre: Vec<usize> = (0..src.len()).filter(|&t| r.get(t, s)).collect();
        if pre.len() != 1 || !src.is_regular(pre[0]) {
            return Err(format!("regular {s} is not hit by exactly one regular"));
        }
    }
    for s in 0..tgt.len() {
        if !(0..src.len()).any(|t| r.get(t, s)) {
            return Err(format!("target element {s} is not related"));
        }
    }
    let pairs = r.pairs();
    for &(t, s) in &pairs {
        for &(t2, s2) in &pairs {
            if t < t2 && s2 < s {
                return Err(format!("pairs ({t},{s}) and ({t2},{s2}) cross"));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Level {
    fibers: Vec<Fiber>,
    offsets: Vec<usize>,
    owner: Vec<(usize, usize)>,
    total: Poset,
}

/// A tower of 1-truss bundles over a base poset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bundle {
    base: Poset,
    levels: Vec<Level>,
}

/// Per-level data for `Bundle::from_orders`: fibers plus generating edges
/// between level element indices.
pub type LevelOrder = (Vec<Fiber>, Vec<(usize, usize)>);

/// Per-level data keyed by covers of the previous total poset.
pub type LevelBordisms = (Vec<Fiber>, BTreeMap<(usize, usize), Vec<(usize, usize)>>);

/// A restriction together with the new-to-old element maps of every level.
#[derive(Clone, Debug)]
pub struct Restricted {
    pub bundle: Bundle,
    /// `maps[i][new] = old` for level `i` (level 0 is the base)
    pub maps: Vec<Vec<usize>>,
}

impl Bundle {
    /// The 0-level bundle consisting of a bare poset.
    pub fn bare(base: Poset) -> Bundle {
        Bundle {
            base,
            levels: Vec::new(),
        }
    }

    /// Build from per-level fibers and bordisms on covers given by generating pairs.
    pub fn from_bordisms(base: Poset, levels: Vec<LevelBordisms>) -> Result<Bundle, TrussError> {
        let mut b = Bundle::bare(base);
        for (fibers, bords) in levels {
            let prev = b.total(b.n()).clone();
            if fibers.len() != prev.len() {
                return Err(TrussError::InvalidPath(format!(
                    "expected {} fibers, got {}",
                    prev.len(),
                    fibers.len()
                )));
            }
            for &(a, c) in bords.keys() {
                if !prev.is_cover(a, c) {
                    return Err(TrussError::UnknownCover(format!(
                        "{}|{}",
                        prev.name(a),
                        prev.name(c)
                    )));
                }
            }
            let offsets = offsets_of(&fibers);
            let mut edges = Vec::new();
            for &(a, c) in prev.covers() {
                let pairs = bords.get(&(a, c)).ok_or_else(|| {
                    TrussError::MissingBordism(format!("{}|{}", prev.name(a), prev.name(c)))
                })?;
                for &(t, s) in pairs {
                    if t >= fibers[a].len() || s >= fibers[c].len() {
                        return Err(TrussError::BadBordism {
                            key: format!("{}|{}", prev.name(a), prev.name(c)),
                            reason: format!("pair ({t},{s}) out of range"),
                        });
                    }
                    edges.push((offsets[a] + t, offsets[c] + s));
                }
            }
            b.push_level(fibers, edges)?;
        }
        Ok(b)
    }

    /// Build from per-level fibers and generating edges of the total orders.
    pub fn from_orders(base: Poset, levels: Vec<LevelOrder>) -> Result<Bundle, TrussError> {
        let mut b = Bundle::bare(base);
        for (fibers, edges) in levels {
            b.push_level(fibers, edges)?;
        }
        Ok(b)
    }

    fn push_level(&mut self, fibers: Vec<Fiber>, mut edges: Vec<(usize, usize)>) -> Result<(), TrussError> {
        let i = self.n() + 1;
        let prev = self.total(i - 1).clone();
        if fibers.len() != prev.len() {
            return Err(TrussError::InvalidPath(format!(
                "level {i}: expected {} fibers, got {}",
                prev.len(),
                fibers.len()
            )));
        }
        let offsets = offsets_of(&fibers);
        let mut owner = Vec::new();
        let mut names = Vec::new();
        let truss = self.base.len() == 1;
        for (a, f) in fibers.iter().enumerate() {
            for p in 0..f.len() {
                owner.push((a, p));
                names.push(if i == 1 {
                    if truss {
                        format!("{p}")
                    } else {
                        format!("{}:{p}", prev.name(a))
                    }
                } else {
                    format!("{}-{p}", prev.name(a))
                });
            }
            for (x, y) in f.covers() {
                edges.push((offsets[a] + x, offsets[a] + y));
            }
        }
        let total = Poset::from_edges(names, &edges)?;
        let level = Level {
            fibers,
            offsets,
            owner,
            total,
        };
        validate_level(&prev, &level)?;
        self.levels.push(level);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.levels.len()
    }

    pub fn base(&self) -> &Poset {
        &self.base
    }

    pub fn is_truss(&self) -> bool {
        self.base.len() == 1
    }

    pub fn total(&self, i: usize) -> &Poset {
        if i == 0 {
            &self.base
        } else {
            &self.levels[i - 1].total
        }
    }

    pub fn top(&self) -> &Poset {
        self.total(self.n())
    }

    pub fn fibers(&self, i: usize) -> &[Fiber] {
        &self.levels[i - 1].fibers
    }

    pub fn fiber(&self, i: usize, a: usize) -> &Fiber {
        &self.levels[i - 1].fibers[a]
    }

    pub fn offset(&self, i: usize, a: usize) -> usize {
        self.levels[i - 1].offsets[a]
    }

    /// `(element below, position in its fiber)`.
    pub fn owner(&self, i: usize, x: usize) -> (usize, usize) {
        self.levels[i - 1].owner[x]
    }

    pub fn element(&self, i: usize, a: usize, p: usize) -> usize {
        self.levels[i - 1].offsets[a] + p
    }

    /// Projection of a level-`i` element down to level `j <= i`.
    pub fn project(&self, i: usize, mut x: usize, j: usize) -> usize {
        for l in (j + 1..=i).rev() {
            x = self.owner(l, x).0;
        }
        x
    }

    /// Positions of a level-`i` element at levels `1..=i`.
    pub fn path(&self, i: usize, mut x: usize) -> Vec<usize> {
        let mut v = Vec::with_capacity(i);
        for l in (1..=i).rev() {
            let (a, p) = self.owner(l, x);
            v.push(p);
            x = a;
        }
        v.reverse();
        v
    }

    /// Base element under a level-`i` element.
    pub fn base_of(&self, i: usize, x: usize) -> usize {
        self.project(i, x, 0)
    }

    pub fn index_of_path(&self, base: usize, path: &[usize]) -> Result<usize, TrussError> {
        let mut x = base;
        for (l, &p) in path.iter().enumerate() {
            let lvl = l + 1;
            if lvl > self.n() || p >= self.fiber(lvl, x).len() {
                return Err(TrussError::InvalidPath(format!("{path:?}")));
            }
            x = self.element(lvl, x, p);
        }
        Ok(x)
    }

    pub fn dim(&self, i: usize, x: usize) -> Dim {
        let (a, p) = self.owner(i, x);
        self.fiber(i, a).dim(p)
    }

    /// Sum of fiber dims along the tower coordinates of a level-`i` element.
    pub fn cell_dim_at(&self, i: usize, mut x: usize) -> i64 {
        let mut d = 0;
        for l in (1..=i).rev() {
            d += self.dim(l, x).value();
            x = self.owner(l, x).0;
        }
        d
    }

    pub fn cell_dim(&self, x: usize) -> i64 {
        self.cell_dim_at(self.n(), x)
    }

    pub fn cell_dims(&self) -> Vec<i64> {
        (0..self.top().len()).map(|x| self.cell_dim(x)).collect()
    }

    /// Relation between fibers over `a <= b` at level `i`, read off the total order.
    pub fn rel(&self, i: usize, a: usize, b: usize) -> Rel {
        let lvl = &self.levels[i - 1];
        rel_from(lvl, a, b)
    }

    pub fn is_open(&self) -> bool {
        self.levels.iter().all(|l| l.fibers.iter().all(|f| f.is_open()))
    }

    pub fn is_closed(&self) -> bool {
        self.levels.iter().all(|l| l.fibers.iter().all(|f| f.is_closed()))
    }

    pub fn dual(&self) -> Bundle {
        let levels = self
            .levels
            .iter()
            .map(|l| {
                let fibers = l.fibers.iter().map(|f| f.dual()).collect();
                let edges = l.total.covers().iter().map(|&(a, b)| (b, a)).collect();
                (fibers, edges)
            })
            .collect();
        Bundle::from_orders(self.base.opposite(), levels).expect("dual of a valid bundle")
    }

    /// `self` with the levels of the truss `t` stacked on top as a constant bundle.
    pub fn product(&self, t: &Bundle) -> Bundle {
        assert!(t.is_truss(), "product expects a truss on the right");
        let s_top = self.top();
        let mut levels = self.level_orders();
        for j in 1..=t.n() {
            let tj = t.total(j);
            let tprev = t.total(j - 1);
            let mut fibers = Vec::with_capacity(s_top.len() * tprev.len());
            for _x in 0..s_top.len() {
                for tp in 0..tprev.len() {
                    fibers.push(t.fiber(j, tp).clone());
                }
            }
            let m = tj.len();
            let mut edges = Vec::new();
            for x in 0..s_top.len() {
                for &(a, b) in tj.covers() {
                    edges.push((x * m + a, x * m + b));
                }
            }
            for &(x, y) in s_top.covers() {
                for q in 0..m {
                    edges.push((x * m + q, y * m + q));
                }
            }
            levels.push((fibers, edges));
        }
        Bundle::from_orders(self.base.clone(), levels).expect("product of valid bundles")
    }

    fn level_orders(&self) -> Vec<LevelOrder> {
        self.levels
            .iter()
            .map(|l| (l.fibers.clone(), l.total.covers().to_vec()))
            .collect()
    }

    /// Levels `k+1..` over the level-`k` total poset.
    pub fn truncate_above(&self, k: usize) -> Result<Bundle, TrussError> {
        if k > self.n() {
            return Err(TrussError::LevelOutOfRange(k));
        }
        let base = self.total(k).clone();
        let base = if base.len() == 1 {
            base.renamed(vec!["*".into()])?
        } else {
            base
        };
        Bundle::from_orders(base, self.level_orders()[k..].to_vec())
    }

    /// Levels `1..=k` over the original base.
    pub fn truncate_below(&self, k: usize) -> Result<Bundle, TrussError> {
        if k > self.n() {
            return Err(TrussError::LevelOutOfRange(k));
        }
        Bundle::from_orders(self.base.clone(), self.level_orders()[..k].to_vec())
    }

    /// Keep the given element sets per level (level 0 = base); every kept
    /// element's projection must be kept and kept fibers must be contiguous.
    pub fn restrict(&self, keep: &[Vec<bool>]) -> Result<Restricted, TrussError> {
        assert_eq!(keep.len(), self.n() + 1);
        let base_keep: Vec<usize> = (0..self.base.len()).filter(|&x| keep[0][x]).collect();
        let base = self.base.induced(&base_keep);
        let mut maps = vec![base_keep];
        let mut levels = Vec::new();
        for i in 1..=self.n() {
            let prev_map = &maps[i - 1];
            let mut fibers = Vec::new();
            let mut map = Vec::new();
            for &a in prev_map {
                let f = self.fiber(i, a);
                let kept: Vec<usize> = (0..f.len()).filter(|&p| keep[i][self.element(i, a, p)]).collect();
                if kept.is_empty() {
                    return Err(TrussError::NotASubtruss(format!(
                        "empty fiber over {}",
                        self.total(i - 1).name(a)
                    )));
                }
                let (lo, hi) = (kept[0], kept[kept.len() - 1] + 1);
                if hi - lo != kept.len() {
                    return Err(TrussError::NotASubtruss(format!(
                        "non-contiguous fiber over {}",
                        self.total(i - 1).name(a)
                    )));
                }
                fibers.push(f.slice(lo, hi)?);
                for p in lo..hi {
                    map.push(self.element(i, a, p));
                }
            }
            for x in 0..self.total(i).len() {
                if keep[i][x] && !keep[i - 1][self.owner(i, x).0] {
                    return Err(TrussError::NotASubtruss("element over a dropped element".into()));
                }
            }
            let pos: BTreeMap<usize, usize> = map.iter().enumerate().map(|(k, &x)| (x, k)).collect();
            let t = self.total(i);
            let mut edges = Vec::new();
            for (k, &x) in map.iter().enumerate() {
                for y in t.up_set(x).ones() {
                    if let Some(&l) = pos.get(&y) {
                        if l != k {
                            edges.push((k, l));
                        }
                    }
                }
            }
            levels.push((fibers, edges));
            maps.push(map);
        }
        let bundle = Bundle::from_orders(base, levels)
            .map_err(|e| TrussError::NotASubtruss(e.to_string()))?;
        Ok(Restricted { bundle, maps })
    }

    fn restrict_by(&self, f: impl Fn(usize, usize) -> bool) -> Result<Restricted, TrussError> {
        let keep: Vec<Vec<bool>> = (0..=self.n())
            .map(|i| (0..self.total(i).len()).map(|x| f(i, x)).collect())
            .collect();
        self.restrict(&keep)
    }

    /// Restriction to the down-closure of a top element, level by level.
    pub fn neighborhood(&self, x: usize) -> Result<Restricted, TrussError> {
        self.closure_at(x, ClosureMode::Down)
    }

    /// Restriction to the up-closure of a top element, level by level.
    pub fn closure_up(&self, x: usize) -> Result<Restricted, TrussError> {
        self.closure_at(x, ClosureMode::Up)
    }

    fn closure_at(&self, x: usize, mode: ClosureMode) -> Result<Restricted, TrussError> {
        let n = self.n();
        if x >= self.top().len() {
            return Err(TrussError::InvalidPath(x.to_string()));
        }
        let proj: Vec<usize> = (0..=n).map(|j| self.project(n, x, j)).collect();
        let r = self.restrict_by(|i, y| match mode {
            ClosureMode::Down => self.total(i).le(y, proj[i]),
            _ => self.total(i).le(proj[i], y),
        })?;
        debug_assert_eq!(r.maps[n], self.top().closure_set(x, mode));
        Ok(r)
    }

    /// The restriction over a single base element, as a truss.
    pub fn fiber_over_base(&self, b: usize) -> Result<Restricted, TrussError> {
        let r = self.restrict_by(|i, y| self.project(i, y, 0) == b)?;
        let base = r.bundle.base.renamed(vec!["*".into()])?;
        let bundle = Bundle::from_orders(base, r.bundle.level_orders())?;
        Ok(Restricted { bundle, maps: r.maps })
    }

    /// The maximal subtruss whose level `n-k+1` fibers are single frame endpoints.
    pub fn side(&self, k: usize, plus: bool) -> Result<Restricted, TrussError> {
        let n = self.n();
        if k == 0 || k > n {
            return Err(TrussError::LevelOutOfRange(k));
        }
        let j = n - k + 1;
        self.restrict_by(|i, y| {
            if i < j {
                return true;
            }
            let yj = self.project(i, y, j);
            let (a, p) = self.owner(j, yj);
            let len = self.fiber(j, a).len();
            if plus {
                p == len - 1
            } else {
                p == 0
            }
        })
    }

    /// Domain (`plus = false`) or codomain of a truss, one level less.
    pub fn boundary_dir(&self, plus: bool) -> Result<Restricted, TrussError> {
        let n = self.n();
        let s = self.side(n, plus)?;
        let bundle = s.bundle.truncate_above(1)?;
        let mut maps = vec![vec![0]];
        maps.extend(s.maps[2..].iter().cloned());
        Ok(Restricted { bundle, maps })
    }

    /// Glue `b` after `a` along direction `k` (level `n-k+1`).
    pub fn glue(a: &Bundle, b: &Bundle, k: usize) -> Result<Glued, TrussError> {
        let n = a.n();
        if b.n() != n || k == 0 || k > n {
            return Err(TrussError::LevelOutOfRange(k));
        }
        let j = n - k + 1;
        if a.base != b.base || a.level_orders()[..j - 1] != b.level_orders()[..j - 1] {
            return Err(TrussError::SidesMismatch);
        }
        if a.side(k, true)?.bundle != b.side(k, false)?.bundle {
            return Err(TrussError::SidesMismatch);
        }
        let mut map_a: Vec<Vec<usize>> = (0..j).map(|i| (0..a.total(i).len()).collect()).collect();
        let mut map_b = map_a.clone();
        let mut levels = a.level_orders()[..j - 1].to_vec();
        for i in j..=n {
            let gprev = if i == 1 {
                a.base.len()
            } else {
                levels[i - 2].0.iter().map(|f: &Fiber| f.len()).sum()
            };
            // preimages of each glued element below
            let mut pre_a = vec![None; gprev];
            let mut pre_b = vec![None; gprev];
            for (x, &g) in map_a[i - 1].iter().enumerate() {
                pre_a[g] = Some(x);
            }
            for (x, &g) in map_b[i - 1].iter().enumerate() {
                pre_b[g] = Some(x);
            }
            let mut fibers = Vec::with_capacity(gprev);
            let mut ma = vec![0; a.total(i).len()];
            let mut mb = vec![0; b.total(i).len()];
            let mut off = 0;
            for g in 0..gprev {
                let f = if i == j {
                    let (xa, xb) = (pre_a[g].unwrap(), pre_b[g].unwrap());
                    let (fa, fb) = (a.fiber(i, xa), b.fiber(i, xb));
                    for p in 0..fa.len() {
                        ma[a.element(i, xa, p)] = off + p;
                    }
                    for p in 0..fb.len() {
                        mb[b.element(i, xb, p)] = off + fa.len() - 1 + p;
                    }
                    fa.concat_shared(fb)
                } else {
                    let mut f = None;
                    if let Some(xa) = pre_a[g] {
                        let fa = a.fiber(i, xa);
                        for p in 0..fa.len() {
                            ma[a.element(i, xa, p)] = off + p;
                        }
                        f = Some(fa.clone());
                    }
                    if let Some(xb) = pre_b[g] {
                        let fb = b.fiber(i, xb);
                        if let Some(fa) = &f {
                            if fa != fb {
                                return Err(TrussError::SidesMismatch);
                            }
                        }
                        for p in 0..fb.len() {
                            mb[b.element(i, xb, p)] = off + p;
                        }
                        f = Some(fb.clone());
                    }
                    f.expect("glued element has a preimage")
                };
                off += f.len();
                fibers.push(f);
            }
            let mut edges = Vec::new();
            for &(x, y) in a.total(i).covers() {
                edges.push((ma[x], ma[y]));
            }
            for &(x, y) in b.total(i).covers() {
                edges.push((mb[x], mb[y]));
            }
            levels.push((fibers, edges));
            map_a.push(ma);
            map_b.push(mb);
        }
        let bundle = Bundle::from_orders(a.base.clone(), levels)?;
        Ok(Glued {
            bundle,
            map_a,
            map_b,
        })
    }

    /// Cubical compactification of an open bundle.
    pub fn compactify(&self) -> Result<Compactified, TrussError> {
        if !self.is_open() {
            return Err(TrussError::NotOpen);
        }
        let mut cr: Vec<Vec<usize>> = vec![(0..self.base.len()).collect()];
        let mut incl: Vec<Vec<usize>> = vec![(0..self.base.len()).collect()];
        let mut levels: Vec<LevelOrder> = Vec::new();
        let mut prev_total = self.base.clone();
        for i in 1..=self.n() {
            let crp = &cr[i - 1];
            let fibers: Vec<Fiber> = crp.iter().map(|&a| self.fiber(i, a).compactified()).collect();
            let offsets = offsets_of(&fibers);
            let mut cri = Vec::new();
            for (c, f) in fibers.iter().enumerate() {
                let old = self.fiber(i, crp[c]);
                for q in 0..f.len() {
                    let p = q.saturating_sub(1).min(old.len() - 1);
                    cri.push(self.element(i, crp[c], p));
                }
            }
            let mut edges = Vec::new();
            for &(c, d) in prev_total.covers() {
                let (a, b) = (crp[c], crp[d]);
                let r = if a == b {
                    Rel::identity(self.fiber(i, a))
                } else {
                    self.rel(i, a, b)
                };
                let rc = r.compactified(self.fiber(i, a), self.fiber(i, b));
                for (t, s) in rc.pairs() {
                    edges.push((offsets[c] + t, offsets[d] + s));
                }
            }
            // inclusion of old elements
            let mut inc = vec![0; self.total(i).len()];
            for (c, &old_a) in incl[i - 1].iter().enumerate() {
                let g = old_a;
                for p in 0..self.fiber(i, c).len() {
                    inc[self.element(i, c, p)] = offsets[g] + p + 1;
                }
            }
            levels.push((fibers, edges));
            let partial = Bundle::from_orders(self.base.clone(), levels.clone())?;
            prev_total = partial.top().clone();
            cr.push(cri);
            incl.push(inc);
        }
        let bundle = Bundle::from_orders(self.base.clone(), levels)?;
        Ok(Compactified { bundle, cr, incl })
    }

    /// Drop singular frame endpoints level by level.
    pub fn interior(&self) -> Result<Restricted, TrussError> {
        if !self.is_closed() {
            return Err(TrussError::NotClosed);
        }
        let n = self.n();
        let mut keep: Vec<Vec<bool>> = vec![vec![true; self.base.len()]];
        for i in 1..=n {
            let k: Vec<bool> = (0..self.total(i).len())
                .map(|x| {
                    let (a, p) = self.owner(i, x);
                    let len = self.fiber(i, a).len();
                    keep[i - 1][a] && p != 0 && p != len - 1
                })
                .collect();
            keep.push(k);
        }
        self.restrict(&keep)
    }

    /// Unique top maximum of cell dimension 0, for open trusses.
    pub fn cone_point(&self) -> Option<usize> {
        if !self.is_open() {
            return None;
        }
        let m = self.top().maximum()?;
        (self.cell_dim(m) == 0).then_some(m)
    }

    /// Split off leading open cube levels: returns `(k, remainder)`.
    pub fn factor_cube(&self) -> (usize, Bundle) {
        let mut k = 0;
        while k < self.n() && self.total(k).len() == 1 && self.fiber(k + 1, 0) == &Fiber::point_open() {
            k += 1;
        }
        (k, self.truncate_above(k).expect("k in range"))
    }

    /// Split off leading corner factors among `R`, `SR`, `RS`; each entry is
    /// -1 for `SR`, +1 for `RS` and 0 for `R`.
    pub fn factor_corner(&self) -> (Vec<i8>, Bundle) {
        let (s, b, _) = self.factor_corner_embedded();
        (s, b)
    }

    /// As `factor_corner`, also returning where each top element of the
    /// remainder sits in `self` (the slice through the corner point).
    pub fn factor_corner_embedded(&self) -> (Vec<i8>, Bundle, Vec<usize>) {
        let mut sigma = Vec::new();
        let mut cur = self.clone();
        let mut emb: Vec<usize> = (0..self.top().len()).collect();
        while cur.n() > 0 && cur.base.len() == 1 {
            let f = cur.fiber(1, 0).to_string();
            let s = match f.as_str() {
                "R" => 0,
                "SR" => -1,
                "RS" => 1,
                _ => break,
            };
            let at = if s == 1 { 1 } else { 0 };
            let rest = cur.truncate_above(1).expect("level 1 exists");
            let slice = match rest.fiber_over_base(at) {
                Ok(r) => r.bundle,
                Err(_) => break,
            };
            let one = Bundle::from_orders(Poset::singleton("*"), vec![(vec![Fiber::parse(&f).unwrap()], vec![])])
                .unwrap();
            if one.product(&slice).structure() != cur.structure() {
                break;
            }
            let m = slice.top().len();
            emb = (0..m).map(|q| emb[at * m + q]).collect();
            sigma.push(s);
            cur = slice;
        }
        (sigma, cur, emb)
    }

    /// Structure ignoring element names: fibers and cover lists per level.
    pub fn structure(&self) -> (usize, Vec<(usize, usize)>, Vec<LevelOrder>) {
        (self.base.len(), self.base.covers().to_vec(), self.level_orders())
    }

    /// A point truss over a singleton base with no levels.
    pub fn point() -> Bundle {
        Bundle::bare(Poset::singleton("*"))
    }

    /// Truss with one level holding `f`.
    pub fn one(f: &str) -> Result<Bundle, TrussError> {
        Bundle::from_orders(Poset::singleton("*"), vec![(vec![Fiber::parse(f)?], vec![])])
    }

    /// Open cube truss with `k` levels.
    pub fn open_cube(k: usize) -> Bundle {
        let mut t = Bundle::point();
        for _ in 0..k {
            t = t.product(&Bundle::one("R").unwrap());
        }
        t
    }

    /// Rename the base, keeping the structure.
    pub fn with_base(&self, base: Poset) -> Result<Bundle, TrussError> {
        Bundle::from_orders(base, self.level_orders())
    }
}

/// A glued bundle with the level maps from both pieces.
#[derive(Clone, Debug)]
pub struct Glued {
    pub bundle: Bundle,
    pub map_a: Vec<Vec<usize>>,
    pub map_b: Vec<Vec<usize>>,
}

/// A compactified bundle with retraction and inclusion maps per level.
#[derive(Clone, Debug)]
pub struct Compactified {
    pub bundle: Bundle,
    /// `cr[i][new] = old`
    pub cr: Vec<Vec<usize>>,
    /// `incl[i][old] = new`
    pub incl: Vec<Vec<usize>>,
}

fn offsets_of(fibers: &[Fiber]) -> Vec<usize> {
    let mut v = Vec::with_capacity(fibers.len());
    let mut o = 0;
    for f in fibers {
        v.push(o);
        o += f.len();
    }
    v
}

fn rel_from(lvl: &Level, a: usize, b: usize) -> Rel {
    let (fa, fb) = (&lvl.fibers[a], &lvl.fibers[b]);
    let (oa, ob) = (lvl.offsets[a], lvl.offsets[b]);
    let mut r = Rel::empty(fa.len(), fb.len());
    for t in 0..fa.len() {
        for s in 0..fb.len() {
            if lvl.total.le(oa + t, ob + s) {
                r.set(t, s);
            }
        }
    }
    r
}

fn validate_level(prev: &Poset, lvl: &Level) -> Result<(), TrussError> {
    let t = &lvl.total;
    for &(x, y) in t.covers() {
        let (a, b) = (lvl.owner[x].0, lvl.owner[y].0);
        if !prev.le(a, b) {
            return Err(TrussError::NotFibered(t.name(x).into(), t.name(y).into()));
        }
    }
    for (a, f) in lvl.fibers.iter().enumerate() {
        if rel_from(lvl, a, a) != Rel::identity(f) {
            return Err(TrussError::FiberOrder(prev.name(a).into()));
        }
    }
    let mut cache: BTreeMap<(usize, usize), Rel> = BTreeMap::new();
    for a in 0..prev.len() {
        for b in prev.up_set(a).ones() {
            if b != a {
                cache.insert((a, b), rel_from(lvl, a, b));
            }
        }
    }
    for (&(a, b), r) in &cache {
        check_bordism(&lvl.fibers[a], &lvl.fibers[b], r).map_err(|reason| TrussError::BadBordism {
            key: format!("{}|{}", prev.name(a), prev.name(b)),
            reason,
        })?;
    }
    for &(a, c) in prev.covers() {
        let rac = &cache[&(a, c)];
        for b in prev.up_set(c).ones() {
            if b == c {
                continue;
            }
            if rac.compose(&cache[&(c, b)]) != cache[&(a, b)] {
                return Err(TrussError::PathDependence {
                    from: prev.name(a).into(),
                    to: prev.name(b).into(),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fiber_parse() {
        assert!(Fiber::parse("RSR").is_ok());
        assert!(matches!(Fiber::parse("RRS"), Err(TrussError::NotAlternating(_))));
        assert!(matches!(Fiber::parse(""), Err(TrussError::EmptyFiber)));
        assert_eq!(Fiber::parse("SRS").unwrap().dual().to_string(), "RSR");
    }

    #[test]
    fn merge_bordism_valid() {
        let a = Fiber::parse("RSRSR").unwrap();
        let b = Fiber::parse("RSR").unwrap();
        let r = Rel::from_pairs(5, 3, &[(1, 1), (3, 1), (0, 0), (4, 2)]).closed(&a, &b);
        assert_eq!(check_bordism(&a, &b, &r), Ok(()));
        let bad = Rel::from_pairs(5, 3, &[(1, 1), (3, 1), (4, 0), (0, 2)]).closed(&a, &b);
        assert!(check_bordism(&a, &b, &bad).is_err());
    }

    #[test]
    fn one_level_total() {
        let t = Bundle::one("RSR").unwrap();
        assert_eq!(t.top().len(), 3);
        assert_eq!(t.top().covers(), &[(0, 1), (2, 1)]);
        assert_eq!(t.cell_dim(1), 0);
        assert_eq!(t.cell_dim(0), 1);
        assert_eq!(t.total(0).len(), 1);
    }

    #[test]
    fn product_and_cube() {
        let c = Bundle::open_cube(2);
        assert_eq!(c.n(), 2);
        assert_eq!(c.cell_dim(0), 2);
        let p = Bundle::one("RSR").unwrap().product(&Bundle::one("R").unwrap());
        assert!(p.fibers(2).iter().all(|f| f.to_string() == "R"));
        let (k, rest) = Bundle::open_cube(3).factor_cube();
        assert_eq!(k, 3);
        assert_eq!(rest.n(), 0);
    }

    #[test]
    fn neighborhoods_of_rsr() {
        let t = Bundle::one("RSR").unwrap();
        assert_eq!(t.neighborhood(1).unwrap().bundle, t);
        assert_eq!(t.neighborhood(0).unwrap().bundle.fiber(1, 0).to_string(), "R");
        assert_eq!(t.closure_up(0).unwrap().bundle.fiber(1, 0).to_string(), "RS");
    }

    #[test]
    fn compactify_round_trip() {
        let t = Bundle::one("RSR").unwrap();
        let c = t.compactify().unwrap();
        assert_eq!(c.bundle.fiber(1, 0).to_string(), "SRSRS");
        assert_eq!(c.cr[1], vec![0, 0, 1, 2, 2]);
        assert_eq!(c.bundle.interior().unwrap().bundle, t);
    }

    #[test]
    fn side_of_rsr() {
        let t = Bundle::one("RSR").unwrap();
        let s = t.side(1, false).unwrap();
        assert_eq!(s.bundle.fiber(1, 0).to_string(), "R");
        assert_eq!(s.maps[1], vec![0]);
    }

    #[test]
    fn glue_identities() {
        let id1 = Bundle::one("R").unwrap().product(&Bundle::one("RSR").unwrap());
        let id2 = Bundle::glue(&id1, &id1, 1).unwrap();
        assert_eq!(id2.bundle.fiber(2, 0).to_string(), "RSRSR");
    }
}
