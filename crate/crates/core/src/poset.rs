//! Finite posets stored as transitive reductions with cached up/down sets,
//! plus order complexes and low-dimensional sphere/disk recognition.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("cycle detected through element `{0}`")]
    CycleDetected(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("map is not monotone: {0} <= {1} but images are not ordered")]
    NotMonotone(String, String),
    #[error("map assignment has wrong length or range")]
    BadAssignment,
}

/// Three-valued answer used by the recognition routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    /// Conjunction: any `No` wins, then any `Unknown`.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
            (Verdict::Unknown, _) | (_, Verdict::Unknown) => Verdict::Unknown,
            _ => Verdict::Yes,
        }
    }

    pub fn is_yes(self) -> bool {
        self == Verdict::Yes
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureMode {
    Down,
    Up,
    StrictDown,
    StrictUp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    up: Vec<FixedBitSet>,
    down: Vec<FixedBitSet>,
    covers: Vec<(usize, usize)>,
}

impl Poset {
    /// Build from named elements and cover pairs `(x, y)` meaning `x <= y`.
    pub fn build<S: AsRef<str>>(elements: &[S], covers: &[(S, S)]) -> Result<Poset, PosetError> {
        let names: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(PosetError::DuplicateElement(n.clone()));
            }
        }
        let mut edges = Vec::with_capacity(covers.len());
        for (a, b) in covers {
            let ia = *index
                .get(a.as_ref())
                .ok_or_else(|| PosetError::UnknownElement(a.as_ref().to_string()))?;
            let ib = *index
                .get(b.as_ref())
                .ok_or_else(|| PosetError::UnknownElement(b.as_ref().to_string()))?;
            edges.push((ia, ib));
        }
        Poset::from_edges(names, &edges)
    }

    /// Build from element names and arbitrary generating edges (closure taken).
    pub fn from_edges(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Poset, PosetError> {
        let n = names.len();
        let mut index = BTreeMap::new();
        for (i, nm) in names.iter().enumerate() {
            if index.insert(nm.clone(), i).is_some() {
                return Err(PosetError::DuplicateElement(nm.clone()));
            }
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for &(a, b) in edges {
            if a == b {
                continue;
            }
            out[a].push(b);
        }
        for o in out.iter_mut() {
            o.sort_unstable();
            o.dedup();
        }
        for o in &out {
            for &b in o {
                indeg[b] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(x) = queue.pop_front() {
            topo.push(x);
            for &y in &out[x] {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    queue.push_back(y);
                }
            }
        }
        if topo.len() < n {
            let bad = (0..n).find(|&i| indeg[i] > 0).unwrap();
            return Err(PosetError::CycleDetected(names[bad].clone()));
        }
        let mut up = vec![FixedBitSet::with_capacity(n); n];
        for &x in topo.iter().rev() {
            let mut s = FixedBitSet::with_capacity(n);
            s.insert(x);
            for &y in &out[x] {
                s.union_with(&up[y]);
            }
            up[x] = s;
        }
        let mut down = vec![FixedBitSet::with_capacity(n); n];
        for x in 0..n {
            for y in up[x].ones() {
                down[y].insert(x);
            }
        }
        let mut covers = Vec::new();
        for x in 0..n {
            for &y in &out[x] {
                let implied = out[x].iter().any(|&z| z != y && up[z].contains(y));
                if !implied {
                    covers.push((x, y));
                }
            }
        }
        covers.sort_unstable();
        Ok(Poset {
            names,
            index,
            up,
            down,
            covers,
        })
    }

    /// Poset on `0..n` named by decimal indices.
    pub fn anonymous(n: usize, edges: &[(usize, usize)]) -> Result<Poset, PosetError> {
        Poset::from_edges((0..n).map(|i| i.to_string()).collect(), edges)
    }

    pub fn singleton(name: &str) -> Poset {
        Poset::from_edges(vec![name.to_string()], &[]).unwrap()
    }

    pub fn chain(names: &[&str]) -> Poset {
        let edges: Vec<_> = (1..names.len()).map(|i| (i - 1, i)).collect();
        Poset::from_edges(names.iter().map(|s| s.to_string()).collect(), &edges).unwrap()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, PosetError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| PosetError::UnknownElement(name.to_string()))
    }

    pub fn le(&self, x: usize, y: usize) -> bool {
        self.up[x].contains(y)
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.le(x, y)
    }

    pub fn comparable(&self, x: usize, y: usize) -> bool {
        self.le(x, y) || self.le(y, x)
    }

    pub fn up_set(&self, x: usize) -> &FixedBitSet {
        &self.up[x]
    }

    pub fn down_set(&self, x: usize) -> &FixedBitSet {
        &self.down[x]
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn is_cover(&self, x: usize, y: usize) -> bool {
        self.covers.binary_search(&(x, y)).is_ok()
    }

    pub fn upper_covers(&self, x: usize) -> Vec<usize> {
        self.covers.iter().filter(|c| c.0 == x).map(|c| c.1).collect()
    }

    pub fn lower_covers(&self, y: usize) -> Vec<usize> {
        self.covers.iter().filter(|c| c.1 == y).map(|c| c.0).collect()
    }

    pub fn maxima(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.up[x].count_ones(..) == 1).collect()
    }

    pub fn minima(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.down[x].count_ones(..) == 1).collect()
    }

    pub fn maximum(&self) -> Option<usize> {
        let m = self.maxima();
        if m.len() == 1 && self.down[m[0]].count_ones(..) == self.len() {
            Some(m[0])
        } else {
            None
        }
    }

    pub fn minimum(&self) -> Option<usize> {
        let m = self.minima();
        if m.len() == 1 && self.up[m[0]].count_ones(..) == self.len() {
            Some(m[0])
        } else {
            None
        }
    }

    /// Elements of the requested closure of `x`, ascending.
    pub fn closure_set(&self, x: usize, mode: ClosureMode) -> Vec<usize> {
        let mut v: Vec<usize> = match mode {
            ClosureMode::Down | ClosureMode::StrictDown => self.down[x].ones().collect(),
            ClosureMode::Up | ClosureMode::StrictUp => self.up[x].ones().collect(),
        };
        if matches!(mode, ClosureMode::StrictDown | ClosureMode::StrictUp) {
            v.retain(|&y| y != x);
        }
        v
    }

    pub fn closure(&self, x: usize, mode: ClosureMode) -> Poset {
        self.induced(&self.closure_set(x, mode))
    }

    /// Induced subposet on `subset` (in the given order), names kept.
    pub fn induced(&self, subset: &[usize]) -> Poset {
        let pos: BTreeMap<usize, usize> = subset.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut edges = Vec::new();
        for (i, &x) in subset.iter().enumerate() {
            for y in self.up[x].ones() {
                if let Some(&j) = pos.get(&y) {
                    if j != i {
                        edges.push((i, j));
                    }
                }
            }
        }
        let names = subset.iter().map(|&x| self.names[x].clone()).collect();
        Poset::from_edges(names, &edges).expect("induced subposet of a poset")
    }

    pub fn opposite(&self) -> Poset {
        Poset {
            names: self.names.clone(),
            index: self.index.clone(),
            up: self.down.clone(),
            down: self.up.clone(),
            covers: {
                let mut c: Vec<_> = self.covers.iter().map(|&(a, b)| (b, a)).collect();
                c.sort_unstable();
                c
            },
        }
    }

    /// Cartesian product, element `(p, q)` at index `p * other.len() + q`.
    pub fn product(&self, other: &Poset) -> Poset {
        let m = other.len();
        let mut names = Vec::with_capacity(self.len() * m);
        for a in &self.names {
            for b in &other.names {
                names.push(format!("({a},{b})"));
            }
        }
        let mut edges = Vec::new();
        for &(a, b) in &self.covers {
            for q in 0..m {
                edges.push((a * m + q, b * m + q));
            }
        }
        for &(a, b) in &other.covers {
            for p in 0..self.len() {
                edges.push((p * m + a, p * m + b));
            }
        }
        Poset::from_edges(names, &edges).unwrap()
    }

    /// Same order, relabeled elements.
    pub fn renamed(&self, names: Vec<String>) -> Result<Poset, PosetError> {
        Poset::from_edges(names, &self.covers)
    }

    /// Full set of strict relations `x < y`.
    pub fn relations(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for x in 0..self.len() {
            for y in self.up[x].ones() {
                if y != x {
                    v.push((x, y));
                }
            }
        }
        v
    }

    /// Connected components of the comparability graph restricted to `subset`.
    pub fn components(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let inset: BTreeSet<usize> = subset.iter().copied().collect();
        let mut seen = BTreeSet::new();
        let mut comps = Vec::new();
        for &s in subset {
            if seen.contains(&s) {
                continue;
            }
            let mut comp = vec![s];
            seen.insert(s);
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for y in self.up[x].ones().chain(self.down[x].ones()) {
                    if inset.contains(&y) && seen.insert(y) {
                        comp.push(y);
                        stack.push(y);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        let all: Vec<usize> = (0..self.len()).collect();
        self.components(&all).len() == 1
    }

    /// True if `map` is monotone from `self` into `target`.
    pub fn check_monotone(&self, map: &[usize], target: &Poset) -> Result<(), PosetError> {
        if map.len() != self.len() || map.iter().any(|&y| y >= target.len()) {
            return Err(PosetError::BadAssignment);
        }
        for &(a, b) in &self.covers {
            if !target.le(map[a], map[b]) {
                return Err(PosetError::NotMonotone(self.names[a].clone(), self.names[b].clone()));
            }
        }
        Ok(())
    }

    pub fn order_complex(&self) -> OrderComplex {
        let mut simplices: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut chain = Vec::new();
        for x in 0..self.len() {
            chain.push(x);
            self.extend_chains(&mut chain, &mut simplices);
            chain.pop();
        }
        for layer in simplices.iter_mut() {
            layer.sort();
        }
        OrderComplex { simplices }
    }

    fn extend_chains(&self, chain: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        let d = chain.len() - 1;
        if out.len() <= d {
            out.push(Vec::new());
        }
        out[d].push(chain.clone());
        let last = *chain.last().unwrap();
        for y in self.up[last].ones() {
            if y != last {
                chain.push(y);
                self.extend_chains(chain, out);
                chain.pop();
            }
        }
    }

    /// Number of chains of each cardinality `1..`, without materializing them.
    pub fn chain_counts(&self) -> Vec<u64> {
        let n = self.len();
        // f[x][k] = chains of k+1 elements starting at x
        let order = self.linear_extension();
        let mut f: Vec<Vec<u64>> = vec![Vec::new(); n];
        for &x in order.iter().rev() {
            let mut v = vec![1u64];
            for y in self.up[x].ones() {
                if y == x {
                    continue;
                }
                for (k, c) in f[y].iter().enumerate() {
                    if v.len() <= k + 1 {
                        v.push(0);
                    }
                    v[k + 1] += c;
                }
            }
            f[x] = v;
        }
        let mut tot: Vec<u64> = Vec::new();
        for v in &f {
            for (k, c) in v.iter().enumerate() {
                if tot.len() <= k {
                    tot.push(0);
                }
                tot[k] += c;
            }
        }
        tot
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.chain_counts()
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Elements sorted so that `x < y` implies x comes first.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.len()).collect();
        v.sort_by_key(|&x| (self.down[x].count_ones(..), x));
        v
    }

    fn height_at_most(&self, k: usize) -> bool {
        self.chain_counts().len() <= k
    }

    /// Comparability graph: sorted neighbour lists.
    fn comparability(&self) -> Vec<Vec<usize>> {
        (0..self.len())
            .map(|x| {
                let mut v: Vec<usize> =
                    self.up[x].ones().chain(self.down[x].ones()).filter(|&y| y != x).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderComplex {
    /// `simplices[d]` lists the chains with `d + 1` elements, each ascending.
    pub simplices: Vec<Vec<Vec<usize>>>,
}

impl OrderComplex {
    pub fn dimension(&self) -> isize {
        self.simplices.len() as isize - 1
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(d, s)| if d % 2 == 0 { s.len() as i64 } else { -(s.len() as i64) })
            .sum()
    }
}

pub fn euler_characteristic(k: &OrderComplex) -> i64 {
    k.euler_characteristic()
}

/// Result of splitting a labeling into connected strata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CcSplit {
    /// stratum index of each source element
    pub chr: Vec<usize>,
    /// entrance path poset of strata
    pub entr: Poset,
    /// label of each stratum
    pub cons: Vec<usize>,
}

/// Connected component splitting of a monotone labeling `f: P -> L`.
/// Strata are numbered by their least element.
pub fn cc_split(p: &Poset, f: &[usize], l: &Poset) -> Result<CcSplit, PosetError> {
    p.check_monotone(f, l)?;
    let n = p.len();
    let mut chr = vec![usize::MAX; n];
    let mut cons = Vec::new();
    for x in 0..n {
        if chr[x] != usize::MAX {
            continue;
        }
        let id = cons.len();
        cons.push(f[x]);
        chr[x] = id;
        let mut stack = vec![x];
        while let Some(a) = stack.pop() {
            for b in p.up[a].ones().chain(p.down[a].ones()) {
                if chr[b] == usize::MAX && f[b] == f[x] {
                    chr[b] = id;
                    stack.push(b);
                }
            }
        }
    }
    let mut edges = BTreeSet::new();
    for &(a, b) in p.covers() {
        if chr[a] != chr[b] {
            edges.insert((chr[a], chr[b]));
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    let entr = Poset::anonymous(cons.len(), &edges)?;
    Ok(CcSplit { chr, entr, cons })
}

fn graph_is_cycle(adj: &BTreeMap<usize, BTreeSet<usize>>) -> bool {
    if adj.len() < 3 || adj.values().any(|s| s.len() != 2) {
        return false;
    }
    graph_connected(adj)
}

fn graph_is_arc(adj: &BTreeMap<usize, BTreeSet<usize>>) -> bool {
    if adj.len() < 2 {
        return false;
    }
    let ones = adj.values().filter(|s| s.len() == 1).count();
    let twos = adj.values().filter(|s| s.len() == 2).count();
    ones == 2 && ones + twos == adj.len() && graph_connected(adj)
}

fn graph_connected(adj: &BTreeMap<usize, BTreeSet<usize>>) -> bool {
    let Some(&start) = adj.keys().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &y in &adj[&x] {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen.len() == adj.len()
}

/// Triangles of the order complex and edge/vertex incidences, for height <= 3 posets.
struct Surface {
    edges: Vec<(usize, usize)>,
    edge_tris: BTreeMap<(usize, usize), usize>,
    links: Vec<BTreeMap<usize, BTreeSet<usize>>>,
    tris: usize,
}

fn surface_data(p: &Poset) -> Surface {
    let n = p.len();
    let mut edges = Vec::new();
    for x in 0..n {
        for y in p.up[x].ones() {
            if y != x {
                edges.push((x, y));
            }
        }
    }
    let mut edge_tris: BTreeMap<(usize, usize), usize> = edges.iter().map(|&e| (e, 0)).collect();
    let mut links: Vec<BTreeMap<usize, BTreeSet<usize>>> = vec![BTreeMap::new(); n];
    let mut tris = 0;
    for &(a, b) in &edges {
        for c in p.up[b].ones() {
            if c == b {
                continue;
            }
            tris += 1;
            for e in [(a, b), (b, c), (a, c)] {
                *edge_tris.get_mut(&e).unwrap() += 1;
            }
            for (v, u, w) in [(a, b, c), (b, a, c), (c, a, b)] {
                links[v].entry(u).or_default().insert(w);
                links[v].entry(w).or_default().insert(u);
            }
        }
    }
    Surface {
        edges,
        edge_tris,
        links,
        tris,
    }
}

/// Decide whether the order complex of `p` is a `d`-sphere; exact for `d <= 2`.
pub fn recognize_sphere(p: &Poset, d: i64) -> Verdict {
    match d {
        d if d < -1 => Verdict::No,
        -1 => Verdict::from_bool(p.is_empty()),
        0 => Verdict::from_bool(p.len() == 2 && !p.comparable(0, 1)),
        1 => {
            if p.is_empty() || !p.height_at_most(2) {
                return Verdict::No;
            }
            let adj = p.comparability();
            Verdict::from_bool(adj.iter().all(|v| v.len() == 2) && p.is_connected())
        }
        2 => {
            if p.is_empty() || !p.height_at_most(3) || !p.is_connected() {
                return Verdict::No;
            }
            let s = surface_data(p);
            if s.edge_tris.values().any(|&c| c != 2) {
                return Verdict::No;
            }
            if s.links.iter().any(|l| !graph_is_cycle(l)) {
                return Verdict::No;
            }
            let chi = p.len() as i64 - s.edges.len() as i64 + s.tris as i64;
            Verdict::from_bool(chi == 2)
        }
        _ => Verdict::Unknown,
    }
}

/// Decide whether the order complex of `p` is a closed `d`-disk; exact for `d <= 2`.
pub fn recognize_disk(p: &Poset, d: i64) -> Verdict {
    match d {
        d if d < 0 => Verdict::No,
        0 => Verdict::from_bool(p.len() == 1),
        1 => {
            if p.len() < 2 || !p.height_at_most(2) || !p.is_connected() {
                return Verdict::No;
            }
            let adj = p.comparability();
            let ones = adj.iter().filter(|v| v.len() == 1).count();
            let twos = adj.iter().filter(|v| v.len() == 2).count();
            Verdict::from_bool(ones == 2 && ones + twos == p.len())
        }
        2 => {
            if p.is_empty() || !p.height_at_most(3) || !p.is_connected() {
                return Verdict::No;
            }
            let s = surface_data(p);
            if s.edge_tris.values().any(|&c| c != 1 && c != 2) {
                return Verdict::No;
            }
            let mut bd: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
            for (&(a, b), &c) in &s.edge_tris {
                if c == 1 {
                    bd.entry(a).or_default().insert(b);
                    bd.entry(b).or_default().insert(a);
                }
            }
            if !graph_is_cycle(&bd) {
                return Verdict::No;
            }
            for v in 0..p.len() {
                let ok = if bd.contains_key(&v) {
                    graph_is_arc(&s.links[v])
                } else {
                    graph_is_cycle(&s.links[v])
                };
                if !ok {
                    return Verdict::No;
                }
            }
            let chi = p.len() as i64 - s.edges.len() as i64 + s.tris as i64;
            Verdict::from_bool(chi == 1)
        }
        _ => Verdict::Unknown,
    }
}

/// Every strict upper closure must be a sphere of dimension `dim(x) - 1`.
pub fn is_cellular(p: &Poset, dim: &[i64]) -> Verdict {
    let mut v = Verdict::Yes;
    for x in 0..p.len() {
        let up = p.closure(x, ClosureMode::StrictUp);
        v = v.and(recognize_sphere(&up, dim[x] - 1));
        if v == Verdict::No {
            return v;
        }
    }
    v
}
