//! Tangle trusses: a closed subposet `Q` of an open truss with a declared
//! dimension, checked for transversality at every point of `Q`.

use crate::poset::{is_cellular, recognize_sphere, Poset, Verdict};
use crate::strat::{normalize, StratError, StratTruss};
use crate::truss::Bundle;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TangleError {
    #[error("element {0} is not in Q")]
    NotInQ(usize),
    #[error("not a tangle: {0}")]
    NotATangle(String),
    #[error("Q is not up-closed at {0}")]
    NotClosed(String),
    #[error(transparent)]
    Strat(#[from] StratError),
}

/// The label poset `out -> in`.
pub fn indicator_poset() -> Poset {
    Poset::build(&["out", "in"], &[("out", "in")]).unwrap()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TanglePresentation {
    bundle: Bundle,
    q: Vec<bool>,
    m: usize,
}

impl TanglePresentation {
    pub fn new(bundle: Bundle, q: Vec<bool>, m: usize) -> Result<TanglePresentation, TangleError> {
        let top = bundle.top();
        assert_eq!(q.len(), top.len());
        for &(x, y) in top.covers() {
            if q[x] && !q[y] {
                return Err(TangleError::NotClosed(top.name(x).to_string()));
            }
        }
        Ok(TanglePresentation { bundle, q, m })
    }

    pub fn from_elements(bundle: Bundle, q: &[usize], m: usize) -> Result<TanglePresentation, TangleError> {
        let mut v = vec![false; bundle.top().len()];
        for &x in q {
            v[x] = true;
        }
        TanglePresentation::new(bundle, v, m)
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> &[bool] {
        &self.q
    }

    pub fn q_elements(&self) -> Vec<usize> {
        (0..self.q.len()).filter(|&x| self.q[x]).collect()
    }

    /// Stratified truss of the indicator labeling.
    pub fn strat(&self) -> StratTruss {
        let labels = self.q.iter().map(|&b| usize::from(b)).collect();
        StratTruss::new(self.bundle.clone(), indicator_poset(), labels).expect("Q is up-closed")
    }

    pub fn complexity(&self) -> usize {
        self.q.iter().filter(|&&b| b).count()
    }

    pub fn dual_strat(&self) -> StratTruss {
        self.strat().dual()
    }
}

/// Cone data at a point of `Q`.
#[derive(Clone, Debug)]
pub struct Transversal {
    pub k: usize,
    pub cone: TanglePresentation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransversalOutcome {
    Yes(usize),
    No(String),
    Unknown(String),
}

fn indicator_of(st: &StratTruss) -> Vec<bool> {
    (0..st.labeling().len()).map(|x| st.label_name(x) == "in").collect()
}

/// Normalized neighborhood at `x` as open cube times a cone with `Q`-part `D`.
pub fn transversal_data(tp: &TanglePresentation, x: usize, compact: bool) -> Result<(Transversal, Verdict), String> {
    if !tp.q[x] {
        return Err(TangleError::NotInQ(x).to_string());
    }
    let st = tp.strat();
    let (nb, _) = st.neighborhood(x).map_err(|e| e.to_string())?;
    let (nf, _) = normalize(&nb);
    let q = indicator_of(&nf);
    let (k, rest, q) = if compact {
        let (s, r, emb) = nf.bundle().factor_corner_embedded();
        let q = emb.iter().map(|&y| q[y]).collect();
        (s.len(), r, q)
    } else {
        let (k, r) = nf.bundle().factor_cube();
        (k, r, q)
    };
    let top = rest
        .cone_point()
        .ok_or_else(|| "remainder is not an open cone truss".to_string())?;
    if !q[top] {
        return Err("cone point is not in Q".into());
    }
    let d: Vec<usize> = (0..q.len()).filter(|&y| q[y] && y != top).collect();
    let link = rest.top().induced(&d);
    let want = tp.m as i64 - k as i64 - 1;
    let v = recognize_sphere(&link, want);
    let cone = TanglePresentation::new(rest, q, tp.m.saturating_sub(k)).map_err(|e| e.to_string())?;
    Ok((Transversal { k, cone }, v))
}

pub fn check_transversal_at(tp: &TanglePresentation, x: usize) -> TransversalOutcome {
    outcome(transversal_data(tp, x, false), tp.m)
}

fn outcome(r: Result<(Transversal, Verdict), String>, m: usize) -> TransversalOutcome {
    match r {
        Err(why) => TransversalOutcome::No(why),
        Ok((t, Verdict::Yes)) => TransversalOutcome::Yes(t.k),
        Ok((t, Verdict::No)) => TransversalOutcome::No(format!(
            "link of the cone point is not a {}-sphere",
            m as i64 - t.k as i64 - 1
        )),
        Ok((t, Verdict::Unknown)) => TransversalOutcome::Unknown(format!(
            "sphere recognition undecided in dimension {}",
            m as i64 - t.k as i64 - 1
        )),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TangleReport {
    pub verdict: Verdict,
    /// transversal dimension by element name
    pub tdim: BTreeMap<String, usize>,
    pub failure: Option<(Option<String>, String)>,
}

fn report(tp: &TanglePresentation, compact: bool) -> (TangleReport, BTreeMap<usize, usize>) {
    let top = tp.bundle.top();
    let fail = |at: Option<usize>, why: String| {
        (
            TangleReport {
                verdict: Verdict::No,
                tdim: BTreeMap::new(),
                failure: Some((at.map(|x| top.name(x).to_string()), why)),
            },
            BTreeMap::new(),
        )
    };
    let open_ok = if compact { tp.bundle.is_closed() } else { tp.bundle.is_open() };
    if !open_ok {
        return fail(None, if compact { "not closed" } else { "not open" }.into());
    }
    if !normalize(&tp.strat()).1.is_identity() {
        return fail(None, "indicator stratification is not normalized".into());
    }
    let mut verdict = Verdict::Yes;
    let mut tdim = BTreeMap::new();
    let mut failure = None;
    for x in tp.q_elements() {
        match outcome(transversal_data(tp, x, compact), tp.m) {
            TransversalOutcome::Yes(k) => {
                tdim.insert(x, k);
            }
            TransversalOutcome::No(why) => return fail(Some(x), why),
            TransversalOutcome::Unknown(why) => {
                verdict = Verdict::Unknown;
                failure.get_or_insert((Some(top.name(x).to_string()), why));
            }
        }
    }
    let named = tdim.iter().map(|(&x, &k)| (top.name(x).to_string(), k)).collect();
    (
        TangleReport {
            verdict,
            tdim: named,
            failure,
        },
        tdim,
    )
}

pub fn is_tangle(tp: &TanglePresentation) -> TangleReport {
    report(tp, false).0
}

pub fn is_compact_tangle(tp: &TanglePresentation) -> TangleReport {
    report(tp, true).0
}

/// Transversal dimensions indexed by element.
pub fn tdim_map(tp: &TanglePresentation) -> Result<BTreeMap<usize, usize>, TangleError> {
    let (r, m) = report(tp, false);
    if r.verdict != Verdict::Yes {
        return Err(TangleError::NotATangle(
            r.failure.map(|f| f.1).unwrap_or_default(),
        ));
    }
    Ok(m)
}

/// Label poset for transversal stratifications: `out` below every `t<k>`,
/// and `t<k>` below `t<j>` for `k > j`.
pub fn tdim_poset(m: usize) -> Poset {
    let mut names = vec!["out".to_string()];
    names.extend((0..=m).map(|k| format!("t{k}")));
    let mut edges = Vec::new();
    for k in 0..=m {
        edges.push((0, k + 1));
        if k > 0 {
            edges.push((k + 1, k));
        }
    }
    Poset::from_edges(names, &edges).unwrap()
}

/// Refine the indicator stratification by transversal dimension.
pub fn tstr(tp: &TanglePresentation) -> Result<StratTruss, TangleError> {
    let td = tdim_map(tp)?;
    let labels = (0..tp.q.len())
        .map(|x| td.get(&x).map(|&k| k + 1).unwrap_or(0))
        .collect();
    Ok(StratTruss::new(tp.bundle.clone(), tdim_poset(tp.m), labels)?)
}

pub fn is_singularity(tp: &TanglePresentation) -> bool {
    is_tangle(tp).verdict == Verdict::Yes && tp.bundle.cone_point().is_some()
}

/// The cone remainder at `x`, as an `(m-k)`-tangle.
pub fn normal_singularity_at(tp: &TanglePresentation, x: usize) -> Result<TanglePresentation, TangleError> {
    tdim_map(tp)?;
    let (t, _) = transversal_data(tp, x, false).map_err(TangleError::NotATangle)?;
    Ok(t.cone)
}

/// Cellular poset of the compactified tangle.
#[derive(Clone, Debug)]
pub struct CellStructure {
    pub poset: Poset,
    pub dims: Vec<i64>,
    /// element index in the compactified top poset
    pub embedding: Vec<usize>,
    pub cellular: Verdict,
    pub euler: i64,
}

pub fn cell_structure(tp: &TanglePresentation) -> Result<CellStructure, TangleError> {
    tdim_map(tp)?;
    let c = tp.bundle.compactify().map_err(|e| TangleError::NotATangle(e.to_string()))?;
    let n = tp.bundle.n();
    let top = c.bundle.top();
    let emb: Vec<usize> = (0..top.len()).filter(|&y| tp.q[c.cr[n][y]]).collect();
    let poset = top.induced(&emb);
    let dims: Vec<i64> = emb.iter().map(|&y| c.bundle.cell_dim(y)).collect();
    let cellular = is_cellular(&poset, &dims);
    let euler = poset.euler_characteristic();
    Ok(CellStructure {
        poset,
        dims,
        embedding: emb,
        cellular,
        euler,
    })
}

/// Compactified truss with `Q` pulled back along the retraction.
pub fn compactify_tangle(tp: &TanglePresentation) -> Result<TanglePresentation, TangleError> {
    let c = tp.bundle.compactify().map_err(|e| TangleError::NotATangle(e.to_string()))?;
    let n = tp.bundle.n();
    let q = c.cr[n].iter().map(|&y| tp.q[y]).collect();
    TanglePresentation::new(c.bundle, q, tp.m)
}

/// `Q` with reversed order; each strict lower closure must be a sphere of
/// dimension `m - dim(x) - 1`.
pub fn dual_cell_structure(tp: &TanglePresentation) -> Result<CellStructure, TangleError> {
    tdim_map(tp)?;
    let q = tp.q_elements();
    let qp = tp.bundle.top().induced(&q);
    let dims: Vec<i64> = q.iter().map(|&x| tp.m as i64 - tp.bundle.cell_dim(x)).collect();
    let op = qp.opposite();
    let cellular = is_cellular(&op, &dims);
    let euler = op.euler_characteristic();
    Ok(CellStructure {
        poset: op,
        dims,
        embedding: q,
        cellular,
        euler,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_in_a_line() {
        let tp = TanglePresentation::from_elements(Bundle::one("RSR").unwrap(), &[1], 0).unwrap();
        assert_eq!(check_transversal_at(&tp, 1), TransversalOutcome::Yes(0));
        assert!(is_singularity(&tp));
        assert_eq!(tp.complexity(), 1);
    }

    #[test]
    fn q_must_be_up_closed() {
        assert!(TanglePresentation::from_elements(Bundle::one("RSR").unwrap(), &[0], 0).is_err());
    }

    #[test]
    fn tdim_poset_shape() {
        let p = tdim_poset(1);
        assert!(p.le(0, 1) && p.le(0, 2) && p.le(2, 1));
    }
}
