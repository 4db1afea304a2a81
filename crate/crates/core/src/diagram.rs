//! Manifold diagrams, cell diagrams and canonical links.

use crate::poset::Poset;
use crate::strat::{normalize, Coarsening, StratTruss};
use crate::truss::Bundle;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("not a manifold diagram")]
    NotADiagram,
    #[error("not a cell diagram")]
    NotACellDiagram,
    #[error("facetality and dual conicality disagree")]
    InternalDisagreement,
    #[error("unknown stratum {0}")]
    UnknownStratum(usize),
}

/// Per-element verdicts of a diagram check.
#[derive(Clone, Debug, Serialize)]
pub struct DiagramReport {
    pub verdict: bool,
    /// `(element name, k)` for every element checked successfully
    pub elements: Vec<(String, usize)>,
    /// first failing element (if any) and the reason
    pub failure: Option<(Option<String>, String)>,
}

impl DiagramReport {
    fn fail(elements: Vec<(String, usize)>, at: Option<String>, why: String) -> DiagramReport {
        DiagramReport {
            verdict: false,
            elements,
            failure: Some((at, why)),
        }
    }
}

/// Cone data at an element: cube or corner exponent and the remainder.
#[derive(Clone, Debug)]
pub struct ConeData {
    pub k: usize,
    pub sigma: Vec<i8>,
    pub cone: StratTruss,
}

fn remainder(nf: &StratTruss, rest: Bundle) -> StratTruss {
    StratTruss::new(rest, nf.label_poset().clone(), nf.labeling().to_vec())
        .expect("leading factors do not change the top poset")
}

fn own_stratum(st: &StratTruss, x: usize) -> bool {
    st.stratum_members(st.stratum_of(x)).len() == 1
}

/// Normalized neighborhood at `x` split as cube times cone.
pub fn check_conical_at(st: &StratTruss, x: usize) -> Result<ConeData, String> {
    let (nb, _) = st.neighborhood(x).map_err(|e| e.to_string())?;
    let (nf, _) = normalize(&nb);
    let (k, rest) = nf.bundle().factor_cube();
    let cone = remainder(&nf, rest);
    let top = cone
        .bundle()
        .cone_point()
        .ok_or_else(|| "remainder is not a cone truss".to_string())?;
    if !own_stratum(&cone, top) {
        return Err("cone point is not its own stratum".into());
    }
    Ok(ConeData {
        k,
        sigma: Vec::new(),
        cone,
    })
}

/// Compact variant with leading corner factors.
pub fn check_compact_conical_at(st: &StratTruss, x: usize) -> Result<ConeData, String> {
    let (nb, _) = st.neighborhood(x).map_err(|e| e.to_string())?;
    let (nf, _) = normalize(&nb);
    let (sigma, rest, emb) = nf.bundle().factor_corner_embedded();
    let labels = emb.iter().map(|&y| nf.labeling()[y]).collect();
    let cone = StratTruss::new(rest, nf.label_poset().clone(), labels).map_err(|e| e.to_string())?;
    let top = cone
        .bundle()
        .cone_point()
        .ok_or_else(|| "remainder is not a cone truss".to_string())?;
    if !own_stratum(&cone, top) {
        return Err("cone point is not its own stratum".into());
    }
    Ok(ConeData {
        k: sigma.len(),
        sigma,
        cone,
    })
}

/// Normal form of a closed truss with cells collapsed rather than
/// subdivisions removed: the dual of the normal form of the dual.
pub fn normalize_cells(st: &StratTruss) -> StratTruss {
    normalize(&st.dual()).0.dual()
}

/// Normalized up-closure at `x` split as closed points times a facet.
pub fn check_facetal_at(st: &StratTruss, x: usize) -> Result<ConeData, String> {
    let (cl, _) = st.closure_up(x).map_err(|e| e.to_string())?;
    let nf = normalize_cells(&cl);
    let b = nf.bundle();
    let mut k = 0;
    while k < b.n() && b.total(k).len() == 1 && b.fiber(k + 1, 0).to_string() == "S" {
        k += 1;
    }
    let rest = b.truncate_above(k).expect("k in range");
    let facet = remainder(&nf, rest);
    let fb = facet.bundle();
    if !fb.is_closed() {
        return Err("remainder is not closed".into());
    }
    let bot = fb
        .top()
        .minimum()
        .ok_or_else(|| "remainder has no minimum".to_string())?;
    if fb.cell_dim(bot) != fb.n() as i64 {
        return Err("minimum is not top-dimensional".into());
    }
    if !own_stratum(&facet, bot) {
        return Err("minimum is not its own stratum".into());
    }
    Ok(ConeData {
        k,
        sigma: Vec::new(),
        cone: facet,
    })
}

fn normal_form_check(st: &StratTruss) -> Result<(), (Coarsening, String)> {
    let (_, w) = normalize(st);
    if w.is_identity() {
        Ok(())
    } else {
        let t = w.target.bundle().top().len();
        Err((w, format!("not normalized: coarsens to {t} elements")))
    }
}

fn cell_normal_form_check(st: &StratTruss) -> Result<(), (Coarsening, String)> {
    normal_form_check(&st.dual()).map_err(|(w, _)| {
        let t = w.target.bundle().top().len();
        (w, format!("not normalized: collapses to {t} elements"))
    })
}

fn run_checks(
    st: &StratTruss,
    normal: impl Fn(&StratTruss) -> Result<(), (Coarsening, String)>,
    check: impl Fn(&StratTruss, usize) -> Result<ConeData, String>,
) -> DiagramReport {
    if let Err((_, why)) = normal(st) {
        return DiagramReport::fail(Vec::new(), None, why);
    }
    let top = st.bundle().top();
    let mut elements = Vec::new();
    for x in 0..top.len() {
        match check(st, x) {
            Ok(c) => elements.push((top.name(x).to_string(), c.k)),
            Err(why) => return DiagramReport::fail(elements, Some(top.name(x).to_string()), why),
        }
    }
    DiagramReport {
        verdict: true,
        elements,
        failure: None,
    }
}

pub fn is_manifold_diagram(st: &StratTruss) -> DiagramReport {
    if !st.bundle().is_open() {
        return DiagramReport::fail(Vec::new(), None, "not open".into());
    }
    run_checks(st, normal_form_check, check_conical_at)
}

pub fn is_compact_manifold_diagram(st: &StratTruss) -> DiagramReport {
    if !st.bundle().is_closed() {
        return DiagramReport::fail(Vec::new(), None, "not closed".into());
    }
    run_checks(st, normal_form_check, check_compact_conical_at)
}

/// Facetality checked directly.
pub fn is_cell_diagram_direct(st: &StratTruss) -> DiagramReport {
    if !st.bundle().is_closed() {
        return DiagramReport::fail(Vec::new(), None, "not closed".into());
    }
    run_checks(st, cell_normal_form_check, check_facetal_at)
}

/// Facetality, cross-checked against conicality of the dual.
pub fn is_cell_diagram(st: &StratTruss) -> Result<DiagramReport, DiagramError> {
    let direct = is_cell_diagram_direct(st);
    let dual = is_manifold_diagram(&st.dual());
    if direct.verdict != dual.verdict {
        return Err(DiagramError::InternalDisagreement);
    }
    Ok(direct)
}

/// A labeled poset: the boundary part of a compactified cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledPoset {
    pub poset: Poset,
    pub labels: Vec<String>,
}

/// Boundary of the compactified cone at any element of stratum `s`.
pub fn canonical_link(st: &StratTruss, s: usize) -> Result<LabeledPoset, DiagramError> {
    if s >= st.num_strata() {
        return Err(DiagramError::UnknownStratum(s));
    }
    if !is_manifold_diagram(st).verdict {
        return Err(DiagramError::NotADiagram);
    }
    let mut link: Option<LabeledPoset> = None;
    for x in st.stratum_members(s) {
        let c = check_conical_at(st, x).map_err(|_| DiagramError::NotADiagram)?;
        let l = link_of_cone(&c.cone);
        match &link {
            None => link = Some(l),
            Some(prev) => assert_eq!(prev, &l, "link depends on the chosen point"),
        }
    }
    Ok(link.expect("strata are non-empty"))
}

fn link_of_cone(cone: &StratTruss) -> LabeledPoset {
    let (cst, c) = cone.compactify().expect("cones are open");
    let n = cone.bundle().n();
    let top = cst.bundle().top();
    let mut inside = vec![false; top.len()];
    for &y in &c.incl[n] {
        inside[y] = true;
    }
    let bd: Vec<usize> = (0..top.len()).filter(|&y| !inside[y]).collect();
    LabeledPoset {
        poset: top.induced(&bd),
        labels: bd.iter().map(|&y| cst.label_name(y).to_string()).collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellEntry {
    pub element: String,
    pub dim: i64,
    pub degenerate: bool,
}

/// Cells of a cell diagram with their dimensions and degeneracy.
pub fn cells_report(st: &StratTruss) -> Result<Vec<CellEntry>, DiagramError> {
    if !is_cell_diagram(st)?.verdict {
        return Err(DiagramError::NotACellDiagram);
    }
    let b = st.bundle();
    Ok((0..b.top().len())
        .map(|x| CellEntry {
            element: b.top().name(x).to_string(),
            dim: b.cell_dim(x),
            degenerate: !own_stratum(st, x),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apb() -> StratTruss {
        let lp = Poset::build(&["a", "p", "b"], &[("a", "p"), ("b", "p")]).unwrap();
        StratTruss::new(Bundle::one("RSR").unwrap(), lp, vec![0, 1, 2]).unwrap()
    }

    #[test]
    fn rsr_conical() {
        let st = apb();
        let c = check_conical_at(&st, 1).unwrap();
        assert_eq!(c.k, 0);
        assert_eq!(c.cone.bundle().top().len(), 3);
        assert_eq!(check_conical_at(&st, 0).unwrap().k, 1);
        assert!(is_manifold_diagram(&st).verdict);
    }

    #[test]
    fn rsr_dual_is_cell_diagram() {
        assert!(is_cell_diagram(&apb().dual()).unwrap().verdict);
    }

    #[test]
    fn rsr_link_is_two_points() {
        let st = apb();
        let l = canonical_link(&st, st.stratum_of(1)).unwrap();
        assert_eq!(l.poset.len(), 2);
        assert_eq!(l.labels, vec!["a", "b"]);
        assert!(canonical_link(&st, st.stratum_of(0)).unwrap().poset.is_empty());
    }

    #[test]
    fn uniform_cell_collapses() {
        let lp = Poset::build(&["a"], &[]).unwrap();
        let st = StratTruss::new(Bundle::one("SRS").unwrap(), lp, vec![0, 0, 0]).unwrap();
        assert_eq!(normalize_cells(&st).bundle().top().len(), 1);
        assert!(cell_normal_form_check(&normalize_cells(&st)).is_ok());
    }

    #[test]
    fn srs_compact() {
        let lp = Poset::build(&["l", "m", "r"], &[("m", "l"), ("m", "r")]).unwrap();
        let st = StratTruss::new(Bundle::one("SRS").unwrap(), lp, vec![0, 1, 2]).unwrap();
        assert!(is_compact_manifold_diagram(&st).verdict);
    }
}
