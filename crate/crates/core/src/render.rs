//! SVG drawings of stratified 1- and 2-trusses.

use crate::strat::StratTruss;
use crate::truss::Dim;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("cannot draw {0}-trusses; use --slices")]
    DimensionUnsupported(usize),
}

#[derive(Clone, Debug, Default)]
pub struct RenderOptions {
    /// label names drawn emphasized (e.g. `in` for tangles)
    pub emphasize: Vec<String>,
}

const STEP: f64 = 60.0;
const HEIGHT: f64 = 300.0;
const MARGIN: f64 = 30.0;

/// Fill color from a small fixed hash of the stratum index.
fn color(s: usize) -> String {
    let h = (s as u64).wrapping_mul(2654435761) % 360;
    format!("hsl({h},65%,45%)")
}

fn stroke(st: &StratTruss, x: usize, opts: &RenderOptions) -> (String, f64) {
    let s = st.stratum_of(x);
    let w = if opts.emphasize.iter().any(|l| l == st.label_name(x)) {
        4.0
    } else {
        1.5
    };
    (color(s), w)
}

pub fn render_svg(st: &StratTruss, opts: &RenderOptions) -> Result<String, RenderError> {
    let b = st.bundle();
    let n = b.n();
    let mut body = String::new();
    let (w, h);
    match n {
        0 => {
            w = 2.0 * MARGIN;
            h = 2.0 * MARGIN;
            let (c, _) = stroke(st, 0, opts);
            let _ = writeln!(body, r#"<circle cx="{MARGIN}" cy="{MARGIN}" r="5" fill="{c}"/>"#);
        }
        1 => {
            let f = b.fiber(1, 0);
            w = STEP * (f.len() as f64 + 1.0) + 2.0 * MARGIN;
            h = 2.0 * MARGIN + 20.0;
            let y = MARGIN;
            for p in 0..f.len() {
                let x0 = MARGIN + STEP * p as f64;
                let (c, sw) = stroke(st, p, opts);
                match f.dim(p) {
                    Dim::R => {
                        let _ = writeln!(
                            body,
                            r#"<line x1="{x0}" y1="{y}" x2="{}" y2="{y}" stroke="{c}" stroke-width="{sw}"/>"#,
                            x0 + 2.0 * STEP
                        );
                    }
                    Dim::S => {
                        let _ = writeln!(body, r#"<circle cx="{}" cy="{y}" r="{}" fill="{c}"/>"#, x0 + STEP, 3.0 + sw);
                    }
                }
                let _ = writeln!(
                    body,
                    r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">{}</text>"#,
                    x0 + STEP,
                    y + 18.0,
                    st.label_name(p)
                );
            }
        }
        2 => {
            let base = b.fiber(1, 0);
            let cols = base.len();
            w = STEP * (cols as f64 - 1.0) + 2.0 * MARGIN;
            h = HEIGHT + 2.0 * MARGIN;
            let pos = |a: usize, q: usize| -> (f64, f64) {
                let len = b.fiber(2, a).len() as f64;
                let x = MARGIN + STEP * a as f64;
                let y = MARGIN + HEIGHT - HEIGHT * (q as f64 + 1.0) / (len + 1.0);
                (x, y)
            };
            for a in 0..cols {
                let (x, _) = pos(a, 0);
                if base.dim(a) == Dim::S {
                    let _ = writeln!(
                        body,
                        r##"<line x1="{x}" y1="{MARGIN}" x2="{x}" y2="{}" stroke="#999" stroke-width="1"/>"##,
                        MARGIN + HEIGHT
                    );
                }
            }
            // strands: covers between singular top elements over adjacent columns
            let top = b.top();
            for &(u, v) in top.covers() {
                let (au, pu) = b.owner(2, u);
                let (av, pv) = b.owner(2, v);
                if au == av || b.dim(2, u) != Dim::S || b.dim(2, v) != Dim::S {
                    continue;
                }
                let (x1, y1) = pos(au, pu);
                let (x2, y2) = pos(av, pv);
                let (c, sw) = stroke(st, u, opts);
                let _ = writeln!(
                    body,
                    r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{c}" stroke-width="{sw}"/>"#
                );
            }
            for x in 0..top.len() {
                let (a, q) = b.owner(2, x);
                let (cx, cy) = pos(a, q);
                let (c, sw) = stroke(st, x, opts);
                match b.dim(2, x) {
                    Dim::S => {
                        let _ = writeln!(body, r#"<circle cx="{cx}" cy="{cy}" r="{}" fill="{c}"/>"#, 2.0 + sw);
                    }
                    Dim::R => {
                        let _ = writeln!(
                            body,
                            r#"<rect x="{}" y="{}" width="6" height="6" fill="{c}" fill-opacity="0.35"/>"#,
                            cx - 3.0,
                            cy - 3.0
                        );
                    }
                }
            }
        }
        k => return Err(RenderError::DimensionUnsupported(k)),
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    out.push_str(&body);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Level-by-level text dump, used for trusses of any dimension.
pub fn slices(st: &StratTruss) -> String {
    let b = st.bundle();
    let mut out = String::new();
    for i in 1..=b.n() {
        let _ = writeln!(out, "level {i}:");
        let prev = b.total(i - 1);
        for a in 0..prev.len() {
            let _ = writeln!(out, "  {} : {}", prev.name(a), b.fiber(i, a));
        }
    }
    let top = b.top();
    let _ = writeln!(out, "labels:");
    for x in 0..top.len() {
        let _ = writeln!(out, "  {} -> {}", top.name(x), st.label_name(x));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::Poset;
    use crate::truss::Bundle;

    #[test]
    fn interval_with_point() {
        let lp = Poset::build(&["a", "p", "b"], &[("a", "p"), ("b", "p")]).unwrap();
        let st = StratTruss::new(Bundle::one("RSR").unwrap(), lp, vec![0, 1, 2]).unwrap();
        let svg = render_svg(&st, &RenderOptions::default()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<line").count(), 2);
        assert_eq!(svg, render_svg(&st, &RenderOptions::default()).unwrap());
    }

    #[test]
    fn three_dims_unsupported() {
        let st = StratTruss::constant(Bundle::open_cube(3));
        assert_eq!(
            render_svg(&st, &RenderOptions::default()),
            Err(RenderError::DimensionUnsupported(3))
        );
    }
}
