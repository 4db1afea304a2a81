//! JSON documents: parsing with schema locations, canonical serialization.

use crate::explore::TangleBundle;
use crate::poset::Poset;
use crate::strat::StratTruss;
use crate::tangle::TanglePresentation;
use crate::truss::{Bundle, Fiber, LevelBordisms};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use thiserror::Error;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
}

fn schema(pointer: &str, message: impl Into<String>) -> IoError {
    IoError::Schema {
        pointer: if pointer.is_empty() { "/".into() } else { pointer.into() },
        message: message.into(),
    }
}

fn invalid(e: impl ToString) -> IoError {
    IoError::Validation(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document {
    Poset(Poset),
    Truss(Bundle),
    Strat(StratTruss),
    Tangle(TanglePresentation),
    Bundle(TangleBundle),
    Certificate(TangleBundle),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Poset(_) => "poset",
            Document::Truss(_) => "truss",
            Document::Strat(_) => "strat",
            Document::Tangle(_) => "tangle",
            Document::Bundle(_) => "bundle",
            Document::Certificate(_) => "certificate",
        }
    }
}

fn esc(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

// ---- serialization ----

pub fn poset_value(p: &Poset) -> Value {
    let covers: Vec<Value> = p
        .covers()
        .iter()
        .map(|&(a, b)| json!([p.name(a), p.name(b)]))
        .collect();
    json!({ "elements": p.names(), "covers": covers })
}

fn fiber_key(b: &Bundle, i: usize, x: usize) -> String {
    if i == 0 && b.is_truss() {
        String::new()
    } else {
        b.total(i).name(x).to_string()
    }
}

fn bundle_into(b: &Bundle, obj: &mut Map<String, Value>) {
    if !b.is_truss() {
        obj.insert("base".into(), poset_value(b.base()));
    }
    obj.insert("n".into(), json!(b.n()));
    let mut levels = Vec::new();
    for i in 1..=b.n() {
        let prev = b.total(i - 1);
        let mut fibers = Map::new();
        for x in 0..prev.len() {
            fibers.insert(fiber_key(b, i - 1, x), json!(b.fiber(i, x).to_string()));
        }
        let mut bords = Map::new();
        for &(a, c) in prev.covers() {
            let gens = b.rel(i, a, c).generators(b.fiber(i, a), b.fiber(i, c));
            let pairs: Vec<Value> = gens.iter().map(|&(t, s)| json!([t, s])).collect();
            bords.insert(format!("{}|{}", fiber_key(b, i - 1, a), fiber_key(b, i - 1, c)), Value::Array(pairs));
        }
        levels.push(json!({ "fibers": fibers, "bordisms": bords }));
    }
    obj.insert("levels".into(), Value::Array(levels));
}

fn q_into(b: &Bundle, q: &[bool], m: usize, obj: &mut Map<String, Value>) {
    let top = b.top();
    let names: Vec<&str> = (0..q.len()).filter(|&x| q[x]).map(|x| top.name(x)).collect();
    obj.insert("Q".into(), json!(names));
    obj.insert("m".into(), json!(m));
}

pub fn to_value(doc: &Document) -> Value {
    let mut p = Map::new();
    match doc {
        Document::Poset(x) => {
            if let Value::Object(o) = poset_value(x) {
                p = o;
            }
        }
        Document::Truss(b) => bundle_into(b, &mut p),
        Document::Strat(st) => {
            bundle_into(st.bundle(), &mut p);
            p.insert("label_poset".into(), poset_value(st.label_poset()));
            let top = st.bundle().top();
            let lab: Map<String, Value> = (0..top.len())
                .map(|x| (top.name(x).to_string(), json!(st.label_name(x))))
                .collect();
            p.insert("labeling".into(), Value::Object(lab));
        }
        Document::Tangle(tp) => {
            bundle_into(tp.bundle(), &mut p);
            q_into(tp.bundle(), tp.q(), tp.m(), &mut p);
        }
        Document::Bundle(tb) | Document::Certificate(tb) => {
            bundle_into(tb.bundle(), &mut p);
            q_into(tb.bundle(), tb.q(), tb.m(), &mut p);
        }
    }
    json!({ "format_version": FORMAT_VERSION, "kind": doc.kind(), "payload": p })
}

/// Canonical bytes: sorted keys, two-space indentation, trailing newline.
pub fn serialize(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(doc)).expect("values serialize");
    s.push('\n');
    s
}

// ---- parsing ----

fn get<'a>(o: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value, IoError> {
    o.get(key)
        .ok_or_else(|| schema(at, format!("missing field \"{key}\"")))
}

fn as_obj<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>, IoError> {
    v.as_object().ok_or_else(|| schema(at, "expected an object"))
}

fn as_arr<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| schema(at, "expected an array"))
}

fn as_str<'a>(v: &'a Value, at: &str) -> Result<&'a str, IoError> {
    v.as_str().ok_or_else(|| schema(at, "expected a string"))
}

fn as_usize(v: &Value, at: &str) -> Result<usize, IoError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema(at, "expected a non-negative integer"))
}

pub fn parse_poset(v: &Value, at: &str) -> Result<Poset, IoError> {
    let o = as_obj(v, at)?;
    let el_at = format!("{at}/elements");
    let names: Vec<String> = as_arr(get(o, "elements", at)?, &el_at)?
        .iter()
        .enumerate()
        .map(|(i, e)| as_str(e, &format!("{el_at}/{i}")).map(String::from))
        .collect::<Result<_, _>>()?;
    let cov_at = format!("{at}/covers");
    let mut pairs = Vec::new();
    for (i, c) in as_arr(get(o, "covers", at)?, &cov_at)?.iter().enumerate() {
        let here = format!("{cov_at}/{i}");
        let a = as_arr(c, &here)?;
        if a.len() != 2 {
            return Err(schema(&here, "expected a pair"));
        }
        pairs.push((
            as_str(&a[0], &format!("{here}/0"))?.to_string(),
            as_str(&a[1], &format!("{here}/1"))?.to_string(),
        ));
    }
    Poset::build(&names, &pairs).map_err(invalid)
}

fn parse_bundle(o: &Map<String, Value>, at: &str) -> Result<Bundle, IoError> {
    let (base, truss) = match o.get("base") {
        Some(v) => (parse_poset(v, &format!("{at}/base"))?, false),
        None => (Poset::singleton("*"), true),
    };
    let n = as_usize(get(o, "n", at)?, &format!("{at}/n"))?;
    let lv_at = format!("{at}/levels");
    let levels = as_arr(get(o, "levels", at)?, &lv_at)?;
    if levels.len() != n {
        return Err(schema(&lv_at, format!("expected {n} levels, found {}", levels.len())));
    }
    let mut b = Bundle::bare(base.clone());
    let mut done: Vec<LevelBordisms> = Vec::new();
    for (i, lv) in levels.iter().enumerate() {
        let here = format!("{lv_at}/{i}");
        let lo = as_obj(lv, &here)?;
        let prev = b.total(i).clone();
        let key_of = |x: usize| -> String {
            if i == 0 && truss {
                String::new()
            } else {
                prev.name(x).to_string()
            }
        };
        let fat = format!("{here}/fibers");
        let fo = as_obj(get(lo, "fibers", &here)?, &fat)?;
        let mut fibers = Vec::with_capacity(prev.len());
        for x in 0..prev.len() {
            let k = key_of(x);
            let fa = format!("{fat}/{}", esc(&k));
            let s = as_str(fo.get(&k).ok_or_else(|| schema(&fat, format!("missing fiber \"{k}\"")))?, &fa)?;
            fibers.push(Fiber::parse(s).map_err(|e| IoError::Validation(format!("{fa}: {e}")))?);
        }
        if fo.len() != prev.len() {
            return Err(schema(&fat, "unexpected fiber keys"));
        }
        let keys: BTreeMap<String, usize> = (0..prev.len()).map(|x| (key_of(x), x)).collect();
        let bat = format!("{here}/bordisms");
        let bo = as_obj(get(lo, "bordisms", &here)?, &bat)?;
        let mut bords = BTreeMap::new();
        for (k, v) in bo {
            let ka = format!("{bat}/{}", esc(k));
            let (l, r) = k.split_once('|').ok_or_else(|| schema(&ka, "key must be \"a|b\""))?;
            let a = *keys.get(l).ok_or_else(|| schema(&ka, format!("unknown element \"{l}\"")))?;
            let c = *keys.get(r).ok_or_else(|| schema(&ka, format!("unknown element \"{r}\"")))?;
            let mut pairs = Vec::new();
            for (j, p) in as_arr(v, &ka)?.iter().enumerate() {
                let pa = format!("{ka}/{j}");
                let pr = as_arr(p, &pa)?;
                if pr.len() != 2 {
                    return Err(schema(&pa, "expected a pair"));
                }
                pairs.push((as_usize(&pr[0], &format!("{pa}/0"))?, as_usize(&pr[1], &format!("{pa}/1"))?));
            }
            bords.insert((a, c), pairs);
        }
        done.push((fibers, bords));
        b = Bundle::from_bordisms(base.clone(), done.clone()).map_err(invalid)?;
    }
    Ok(b)
}

fn parse_q(o: &Map<String, Value>, b: &Bundle, at: &str) -> Result<(Vec<bool>, usize), IoError> {
    let top = b.top();
    let qa = format!("{at}/Q");
    let mut q = vec![false; top.len()];
    for (i, e) in as_arr(get(o, "Q", at)?, &qa)?.iter().enumerate() {
        let ea = format!("{qa}/{i}");
        let x = top.index_of(as_str(e, &ea)?).map_err(|e| schema(&ea, e.to_string()))?;
        q[x] = true;
    }
    let m = as_usize(get(o, "m", at)?, &format!("{at}/m"))?;
    Ok((q, m))
}

pub fn from_value(v: &Value) -> Result<Document, IoError> {
    let o = as_obj(v, "")?;
    let ver = as_usize(get(o, "format_version", "")?, "/format_version")?;
    if ver as u64 != FORMAT_VERSION {
        return Err(schema("/format_version", format!("unsupported version {ver}")));
    }
    let kind = as_str(get(o, "kind", "")?, "/kind")?;
    let at = "/payload";
    let p = as_obj(get(o, "payload", "")?, at)?;
    Ok(match kind {
        "poset" => Document::Poset(parse_poset(&Value::Object(p.clone()), at)?),
        "truss" => Document::Truss(parse_bundle(p, at)?),
        "strat" => {
            let b = parse_bundle(p, at)?;
            let lp = parse_poset(get(p, "label_poset", at)?, &format!("{at}/label_poset"))?;
            let la = format!("{at}/labeling");
            let lo = as_obj(get(p, "labeling", at)?, &la)?;
            let top = b.top();
            let mut labels = Vec::with_capacity(top.len());
            for x in 0..top.len() {
                let name = top.name(x);
                let ea = format!("{la}/{}", esc(name));
                let l = as_str(lo.get(name).ok_or_else(|| schema(&la, format!("missing label for \"{name}\"")))?, &ea)?;
                labels.push(lp.index_of(l).map_err(|e| schema(&ea, e.to_string()))?);
            }
            Document::Strat(StratTruss::new(b, lp, labels).map_err(invalid)?)
        }
        "tangle" => {
            let b = parse_bundle(p, at)?;
            let (q, m) = parse_q(p, &b, at)?;
            Document::Tangle(TanglePresentation::new(b, q, m).map_err(invalid)?)
        }
        "bundle" | "certificate" => {
            let b = parse_bundle(p, at)?;
            let (q, m) = parse_q(p, &b, at)?;
            let tb = TangleBundle::new(b, q, m).map_err(invalid)?;
            if kind == "bundle" {
                Document::Bundle(tb)
            } else {
                Document::Certificate(tb)
            }
        }
        other => return Err(schema("/kind", format!("unknown kind \"{other}\""))),
    })
}

pub fn parse(bytes: &str) -> Result<Document, IoError> {
    let v: Value = serde_json::from_str(bytes).map_err(|e| schema("", e.to_string()))?;
    from_value(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truss_round_trip() {
        let d = Document::Truss(Bundle::one("RSR").unwrap().product(&Bundle::one("R").unwrap()));
        let s = serialize(&d);
        assert_eq!(parse(&s).unwrap(), d);
        assert_eq!(serialize(&parse(&s).unwrap()), s);
    }

    #[test]
    fn bad_fiber_is_validation_error() {
        let s = r#"{"format_version":1,"kind":"truss","payload":{"n":1,"levels":[{"fibers":{"":"RRS"},"bordisms":{}}]}}"#;
        assert!(matches!(parse(s), Err(IoError::Validation(_))));
    }

    #[test]
    fn truncated_is_schema_error() {
        assert!(matches!(parse("{\"format_version\":1,"), Err(IoError::Schema { .. })));
        let s = r#"{"format_version":1,"kind":"truss","payload":{"n":1,"levels":[{"fibers":{}}]}}"#;
        match parse(s) {
            Err(IoError::Schema { pointer, .. }) => assert_eq!(pointer, "/payload/levels/0/fibers"),
            other => panic!("{other:?}"),
        }
    }
}
