use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use std::process::ExitCode;
use trusskit::diagram::{canonical_link, cells_report, is_cell_diagram, is_compact_manifold_diagram, is_manifold_diagram};
use trusskit::explore::{
    compose_perturbations, enumerate, search_perturbation, stability, verify_perturbation,
    Bounds, Enumerated, Filter, SearchOutcome, Stability,
};
use trusskit::io::{parse, serialize, to_value, Document};
use trusskit::poset::Verdict;
use trusskit::render::{render_svg, slices, RenderOptions};
use trusskit::strat::{glue_strat, normalize, StratTruss};
use trusskit::tangle::{
    cell_structure, compactify_tangle, dual_cell_structure, is_compact_tangle, is_tangle, tstr, TanglePresentation,
};
use trusskit::truss::Bundle;

const EXIT_NO: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

#[derive(Parser)]
#[command(name = "trusskit", version, about = "Framed trusses, diagrams and tangles")]
struct Cli {
    /// machine-readable output on stdout
    #[arg(long, global = true)]
    json: bool,
    /// reserved; has no effect on results
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a document
    Validate {
        file: String,
        /// print the canonical form
        #[arg(long)]
        canonical: bool,
    },
    /// Normal form of a stratified truss
    Normalize { file: String },
    /// Dual truss or stratified truss
    Dual {
        file: String,
        #[arg(long)]
        twice: bool,
    },
    Compactify { file: String },
    Interior { file: String },
    /// Glue two documents along a direction
    Glue {
        a: String,
        b: String,
        #[arg(long)]
        dir: usize,
    },
    CheckDiagram {
        file: String,
        #[arg(long)]
        compact: bool,
        /// check cell diagrams instead of manifold diagrams
        #[arg(long)]
        cell: bool,
    },
    CheckTangle {
        file: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        compact: bool,
    },
    Tstr { file: String },
    Link {
        file: String,
        #[arg(long)]
        stratum: usize,
    },
    Cells { file: String },
    DualCells { file: String },
    Complexity { file: String },
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long = "max-size")]
        max_size: usize,
        #[arg(long)]
        tangle: Option<usize>,
        #[arg(long)]
        strata: Option<usize>,
    },
    #[command(subcommand)]
    Perturb(PerturbCmd),
    Stable {
        file: String,
        #[arg(long)]
        inductive: bool,
        #[arg(long = "max-q", default_value_t = 4)]
        max_q: usize,
        #[arg(long = "max-total", default_value_t = 16)]
        max_total: usize,
    },
    Render {
        file: String,
        /// level-wise text dump instead of SVG
        #[arg(long)]
        slices: bool,
    },
}

#[derive(Subcommand)]
enum PerturbCmd {
    Verify { file: String },
    Compose { a: String, b: String },
    Search {
        file: String,
        #[arg(long = "max-q", default_value_t = 4)]
        max_q: usize,
        #[arg(long = "max-total", default_value_t = 16)]
        max_total: usize,
    },
}

enum Fail {
    Usage(String),
    Data(String),
}

type Out = Result<u8, Fail>;

fn data(e: impl ToString) -> Fail {
    Fail::Data(e.to_string())
}

fn max_total() -> usize {
    std::env::var("TRUSSKIT_MAX_TOTAL")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(100_000)
}

fn load(path: &str) -> Result<Document, Fail> {
    let s = std::fs::read_to_string(path).map_err(|e| Fail::Data(format!("{path}: {e}")))?;
    let d = parse(&s).map_err(|e| Fail::Data(format!("{path}: {e}")))?;
    let size = match &d {
        Document::Poset(p) => p.len(),
        Document::Truss(b) => b.top().len(),
        Document::Strat(s) => s.bundle().top().len(),
        Document::Tangle(t) => t.bundle().top().len(),
        Document::Bundle(t) | Document::Certificate(t) => t.bundle().top().len(),
    };
    if size > max_total() {
        return Err(Fail::Data(format!("{path}: {size} elements exceed TRUSSKIT_MAX_TOTAL")));
    }
    Ok(d)
}

fn as_strat(d: Document) -> Result<StratTruss, Fail> {
    match d {
        Document::Strat(s) => Ok(s),
        Document::Truss(b) => Ok(StratTruss::constant(b)),
        Document::Tangle(t) => Ok(t.strat()),
        Document::Bundle(t) | Document::Certificate(t) => Ok(t.strat()),
        Document::Poset(_) => Err(Fail::Data("expected a truss-like document".into())),
    }
}

fn as_tangle(d: Document) -> Result<TanglePresentation, Fail> {
    match d {
        Document::Tangle(t) => Ok(t),
        _ => Err(Fail::Data("expected a tangle document".into())),
    }
}

fn emit_doc(d: &Document) {
    print!("{}", serialize(d));
}

fn emit(json_mode: bool, v: Value, text: impl FnOnce() -> String) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(&v).expect("values serialize"));
    } else {
        println!("{}", text());
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Yes => 0,
        Verdict::No => EXIT_NO,
        Verdict::Unknown => EXIT_UNKNOWN,
    }
}

fn bounds(max_q: usize, max_total: usize) -> Bounds {
    Bounds {
        max_generic_q: max_q,
        max_total,
        ..Bounds::default()
    }
}

fn run(cli: Cli) -> Out {
    let j = cli.json;
    match cli.cmd {
        Cmd::Validate { file, canonical } => {
            let d = load(&file)?;
            if canonical {
                emit_doc(&d);
            } else {
                emit(j, json!({"kind": d.kind(), "valid": true}), || format!("valid {}", d.kind()));
            }
            Ok(0)
        }
        Cmd::Normalize { file } => {
            let st = as_strat(load(&file)?)?;
            let (nf, _) = normalize(&st);
            emit_doc(&Document::Strat(nf));
            Ok(0)
        }
        Cmd::Dual { file, twice } => {
            let d = load(&file)?;
            let once = |d: Document| -> Result<Document, Fail> {
                match d {
                    Document::Truss(b) => Ok(Document::Truss(b.dual())),
                    Document::Strat(s) => Ok(Document::Strat(s.dual())),
                    Document::Poset(p) => Ok(Document::Poset(p.opposite())),
                    _ => Err(Fail::Data("dual expects a poset, truss or strat document".into())),
                }
            };
            let mut out = once(d)?;
            if twice {
                out = once(out)?;
            }
            emit_doc(&out);
            Ok(0)
        }
        Cmd::Compactify { file } => {
            match load(&file)? {
                Document::Truss(b) => emit_doc(&Document::Truss(b.compactify().map_err(data)?.bundle)),
                Document::Tangle(t) => emit_doc(&Document::Tangle(compactify_tangle(&t).map_err(data)?)),
                d => {
                    let (c, _) = as_strat(d)?.compactify().map_err(data)?;
                    emit_doc(&Document::Strat(c));
                }
            }
            Ok(0)
        }
        Cmd::Interior { file } => {
            match load(&file)? {
                Document::Truss(b) => emit_doc(&Document::Truss(b.interior().map_err(data)?.bundle)),
                d => {
                    let (c, _) = as_strat(d)?.interior().map_err(data)?;
                    emit_doc(&Document::Strat(c));
                }
            }
            Ok(0)
        }
        Cmd::Glue { a, b, dir } => {
            match (load(&a)?, load(&b)?) {
                (Document::Truss(x), Document::Truss(y)) => {
                    emit_doc(&Document::Truss(Bundle::glue(&x, &y, dir).map_err(data)?.bundle))
                }
                (x, y) => {
                    let g = glue_strat(&as_strat(x)?, &as_strat(y)?, dir).map_err(data)?;
                    emit_doc(&Document::Strat(g));
                }
            }
            Ok(0)
        }
        Cmd::CheckDiagram { file, compact, cell } => {
            let st = as_strat(load(&file)?)?;
            let r = if cell {
                is_cell_diagram(&st).map_err(data)?
            } else if compact {
                is_compact_manifold_diagram(&st)
            } else {
                is_manifold_diagram(&st)
            };
            let v = serde_json::to_value(&r).expect("report serializes");
            emit(j, v, || match &r.failure {
                None => "yes".into(),
                Some((at, why)) => format!("no: {}{why}", at.as_ref().map(|a| format!("{a}: ")).unwrap_or_default()),
            });
            Ok(if r.verdict { 0 } else { EXIT_NO })
        }
        Cmd::CheckTangle { file, m, compact } => {
            let mut tp = as_tangle(load(&file)?)?;
            if let Some(m) = m {
                tp = TanglePresentation::new(tp.bundle().clone(), tp.q().to_vec(), m).map_err(data)?;
            }
            let r = if compact { is_compact_tangle(&tp) } else { is_tangle(&tp) };
            let v = serde_json::to_value(&r).expect("report serializes");
            emit(j, v, || match &r.failure {
                None => format!("{}: tdim {:?}", r.verdict, r.tdim),
                Some((at, why)) => format!(
                    "{}: {}{why}",
                    r.verdict,
                    at.as_ref().map(|a| format!("{a}: ")).unwrap_or_default()
                ),
            });
            Ok(verdict_code(r.verdict))
        }
        Cmd::Tstr { file } => {
            let tp = as_tangle(load(&file)?)?;
            emit_doc(&Document::Strat(tstr(&tp).map_err(data)?));
            Ok(0)
        }
        Cmd::Link { file, stratum } => {
            let st = as_strat(load(&file)?)?;
            let l = canonical_link(&st, stratum).map_err(data)?;
            let p = trusskit::io::poset_value(&l.poset);
            emit(true, json!({"poset": p, "labels": l.labels}), String::new);
            Ok(0)
        }
        Cmd::Cells { file } => match load(&file)? {
            Document::Tangle(tp) => {
                let c = cell_structure(&tp).map_err(data)?;
                emit(
                    j,
                    json!({"elements": c.poset.names(), "dims": c.dims, "cellular": c.cellular, "euler": c.euler}),
                    || format!("{} cells, cellular {}, euler {}", c.poset.len(), c.cellular, c.euler),
                );
                Ok(verdict_code(c.cellular))
            }
            d => {
                let cells = cells_report(&as_strat(d)?).map_err(data)?;
                let v = serde_json::to_value(&cells).expect("cells serialize");
                emit(j, v, || {
                    cells
                        .iter()
                        .map(|c| format!("{} dim {}{}", c.element, c.dim, if c.degenerate { " degenerate" } else { "" }))
                        .collect::<Vec<_>>()
                        .join("\n")
                });
                Ok(0)
            }
        },
        Cmd::DualCells { file } => {
            let tp = as_tangle(load(&file)?)?;
            let c = dual_cell_structure(&tp).map_err(data)?;
            emit(
                j,
                json!({"elements": c.poset.names(), "dims": c.dims, "cellular": c.cellular, "euler": c.euler}),
                || format!("{} cells, cellular {}, euler {}", c.poset.len(), c.cellular, c.euler),
            );
            Ok(verdict_code(c.cellular))
        }
        Cmd::Complexity { file } => {
            let tp = as_tangle(load(&file)?)?;
            let c = tp.complexity();
            emit(j, json!({"complexity": c}), || c.to_string());
            Ok(0)
        }
        Cmd::Enumerate {
            n,
            max_size,
            tangle,
            strata,
        } => {
            let filter = match (tangle, strata) {
                (Some(_), Some(_)) => return Err(Fail::Usage("--tangle and --strata are exclusive".into())),
                (Some(m), None) => Filter::Tangles { m },
                (None, Some(k)) => Filter::Stratified { max_strata: k },
                (None, None) => Filter::Trusses,
            };
            let all = enumerate(n, max_size, filter, max_total()).map_err(data)?;
            for e in all {
                let d = match e {
                    Enumerated::Truss(b) => Document::Truss(b),
                    Enumerated::Strat(s) => Document::Strat(s),
                    Enumerated::Tangle(t) => Document::Tangle(t),
                };
                println!("{}", serde_json::to_string(&to_value(&d)).expect("values serialize"));
            }
            Ok(0)
        }
        Cmd::Perturb(PerturbCmd::Verify { file }) => {
            let tb = match load(&file)? {
                Document::Certificate(t) | Document::Bundle(t) => t,
                _ => return Err(Fail::Data("expected a certificate".into())),
            };
            let r = verify_perturbation(&tb);
            emit(j, json!({"verified": r.is_ok(), "reason": r.as_ref().err()}), || match &r {
                Ok(()) => "verified".into(),
                Err(e) => format!("refuted: {e}"),
            });
            Ok(if r.is_ok() { 0 } else { EXIT_NO })
        }
        Cmd::Perturb(PerturbCmd::Compose { a, b }) => {
            let get = |p: &str| -> Result<_, Fail> {
                match load(p)? {
                    Document::Certificate(t) | Document::Bundle(t) => Ok(t),
                    _ => Err(Fail::Data(format!("{p}: expected a certificate"))),
                }
            };
            let c = compose_perturbations(&get(&a)?, &get(&b)?).map_err(data)?;
            emit_doc(&Document::Certificate(c));
            Ok(0)
        }
        Cmd::Perturb(PerturbCmd::Search { file, max_q, max_total }) => {
            let tp = as_tangle(load(&file)?)?;
            match search_perturbation(&tp, bounds(max_q, max_total)) {
                SearchOutcome::Found(c) => {
                    emit_doc(&Document::Certificate(*c));
                    Ok(0)
                }
                SearchOutcome::None => {
                    emit(j, json!({"result": "none"}), || "none".into());
                    Ok(EXIT_NO)
                }
                SearchOutcome::Inconclusive => {
                    emit(j, json!({"result": "inconclusive"}), || "inconclusive".into());
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Cmd::Stable {
            file,
            inductive,
            max_q,
            max_total,
        } => {
            let tp = as_tangle(load(&file)?)?;
            match stability(&tp, bounds(max_q, max_total), inductive) {
                Stability::StableWithinBounds { inductively_stable } => {
                    emit(
                        j,
                        json!({"result": "stable_within_bounds", "inductively_stable": inductively_stable}),
                        || match inductively_stable {
                            Some(i) => format!("stable within bounds; inductively stable: {i}"),
                            None => "stable within bounds".into(),
                        },
                    );
                    Ok(0)
                }
                Stability::Unstable(c) => {
                    emit(j, json!({"result": "unstable", "certificate": to_value(&Document::Certificate(*c))}), || {
                        "unstable".into()
                    });
                    Ok(EXIT_NO)
                }
                Stability::Inconclusive => {
                    emit(j, json!({"result": "inconclusive"}), || "inconclusive".into());
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Cmd::Render { file, slices: text } => {
            let d = load(&file)?;
            let tangle = matches!(d, Document::Tangle(_));
            let st = as_strat(d)?;
            if text {
                print!("{}", slices(&st));
                return Ok(0);
            }
            let opts = RenderOptions {
                emphasize: if tangle { vec!["in".into()] } else { Vec::new() },
            };
            print!("{}", render_svg(&st, &opts).map_err(data)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Fail::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
