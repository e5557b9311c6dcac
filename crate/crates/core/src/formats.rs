//! Plain-text graph files.
//!
//! ```text
//! fdf q=4 n=96
//! modulus 0x13
//! hyperoval 0,1 1,0 ...        hex coordinates x,y
//! switch {"i":0,"j":3,"cycle":[1,2,3,0]}
//! path {"fibers":[...],"cycles":[...],"seed":1}
//! params 96 20 4 4
//! edges 960
//! 0 17
//! ...
//! ```
//!
//! Vertex `(point, fiber)` is `fiber·q² + point`. Graphs without provenance
//! use the header `graph n=<n>` and only the `edges` block. Loading an `fdf`
//! file rebuilds the graph from its provenance and rejects the file if the
//! stored edge list differs.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::fdf::{build_xstar, FdfGraph, SwitchRecord};
use crate::graph::Graph;
use crate::plane::{AffinePlane, Hyperoval};
use crate::srg::SrgParams;
use crate::switching::{elementary_switch, path_switch, SwitchSpec};

#[derive(Clone, Debug)]
pub struct GraphFile {
    pub q: Option<usize>,
    pub modulus: Option<u32>,
    pub hyperoval: Option<Vec<(u8, u8)>>,
    pub switches: Vec<SwitchRecord>,
    pub path: Option<SwitchSpec>,
    pub params: Option<SrgParams>,
    pub graph: Graph,
}

pub fn write_fdf(x: &FdfGraph, params: Option<SrgParams>) -> String {
    let mut s = String::new();
    let plane = x.plane();
    writeln!(s, "fdf q={} n={}", x.q(), x.n()).unwrap();
    writeln!(s, "modulus {:#x}", plane.field().modulus()).unwrap();
    if let Some(h) = &x.provenance().hyperoval {
        let pts: Vec<String> = h
            .iter()
            .map(|&p| {
                let (a, b) = plane.coords(p);
                format!("{a:x},{b:x}")
            })
            .collect();
        writeln!(s, "hyperoval {}", pts.join(" ")).unwrap();
    }
    for r in &x.provenance().switches {
        writeln!(s, "switch {}", serde_json::to_string(r).unwrap()).unwrap();
    }
    if let Some(p) = &x.provenance().path {
        writeln!(s, "path {}", p.to_json()).unwrap();
    }
    write_tail(&mut s, x.graph(), params);
    s
}

pub fn write_plain(g: &Graph) -> String {
    let mut s = format!("graph n={}\n", g.n());
    write_tail(&mut s, g, None);
    s
}

fn write_tail(s: &mut String, g: &Graph, params: Option<SrgParams>) {
    if let Some(p) = params {
        writeln!(s, "params {} {} {} {}", p.n, p.k, p.lambda, p.mu).unwrap();
    }
    writeln!(s, "edges {}", g.edge_count()).unwrap();
    for (u, v) in g.edges() {
        writeln!(s, "{u} {v}").unwrap();
    }
}

fn header_value(tok: &str, key: &str, line: usize) -> Result<usize> {
    tok.strip_prefix(key)
        .and_then(|v| v.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Parse { line, msg: format!("expected {key}=<integer>, got {tok:?}") })
}

pub fn parse_graph_file(text: &str) -> Result<GraphFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let (ln, head) = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
    let toks: Vec<&str> = head.split_whitespace().collect();
    let (q, n) = match toks.as_slice() {
        ["fdf", q, n] => {
            let q = header_value(q, "q", ln)?;
            (Some(q), header_value(n, "n", ln)?)
        }
        ["graph", n] => (None, header_value(n, "n", ln)?),
        _ => return Err(perr(ln, format!("unrecognized header {head:?}"))),
    };
    let mut file = GraphFile {
        q,
        modulus: None,
        hyperoval: None,
        switches: Vec::new(),
        path: None,
        params: None,
        graph: Graph::empty(n),
    };
    let mut expected_edges = None;
    let mut seen_edges = 0usize;
    for (ln, line) in lines {
        if expected_edges.is_some() {
            let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
            let (u, v) = match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) if u < n && v < n && u != v => (u, v),
                _ => return Err(perr(ln, format!("bad edge line {line:?}"))),
            };
            if file.graph.has_edge(u, v) {
                return Err(perr(ln, format!("duplicate edge {u} {v}")));
            }
            file.graph.add_edge(u, v);
            seen_edges += 1;
            continue;
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        let rest = rest.trim();
        match key {
            "modulus" => {
                let m = u32::from_str_radix(rest.trim_start_matches("0x"), 16)
                    .map_err(|_| perr(ln, format!("bad modulus {rest:?}")))?;
                file.modulus = Some(m);
            }
            "hyperoval" => {
                let pts = rest
                    .split_whitespace()
                    .map(|t| {
                        let (a, b) = t.split_once(',')?;
                        Some((u8::from_str_radix(a, 16).ok()?, u8::from_str_radix(b, 16).ok()?))
                    })
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| perr(ln, "bad hyperoval point".into()))?;
                file.hyperoval = Some(pts);
            }
            "switch" => {
                let r: SwitchRecord =
                    serde_json::from_str(rest).map_err(|e| perr(ln, format!("bad switch record: {e}")))?;
                file.switches.push(r);
            }
            "path" => {
                file.path = Some(SwitchSpec::from_json(rest).map_err(|e| perr(ln, format!("bad path: {e}")))?);
            }
            "params" => {
                let v: Vec<usize> = rest
                    .split_whitespace()
                    .map(|t| t.parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| perr(ln, "bad params".into()))?;
                if v.len() != 4 {
                    return Err(perr(ln, "params needs four integers".into()));
                }
                file.params = Some(SrgParams { n: v[0], k: v[1], lambda: v[2], mu: v[3] });
            }
            "edges" => {
                expected_edges = Some(rest.parse::<usize>().map_err(|_| perr(ln, "bad edge count".into()))?);
            }
            _ => return Err(perr(ln, format!("unknown line {key:?}"))),
        }
    }
    match expected_edges {
        None => return Err(perr(0, "missing edges block".into())),
        Some(m) if m != seen_edges => return Err(perr(0, format!("edges {m} announced, {seen_edges} listed"))),
        _ => {}
    }
    Ok(file)
}

/// Rebuilds the FdF graph described by the provenance of `file` and checks
/// it against the stored edges.
pub fn rebuild_fdf(file: &GraphFile) -> Result<FdfGraph> {
    let q = file.q.ok_or_else(|| Error::Invalid("not an fdf graph file".into()))?;
    let plane = AffinePlane::with_order(q)?;
    if let Some(m) = file.modulus {
        if m != plane.field().modulus() {
            return Err(Error::Invalid(format!("modulus {m:#x} differs from {:#x}", plane.field().modulus())));
        }
    }
    let coords = file.hyperoval.as_ref().ok_or_else(|| Error::Invalid("hyperoval provenance missing".into()))?;
    if coords.iter().any(|&(a, b)| a as usize >= q || b as usize >= q) {
        return Err(Error::Invalid("hyperoval coordinate outside the field".into()));
    }
    let pts = coords.iter().map(|&(a, b)| plane.point(a, b)).collect();
    let h = Hyperoval::new(&plane, pts)?;
    let mut x = build_xstar(&plane, &h)?;
    if let Some(spec) = &file.path {
        x = path_switch(&x, spec)?;
        if x.provenance().switches != file.switches {
            return Err(Error::Invalid("switch records disagree with the path".into()));
        }
    } else {
        for r in &file.switches {
            x = elementary_switch(&x, r.i, r.j, &r.cycle)?;
        }
    }
    if x.graph() != &file.graph {
        return Err(Error::Invalid("edge list does not match the recorded provenance".into()));
    }
    Ok(x)
}

pub fn read_fdf(text: &str) -> Result<FdfGraph> {
    rebuild_fdf(&parse_graph_file(text)?)
}
