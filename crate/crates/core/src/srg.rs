//! Strong regularity, common-neighbourhood edge counts and the 4-condition.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::relation::{BitMatrix, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SrgParams {
    pub n: usize,
    pub k: usize,
    pub lambda: usize,
    pub mu: usize,
}

impl SrgParams {
    /// `(q²(q+2), q(q+1), q, q)`.
    pub fn fdf(q: usize) -> Self {
        SrgParams { n: q * q * (q + 2), k: q * (q + 1), lambda: q, mu: q }
    }

    pub fn is_feasible(&self) -> bool {
        self.k * (self.k.saturating_sub(self.lambda + 1)) == (self.n - self.k - 1) * self.mu
    }
}

impl std::fmt::Display for SrgParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.n, self.k, self.lambda, self.mu)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum SrgVerdict {
    StronglyRegular(SrgParams),
    NotRegular { vertex: usize, degree: usize, expected: usize },
    /// `(a, b)` has `count` common neighbours where `expected` was seen first.
    NotStronglyRegular { a: usize, b: usize, adjacent: bool, count: usize, expected: usize },
    /// Regular, but one of the two pair classes is empty (complete or edgeless).
    Degenerate { n: usize, k: usize, reason: String },
}

impl SrgVerdict {
    pub fn params(&self) -> Option<SrgParams> {
        match self {
            SrgVerdict::StronglyRegular(p) => Some(*p),
            _ => None,
        }
    }
}

pub fn srg_parameters(g: &Graph) -> SrgVerdict {
    let n = g.n();
    if n == 0 {
        return SrgVerdict::Degenerate { n, k: 0, reason: "empty vertex set".into() };
    }
    let k = g.degree(0);
    if let Some(v) = (0..n).find(|&v| g.degree(v) != k) {
        return SrgVerdict::NotRegular { vertex: v, degree: g.degree(v), expected: k };
    }
    if k == n - 1 || k == 0 {
        let reason = if k == 0 { "no adjacent pairs" } else { "no nonadjacent pairs" };
        return SrgVerdict::Degenerate { n, k, reason: reason.into() };
    }
    let adj = g.adjacency();
    // first pair of each kind in lexicographic order fixes λ and μ
    let reference = |want: bool| {
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).find(|&(a, b)| adj.get(a, b) == want).unwrap()
    };
    let (la, lb) = reference(true);
    let (ma, mb) = reference(false);
    let lambda = adj.and_count(la, lb);
    let mu = adj.and_count(ma, mb);
    let bad = (0..n).into_par_iter().find_map_first(|a| {
        (a + 1..n).find_map(|b| {
            let adjacent = adj.get(a, b);
            let expected = if adjacent { lambda } else { mu };
            let count = adj.and_count(a, b);
            (count != expected).then_some(SrgVerdict::NotStronglyRegular { a, b, adjacent, count, expected })
        })
    });
    bad.unwrap_or(SrgVerdict::StronglyRegular(SrgParams { n, k, lambda, mu }))
}

/// Number of edges inside the common neighbourhood of `a` and `b`.
pub fn e_count(g: &Graph, a: usize, b: usize) -> Result<usize> {
    let nb = g.common_neighbors(a, b)?;
    Ok(g.edges_within(&nb))
}

fn e_count_buf(adj: &BitMatrix, a: usize, b: usize, buf: &mut Vec<usize>) -> usize {
    adj.and_into(a, b, buf);
    let mut e = 0;
    for (s, &u) in buf.iter().enumerate() {
        for &v in &buf[s + 1..] {
            e += usize::from(adj.get(u, v));
        }
    }
    e
}

/// Nonadjacent distinct pairs whose common neighbourhood spans at least `e` edges.
pub fn s_e_relation(g: &Graph, e: usize) -> Relation {
    let n = g.n();
    let adj = g.adjacency();
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map_init(Vec::new, |buf, a| {
            (0..n).filter(|&b| b != a && !adj.get(a, b) && e_count_buf(adj, a, b, buf) >= e).collect()
        })
        .collect();
    let mut m = BitMatrix::new(n);
    for (a, row) in rows.iter().enumerate() {
        for &b in row {
            m.set(a, b);
        }
    }
    Relation::from_matrix(m)
}

/// Evaluates `e_count` on the given pairs in parallel, preserving order.
pub fn e_counts(g: &Graph, pairs: &[(usize, usize)]) -> Result<Vec<usize>> {
    let n = g.n();
    if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a == b || a >= n || b >= n) {
        return Err(if a == b { Error::SamePair(a) } else { Error::Domain { expected: n, got: a.max(b) } });
    }
    let adj = g.adjacency();
    Ok(pairs.par_iter().map_init(Vec::new, |buf, &(a, b)| e_count_buf(adj, a, b, buf)).collect())
}

/// Uniform JSON verdict: `{check, pass, witnesses[], counts{}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub pass: bool,
    pub witnesses: Vec<Value>,
    pub counts: BTreeMap<String, Value>,
    /// Observations are reported but do not decide pass/fail of a run.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub observation: bool,
}

impl CheckReport {
    pub fn new(check: &str) -> Self {
        CheckReport { check: check.into(), pass: true, witnesses: Vec::new(), counts: BTreeMap::new(), observation: false }
    }

    pub fn count(&mut self, key: &str, v: impl Serialize) {
        self.counts.insert(key.into(), json!(v));
    }

    pub fn fail(&mut self, witness: Value) {
        self.pass = false;
        if self.witnesses.len() < 20 {
            self.witnesses.push(witness);
        }
    }
}

/// Higman's criterion: `a(α,β) = C(q,2)` on edges (4-cliques through the
/// pair) and `b(α,β) = 0` on non-edges (diamonds with the pair as the
/// missing edge). Both equal the edge count inside `N(α,β)`.
pub fn four_condition_higman(g: &Graph) -> Result<CheckReport> {
    let params = srg_parameters(g)
        .params()
        .ok_or_else(|| Error::WrongParameters("graph is not strongly regular".into()))?;
    let q = params.lambda;
    if params != SrgParams::fdf(q) {
        return Err(Error::WrongParameters(format!("{params} is not of the form (q²(q+2), q(q+1), q, q)")));
    }
    let n = g.n();
    let adj = g.adjacency();
    let want_a = q * (q - 1) / 2;
    // per row: (a-values histogram, b-values histogram, first witnesses)
    type Row = (BTreeMap<usize, usize>, BTreeMap<usize, usize>, Vec<(usize, usize, usize)>);
    let rows: Vec<Row> = (0..n)
        .into_par_iter()
        .map_init(Vec::new, |buf, a| {
            let mut ha = BTreeMap::new();
            let mut hb = BTreeMap::new();
            let mut bad = Vec::new();
            for b in a + 1..n {
                let e = e_count_buf(adj, a, b, buf);
                let (hist, want) = if adj.get(a, b) { (&mut ha, want_a) } else { (&mut hb, 0) };
                *hist.entry(e).or_insert(0) += 1;
                if e != want && bad.len() < 20 {
                    bad.push((a, b, e));
                }
            }
            (ha, hb, bad)
        })
        .collect();
    let mut report = CheckReport::new("four-condition-higman");
    let mut ha = BTreeMap::new();
    let mut hb = BTreeMap::new();
    for (ra, rb, bad) in rows {
        for (k, v) in ra {
            *ha.entry(k).or_insert(0usize) += v;
        }
        for (k, v) in rb {
            *hb.entry(k).or_insert(0usize) += v;
        }
        for (a, b, e) in bad {
            let adjacent = adj.get(a, b);
            report.fail(json!({"pair": [a, b], "adjacent": adjacent, "count": e}));
        }
    }
    report.count("q", q);
    report.count("expected_a", want_a);
    report.count("a_values", &ha);
    report.count("b_values", &hb);
    Ok(report)
}

/// 6-bit pattern of `{α,β,γ,δ}` reduced modulo swapping γ and δ.
/// Bits: αβ, αγ, αδ, βγ, βδ, γδ.
fn census_type(adj: &BitMatrix, a: usize, b: usize, c: usize, d: usize) -> u8 {
    let bit = |x: usize, y: usize| u8::from(adj.get(x, y));
    let t = bit(a, b) | bit(a, c) << 1 | bit(a, d) << 2 | bit(b, c) << 3 | bit(b, d) << 4 | bit(c, d) << 5;
    let s = bit(a, b) | bit(a, d) << 1 | bit(a, c) << 2 | bit(b, d) << 3 | bit(b, c) << 4 | bit(c, d) << 5;
    t.min(s)
}

pub const DEFAULT_CENSUS_CAP: usize = 100;

/// Full census of 4-vertex types anchored at each ordered pair; passes iff
/// the type counts are constant over adjacent and over nonadjacent pairs.
pub fn four_condition_census(g: &Graph, cap: usize) -> Result<CheckReport> {
    let n = g.n();
    if n > cap {
        return Err(Error::CensusCap { n, cap });
    }
    let adj = g.adjacency();
    let census = |a: usize, b: usize| {
        let mut counts = [0u32; 64];
        for c in 0..n {
            if c == a || c == b {
                continue;
            }
            for d in c + 1..n {
                if d != a && d != b {
                    counts[census_type(adj, a, b, c, d) as usize] += 1;
                }
            }
        }
        counts
    };
    type Row = Vec<(usize, usize, bool, [u32; 64])>;
    let rows: Vec<Row> = (0..n)
        .into_par_iter()
        .map(|a| (0..n).filter(|&b| b != a).map(|b| (a, b, adj.get(a, b), census(a, b))).collect())
        .collect();
    let mut report = CheckReport::new("four-condition-census");
    let mut reference: [Option<[u32; 64]>; 2] = [None, None];
    let mut pairs = [0usize; 2];
    for (a, b, adjacent, counts) in rows.into_iter().flatten() {
        let slot = usize::from(adjacent);
        pairs[slot] += 1;
        match &reference[slot] {
            None => reference[slot] = Some(counts),
            Some(r) if *r != counts => {
                let diff: Vec<u8> = (0..64u8).filter(|&t| r[t as usize] != counts[t as usize]).collect();
                report.fail(json!({"pair": [a, b], "adjacent": adjacent, "differing_types": diff}));
            }
            Some(_) => {}
        }
    }
    let summary = |r: &Option<[u32; 64]>| -> BTreeMap<String, u32> {
        r.map(|c| (0..64).filter(|&t| c[t] > 0).map(|t| (format!("{t:06b}"), c[t])).collect()).unwrap_or_default()
    };
    report.count("adjacent_pairs", pairs[1]);
    report.count("nonadjacent_pairs", pairs[0]);
    report.count("adjacent_types", summary(&reference[1]));
    report.count("nonadjacent_types", summary(&reference[0]));
    Ok(report)
}
