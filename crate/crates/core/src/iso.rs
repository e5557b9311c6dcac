//! Isomorphism testing by individualization and refinement.
//!
//! An anchor pair `(α,β)` of `X` is individualized and the colouring of
//! `(E, s, 1_α, 1_β)` refined; while it is not discrete the first vertex of
//! the first non-singleton cell is individualized as well. In `X′` every
//! image pair `(α′,β′)` is tried, following the same cells. Colours are
//! canonical, so an isomorphism sending the individualized sequence to the
//! candidate sequence induces exactly the colour-matching bijection at the
//! leaf; every leaf bijection is checked against `E` and `s` before it is
//! returned.

use serde::{Deserialize, Serialize};

use crate::cc::{vertex_refinement, TypedAdjacency, VertexColoring};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::relation::Relation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsoVerdict {
    Isomorphic,
    NotIsomorphic,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoResult {
    pub verdict: IsoVerdict,
    /// `bijection[v]` is the image in `X′` of vertex `v` of `X`.
    pub bijection: Option<Vec<usize>>,
    pub anchor: (usize, usize),
    pub image: Option<(usize, usize)>,
    /// Search nodes (refinements in `X′`) visited.
    pub nodes: usize,
}

#[derive(Clone, Debug)]
pub struct IsoOptions {
    pub anchor: Option<(usize, usize)>,
    /// Block size of consecutive fibers, used for the default anchor.
    pub fiber_size: Option<usize>,
    pub node_budget: usize,
}

impl Default for IsoOptions {
    fn default() -> Self {
        IsoOptions { anchor: None, fiber_size: None, node_budget: 2_000_000 }
    }
}

/// First nonadjacent pair `(0, β)` with β outside the fiber of 0 when fibers
/// are given.
pub fn default_anchor(g: &Graph, fiber_size: Option<usize>) -> (usize, usize) {
    let n = g.n();
    let cross = |b: usize| fiber_size.is_none_or(|f| b / f != 0);
    let beta = (1..n)
        .find(|&b| cross(b) && !g.has_edge(0, b))
        .or_else(|| (1..n).find(|&b| !g.has_edge(0, b)))
        .unwrap_or(1.min(n.saturating_sub(1)));
    (0, beta)
}

struct Side<'a> {
    g: &'a Graph,
    s: &'a Relation,
    adj: TypedAdjacency,
    base: Vec<u64>,
}

impl<'a> Side<'a> {
    fn new(g: &'a Graph, s: &'a Relation) -> Result<Self> {
        let (adj, base) = crate::cc::typed_adjacency_from_relations(g.n(), &[g.edge_relation(), s.clone()], &[])?;
        Ok(Side { g, s, adj, base })
    }

    fn refine(&self, seq: &[usize]) -> VertexColoring {
        let mut init = self.base.clone();
        for (i, &v) in seq.iter().enumerate() {
            init[v] |= (i as u64 + 1) << 48;
        }
        vertex_refinement(&self.adj, &init)
    }

    fn pair_type(&self, a: usize, b: usize) -> (bool, bool, bool) {
        (self.g.has_edge(a, b), self.s.contains(a, b), self.s.contains(b, a))
    }
}

/// What a candidate colouring must reproduce at one search level.
#[derive(PartialEq, Eq)]
struct Shape {
    num_colors: usize,
    trace: u64,
    sizes: Vec<usize>,
}

impl Shape {
    fn of(c: &VertexColoring) -> Self {
        Shape { num_colors: c.num_colors, trace: c.trace, sizes: c.cells().iter().map(Vec::len).collect() }
    }
}

struct Level {
    shape: Shape,
    /// Colour of the cell individualized next; `None` at the leaf.
    branch: Option<u32>,
}

pub fn iso_test(x: &Graph, y: &Graph, s: &Relation, t: &Relation) -> Result<IsoResult> {
    iso_test_with(x, y, s, t, &IsoOptions::default())
}

pub fn iso_test_with(x: &Graph, y: &Graph, s: &Relation, t: &Relation, opts: &IsoOptions) -> Result<IsoResult> {
    let n = x.n();
    if y.n() != n || s.n() != n || t.n() != n {
        return Err(Error::OrderMismatch(n, y.n().max(s.n()).max(t.n())));
    }
    let anchor = opts.anchor.unwrap_or_else(|| default_anchor(x, opts.fiber_size));
    if n > 0 && (anchor.0 >= n || anchor.1 >= n || (n > 1 && anchor.0 == anchor.1)) {
        return Err(Error::Invalid(format!("anchor {anchor:?} invalid for order {n}")));
    }
    let mut result = IsoResult { verdict: IsoVerdict::NotIsomorphic, bijection: None, anchor, image: None, nodes: 0 };
    if n < 2 {
        let id: Vec<usize> = (0..n).collect();
        if verify(x, y, s, t, &id) {
            result.verdict = IsoVerdict::Isomorphic;
            result.bijection = Some(id);
        }
        return Ok(result);
    }
    if x.edge_count() != y.edge_count() || s.len() != t.len() {
        return Ok(result);
    }
    let sx = Side::new(x, s)?;
    let sy = Side::new(y, t)?;
    let (cx, cy) = (sx.refine(&[]), sy.refine(&[]));
    if Shape::of(&cx) != Shape::of(&cy) {
        return Ok(result);
    }

    let mut levels = Vec::new();
    let mut seq = vec![anchor.0, anchor.1];
    loop {
        let c = sx.refine(&seq);
        if c.is_discrete() {
            levels.push(Level { shape: Shape::of(&c), branch: None });
            break;
        }
        let cell = c.cells().into_iter().find(|cell| cell.len() > 1).expect("not discrete");
        levels.push(Level { shape: Shape::of(&c), branch: Some(c.colors[cell[0]]) });
        seq.push(cell[0]);
    }
    let target = sx.refine(&seq).colors;

    let want = sx.pair_type(anchor.0, anchor.1);
    let mut search = Search { sy: &sy, levels: &levels, target: &target, x, y, s, t, nodes: 0, budget: opts.node_budget };
    for a in 0..n {
        if cy.colors[a] != cx.colors[anchor.0] {
            continue;
        }
        for b in 0..n {
            if b == a || cy.colors[b] != cx.colors[anchor.1] || sy.pair_type(a, b) != want {
                continue;
            }
            match search.dfs(&mut vec![a, b], 0) {
                Step::Found(pi) => {
                    result.verdict = IsoVerdict::Isomorphic;
                    result.bijection = Some(pi);
                    result.image = Some((a, b));
                    result.nodes = search.nodes;
                    return Ok(result);
                }
                Step::OutOfBudget => {
                    result.verdict = IsoVerdict::Inconclusive;
                    result.nodes = search.nodes;
                    return Ok(result);
                }
                Step::Exhausted => {}
            }
        }
    }
    result.nodes = search.nodes;
    Ok(result)
}

enum Step {
    Found(Vec<usize>),
    Exhausted,
    OutOfBudget,
}

struct Search<'a> {
    sy: &'a Side<'a>,
    levels: &'a [Level],
    target: &'a [u32],
    x: &'a Graph,
    y: &'a Graph,
    s: &'a Relation,
    t: &'a Relation,
    nodes: usize,
    budget: usize,
}

impl Search<'_> {
    fn dfs(&mut self, seq: &mut Vec<usize>, depth: usize) -> Step {
        if self.nodes >= self.budget {
            return Step::OutOfBudget;
        }
        self.nodes += 1;
        let c = self.sy.refine(seq);
        let level = &self.levels[depth];
        if Shape::of(&c) != level.shape {
            return Step::Exhausted;
        }
        match level.branch {
            None => {
                let mut by_color = vec![0usize; c.colors.len()];
                for (v, &col) in c.colors.iter().enumerate() {
                    by_color[col as usize] = v;
                }
                let pi: Vec<usize> = self.target.iter().map(|&col| by_color[col as usize]).collect();
                if verify(self.x, self.y, self.s, self.t, &pi) {
                    Step::Found(pi)
                } else {
                    Step::Exhausted
                }
            }
            Some(color) => {
                let cell: Vec<usize> = (0..c.colors.len()).filter(|&v| c.colors[v] == color).collect();
                for w in cell {
                    seq.push(w);
                    let r = self.dfs(seq, depth + 1);
                    seq.pop();
                    if !matches!(r, Step::Exhausted) {
                        return r;
                    }
                }
                Step::Exhausted
            }
        }
    }
}

/// True iff `pi` is a bijection mapping `E` onto `E′` and `s` onto `t`.
pub fn verify(x: &Graph, y: &Graph, s: &Relation, t: &Relation, pi: &[usize]) -> bool {
    let n = x.n();
    if pi.len() != n || y.n() != n || !crate::plane::is_permutation(pi, n) {
        return false;
    }
    x.edge_count() == y.edge_count()
        && s.len() == t.len()
        && x.edges().all(|(a, b)| y.has_edge(pi[a], pi[b]))
        && s.pairs().all(|(a, b)| t.contains(pi[a], pi[b]))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoClasses {
    /// Member indices per class; the first member is the representative.
    pub classes: Vec<Vec<usize>>,
    /// Items whose comparison with some representative was inconclusive.
    pub inconclusive: Vec<usize>,
    /// For each item, the verified bijection onto its class representative.
    pub to_representative: Vec<Option<Vec<usize>>>,
}

impl IsoClasses {
    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }
}

/// Partitions `items` into isomorphism classes by comparing each item with
/// the representatives found so far.
pub fn iso_classes(items: &[(&Graph, &Relation)], opts: &IsoOptions) -> Result<IsoClasses> {
    let mut out = IsoClasses { classes: Vec::new(), inconclusive: Vec::new(), to_representative: vec![None; items.len()] };
    'items: for (i, &(g, s)) in items.iter().enumerate() {
        let mut unsure = false;
        for class in out.classes.iter_mut() {
            let (rg, rs) = items[class[0]];
            let r = iso_test_with(g, rg, s, rs, opts)?;
            match r.verdict {
                IsoVerdict::Isomorphic => {
                    class.push(i);
                    out.to_representative[i] = r.bijection;
                    continue 'items;
                }
                IsoVerdict::Inconclusive => unsure = true,
                IsoVerdict::NotIsomorphic => {}
            }
        }
        if unsure {
            out.inconclusive.push(i);
        } else {
            out.to_representative[i] = Some((0..g.n()).collect());
            out.classes.push(vec![i]);
        }
    }
    Ok(out)
}
