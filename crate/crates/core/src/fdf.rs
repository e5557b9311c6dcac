//! Fon-Der-Flaass graphs `X_A(L, Σ)` on `Ω = V × I`.
//!
//! Vertex `(point, fiber)` has index `fiber·q² + point`, so each fiber is a
//! contiguous block. Adjacency convention: `(v,i) ~ (u,j)` iff `i ≠ j` and
//! σ_ij maps the line of class `L[i][j]` through `u` to the line of the
//! same class through `v`. Because σ_ji = σ_ij⁻¹ the relation is symmetric,
//! and with identity σ it says that `u` and `v` share a line of `L[i][j]`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::plane::{class_array_from_hyperoval, AffinePlane, ClassArray, Hyperoval, SigmaSet};
use crate::switching::SwitchSpec;

/// One elementary switching between fibers `i` and `j` with full cycle `f`
/// (line `k` of fiber `i` is joined to line `f[k]` of fiber `j`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchRecord {
    pub i: usize,
    pub j: usize,
    pub cycle: Vec<u16>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub hyperoval: Option<Vec<usize>>,
    pub switches: Vec<SwitchRecord>,
    pub path: Option<SwitchSpec>,
}

/// The fibers `Δ_i = V × {i}` as contiguous index blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiberSet {
    block: usize,
    count: usize,
}

impl FiberSet {
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn fiber(&self, i: usize) -> Range<usize> {
        i * self.block..(i + 1) * self.block
    }

    pub fn fiber_of(&self, v: usize) -> usize {
        v / self.block
    }

    pub fn iter(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.count).map(move |i| self.fiber(i))
    }

    /// Membership mask of a union of fibers.
    pub fn mask(&self, fibers: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.block * self.count];
        for &i in fibers {
            for v in self.fiber(i) {
                m[v] = true;
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct FdfGraph {
    plane: AffinePlane,
    classes: ClassArray,
    sigma: SigmaSet,
    graph: Graph,
    provenance: Provenance,
}

pub fn build_fdf_graph(plane: &AffinePlane, classes: &ClassArray, sigma: &SigmaSet) -> Result<FdfGraph> {
    let q = plane.order();
    if classes.size() != q + 2 || sigma.size() != q + 2 {
        return Err(Error::ClassArray(format!("need {} fibers", q + 2)));
    }
    classes.validate(plane.num_classes())?;
    sigma.validate()?;
    let n = q * q * (q + 2);
    let mut x = FdfGraph {
        plane: plane.clone(),
        classes: classes.clone(),
        sigma: sigma.clone(),
        graph: Graph::empty(n),
        provenance: Provenance::default(),
    };
    for i in 0..q + 2 {
        for j in i + 1..q + 2 {
            x.add_pair_edges(i, j);
        }
    }
    Ok(x)
}

/// `X* = X(A, H)`: class array from the hyperoval, identity bijections.
pub fn build_xstar(plane: &AffinePlane, h: &Hyperoval) -> Result<FdfGraph> {
    let classes = class_array_from_hyperoval(plane, h)?;
    let sigma = SigmaSet::identity(plane.order(), plane.order() + 2);
    let mut x = build_fdf_graph(plane, &classes, &sigma)?;
    x.provenance.hyperoval = Some(h.points().to_vec());
    Ok(x)
}

impl FdfGraph {
    pub fn q(&self) -> usize {
        self.plane.order()
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn plane(&self) -> &AffinePlane {
        &self.plane
    }

    pub fn classes(&self) -> &ClassArray {
        &self.classes
    }

    pub fn sigma(&self) -> &SigmaSet {
        &self.sigma
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn fibers(&self) -> FiberSet {
        FiberSet { block: self.q() * self.q(), count: self.q() + 2 }
    }

    #[inline]
    pub fn vertex(&self, point: usize, fiber: usize) -> usize {
        fiber * self.q() * self.q() + point
    }

    #[inline]
    pub fn split(&self, v: usize) -> (usize, usize) {
        let b = self.q() * self.q();
        (v % b, v / b)
    }

    pub fn hyperoval(&self) -> Option<Hyperoval> {
        self.provenance.hyperoval.as_ref().map(|p| Hyperoval::new(&self.plane, p.clone()).expect("validated at build"))
    }

    pub fn common_neighbors(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        self.graph.common_neighbors(a, b)
    }

    pub fn common_neighbor_count(&self, a: usize, b: usize) -> Result<usize> {
        self.graph.common_neighbor_count(a, b)
    }

    /// Adds the edges between fibers `i` and `j` prescribed by σ_ji.
    fn add_pair_edges(&mut self, i: usize, j: usize) {
        let q = self.q();
        let class = self.classes.get(i, j);
        let sji = self.sigma.get(j, i).to_vec();
        for (line, &partner) in sji.iter().enumerate().take(q) {
            let partner = partner as usize;
            let vs: Vec<usize> = self.plane.line_points(class, line).collect();
            let us: Vec<usize> = self.plane.line_points(class, partner).collect();
            for &v in &vs {
                for &u in &us {
                    let a = self.vertex(v, i);
                    let b = self.vertex(u, j);
                    self.graph.add_edge(a, b);
                }
            }
        }
    }

    /// Replaces every edge between fibers `i` and `j` so that line `k` of
    /// fiber `i` is joined to line `cycle[k]` of fiber `j`.
    pub(crate) fn rewrite_pair(&mut self, i: usize, j: usize, cycle: &[u16]) -> Result<()> {
        self.sigma.set_pair(j, i, cycle)?;
        let fibers = self.fibers();
        let (fi, fj) = (fibers.fiber(i), fibers.fiber(j));
        let adj = &mut self.graph;
        for v in fi.clone() {
            for u in fj.clone() {
                adj.remove_edge(v, u);
            }
        }
        self.add_pair_edges(i.min(j), i.max(j));
        self.provenance.switches.push(SwitchRecord { i, j, cycle: cycle.to_vec() });
        Ok(())
    }

    pub(crate) fn set_path(&mut self, spec: SwitchSpec) {
        self.provenance.path = Some(spec);
    }

    /// `K(a, v) = {(a·h_i + v, i) : i ∈ I}`; needs the hyperoval.
    pub fn hyperoval_clique(&self, a: u8, v: usize) -> Option<Vec<usize>> {
        let h = self.provenance.hyperoval.as_ref()?;
        Some(
            h.iter()
                .enumerate()
                .map(|(i, &hi)| self.vertex(self.plane.add(self.plane.scale(a, hi), v), i))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::find_affine_hyperoval;

    fn xstar(q: usize, seed: u64) -> FdfGraph {
        let p = AffinePlane::with_order(q).unwrap();
        let h = find_affine_hyperoval(&p, seed).unwrap();
        build_xstar(&p, &h).unwrap()
    }

    #[test]
    fn orders_and_degrees() {
        for (q, n, k) in [(2, 16, 6), (4, 96, 20), (8, 640, 72)] {
            let x = xstar(q, 1);
            assert_eq!(x.n(), n);
            assert!((0..n).all(|v| x.graph().degree(v) == k));
            assert_eq!(x.fibers().len(), q + 2);
        }
    }

    #[test]
    fn q2_adjacency_symmetric_irreflexive_exhaustive() {
        let x = xstar(2, 0);
        let m = x.graph().adjacency();
        for a in 0..16 {
            assert!(!m.get(a, a));
            for b in 0..16 {
                assert_eq!(m.get(a, b), m.get(b, a));
            }
        }
    }

    #[test]
    fn no_edges_inside_fibers_and_one_line_per_class() {
        let x = xstar(4, 3);
        let fibers = x.fibers();
        for v in 0..x.n() {
            let (p, i) = x.split(v);
            for u in x.graph().neighbors(v) {
                assert_ne!(fibers.fiber_of(u), i);
            }
            for j in (0..6).filter(|&j| j != i) {
                let nb: Vec<usize> = x.graph().neighbors(v).filter(|&u| fibers.fiber_of(u) == j).collect();
                assert_eq!(nb.len(), 4);
                let c = x.classes().get(i, j);
                let line = x.plane().line_through(c, x.split(nb[0]).0);
                assert!(nb.iter().all(|&u| x.plane().line_through(c, x.split(u).0) == line));
                // identity σ: the neighbour line is the line through p
                assert_eq!(line, x.plane().line_through(c, p));
            }
        }
    }

    #[test]
    fn hyperoval_cliques_q4() {
        let x = xstar(4, 2);
        for a in 0..4u8 {
            for v in 0..16 {
                let k = x.hyperoval_clique(a, v).unwrap();
                assert_eq!(k.len(), 6);
                for s in 0..6 {
                    for t in s + 1..6 {
                        assert!(x.graph().has_edge(k[s], k[t]));
                    }
                }
            }
        }
    }

    #[test]
    fn local_structure_q4_exhaustive() {
        let x = xstar(4, 1);
        let fibers = x.fibers();
        for a in 0..x.n() {
            for b in a + 1..x.n() {
                let nb = x.common_neighbors(a, b).unwrap();
                let (fa, fb) = (fibers.fiber_of(a), fibers.fiber_of(b));
                let mut per = [0usize; 6];
                for &c in &nb {
                    per[fibers.fiber_of(c)] += 1;
                }
                if fa != fb {
                    for (l, &k) in per.iter().enumerate() {
                        let expect = usize::from(l != fa && l != fb);
                        assert_eq!(k, expect);
                    }
                } else {
                    assert!(!x.graph().has_edge(a, b));
                    assert_eq!(per.iter().filter(|&&k| k > 0).count(), 1);
                    assert_eq!(nb.len(), 4);
                }
            }
        }
    }

    #[test]
    fn adjacent_pair_q8_has_q_common_neighbours() {
        let x = xstar(8, 0);
        let (a, b) = x.graph().edges().next().unwrap();
        assert_eq!(x.common_neighbor_count(a, b).unwrap(), 8);
        assert!(x.common_neighbors(a, a).is_err());
    }

    #[test]
    fn rejects_invalid_sigma() {
        let p = AffinePlane::with_order(4).unwrap();
        let h = find_affine_hyperoval(&p, 0).unwrap();
        let l = class_array_from_hyperoval(&p, &h).unwrap();
        assert!(build_fdf_graph(&p, &l, &SigmaSet::identity(4, 5)).is_err());
    }
}
