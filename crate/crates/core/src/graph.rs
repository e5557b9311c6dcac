//! Simple undirected graphs with dense bit-row adjacency.

use rand::Rng;

use crate::error::{Error, Result};
use crate::relation::{BitIter, BitMatrix, Relation};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    adj: BitMatrix,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { adj: BitMatrix::new(n) }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Domain { expected: n, got: u.max(v) + 1 });
            }
            if u == v {
                return Err(Error::Invalid(format!("loop at vertex {u}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            g.add_edge(u, (u + 1) % n);
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 1..n {
            g.add_edge(u - 1, u);
        }
        g
    }

    /// Erdős–Rényi G(n, p).
    pub fn random<R: Rng>(n: usize, p: f64, rng: &mut R) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.adj.n()
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adj
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u, v)
    }

    #[inline]
    pub fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v);
        self.adj.set(u, v);
        self.adj.set(v, u);
    }

    #[inline]
    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.adj.unset(u, v);
        self.adj.unset(v, u);
    }

    pub fn neighbors(&self, u: usize) -> BitIter<'_> {
        self.adj.iter_row(u)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj.row_count(u)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.count_ones() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// `N_X(α,β)`, the common neighbours of two distinct vertices.
    pub fn common_neighbors(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        if a == b {
            return Err(Error::SamePair(a));
        }
        let mut out = Vec::new();
        self.adj.and_into(a, b, &mut out);
        Ok(out)
    }

    /// `n_X(α,β)`
    pub fn common_neighbor_count(&self, a: usize, b: usize) -> Result<usize> {
        if a == b {
            return Err(Error::SamePair(a));
        }
        Ok(self.adj.and_count(a, b))
    }

    /// Number of edges inside a vertex set.
    pub fn edges_within(&self, set: &[usize]) -> usize {
        let mut c = 0;
        for (i, &u) in set.iter().enumerate() {
            for &v in &set[i + 1..] {
                if self.has_edge(u, v) {
                    c += 1;
                }
            }
        }
        c
    }

    pub fn edge_relation(&self) -> Relation {
        Relation::from_matrix(self.adj.clone())
    }

    /// The graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n() {
            return Err(Error::OrderMismatch(self.n(), perm.len()));
        }
        Graph::from_edges(self.n(), self.edges().map(|(u, v)| (perm[u], perm[v])))
    }
}
