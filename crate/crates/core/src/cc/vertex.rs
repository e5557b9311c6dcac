//! Vertex colour refinement over pair-typed adjacency.
//!
//! Each vertex carries a list of `(neighbour, type)` entries with nonzero
//! type; all other pairs share type 0. The new colour of `v` is its old
//! colour together with the multiset `{{(type(v,u), c(u))}}`. Since the
//! class sizes are global, the type-0 part of the multiset is implied.

use rayon::prelude::*;

use super::refine::{color_key, dense_ranks, mix64, mix64b};

/// CSR adjacency with 64-bit pair types.
#[derive(Clone, Debug)]
pub struct TypedAdjacency {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    types: Vec<u64>,
}

impl TypedAdjacency {
    /// Duplicate targets in a list are merged by OR-ing their types.
    pub fn from_lists(lists: Vec<Vec<(u32, u64)>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut targets = Vec::new();
        let mut types = Vec::new();
        offsets.push(0);
        for mut l in lists {
            l.sort_unstable_by_key(|e| e.0);
            let mut i = 0;
            while i < l.len() {
                let (t, mut ty) = l[i];
                i += 1;
                while i < l.len() && l[i].0 == t {
                    ty |= l[i].1;
                    i += 1;
                }
                targets.push(t);
                types.push(ty);
            }
            offsets.push(targets.len());
        }
        TypedAdjacency { offsets, targets, types }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn entries(&self, v: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()].iter().zip(&self.types[r]).map(|(&t, &ty)| (t as usize, ty))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexColoring {
    /// Dense colour per vertex, canonical under relabelling.
    pub colors: Vec<u32>,
    pub num_colors: usize,
    pub rounds: usize,
    /// Order-independent fingerprint of every round's signature set; equal
    /// for isomorphic inputs.
    pub trace: u64,
}

impl VertexColoring {
    pub fn is_discrete(&self) -> bool {
        self.num_colors == self.colors.len()
    }

    /// Vertices grouped by colour, in colour order.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.num_colors];
        for (v, &c) in self.colors.iter().enumerate() {
            cells[c as usize].push(v);
        }
        cells
    }

    /// True when `set` is a union of colour classes.
    pub fn is_union_of_cells(&self, set: &[bool]) -> bool {
        let mut state: Vec<Option<bool>> = vec![None; self.num_colors];
        for (v, &c) in self.colors.iter().enumerate() {
            match state[c as usize] {
                None => state[c as usize] = Some(set[v]),
                Some(s) if s != set[v] => return false,
                _ => {}
            }
        }
        true
    }
}

#[inline]
fn type_key(ty: u64) -> u64 {
    mix64b(ty ^ 0x6a09_e667_f3bc_c908)
}

/// Refines `initial` (one key per vertex) to the stable colouring.
pub fn vertex_refinement(adj: &TypedAdjacency, initial: &[u64]) -> VertexColoring {
    refine_from(adj, dense_ranks(initial))
}

pub(crate) fn refine_from(adj: &TypedAdjacency, mut colors: Vec<u32>) -> VertexColoring {
    let n = adj.n();
    let mut rounds = 0;
    let mut trace = 0u64;
    loop {
        let before = colors.iter().copied().max().map_or(0, |m| m as usize + 1);
        let sigs: Vec<(u32, u64, u64)> = (0..n)
            .into_par_iter()
            .map(|v| {
                let mut h1 = 0u64;
                let mut h2 = 0u64;
                for (u, ty) in adj.entries(v) {
                    let ck = color_key(colors[u], 3);
                    let tk = type_key(ty);
                    h1 = h1.wrapping_add(mix64(ck ^ tk));
                    h2 = h2.wrapping_add(mix64b(ck.wrapping_add(tk.rotate_left(17))));
                }
                (colors[v], h1, h2)
            })
            .collect();
        let next = dense_ranks(&sigs);
        let after = next.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut distinct = sigs.clone();
        distinct.sort_unstable();
        distinct.dedup();
        for (i, s) in distinct.iter().enumerate() {
            trace = trace
                .wrapping_mul(0x100_0000_01b3)
                .wrapping_add(color_key(i as u32, s.1 ^ s.2.rotate_left(7)) ^ s.0 as u64);
        }
        colors = next;
        rounds += 1;
        if after == before {
            return VertexColoring { colors, num_colors: after, rounds, trace };
        }
    }
}
