//! m-dimensional Weisfeiler-Leman on materialised tuple colourings.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use super::refine::{color_key, dense_ranks, mix64, mix64b};
use super::CoherentConfiguration;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Stable colouring of `Ω^m`. Tuple `(x_1..x_m)` lives at index
/// `x_1·n^(m-1) + … + x_m`.
#[derive(Clone, Debug)]
pub struct MaryPartition {
    pub m: usize,
    pub n: usize,
    pub colors: Vec<u32>,
    pub num_classes: usize,
    pub rounds: usize,
}

/// Atomic type: equality and adjacency pattern over all position pairs.
fn atomic_type(g: &Graph, x: &[usize]) -> u64 {
    let m = x.len();
    let mut t = 0u64;
    for i in 0..m {
        for j in 0..m {
            let bit = 2 * (i * m + j);
            if x[i] == x[j] {
                t |= 1 << bit;
            } else if g.has_edge(x[i], x[j]) {
                t |= 1 << (bit + 1);
            }
        }
    }
    t
}

/// Atomic type of `x^σ` read off the atomic type of `x`.
fn pull_back(t: u64, m: usize, sigma: &[usize]) -> u64 {
    let mut out = 0u64;
    for i in 0..m {
        for j in 0..m {
            let src = 2 * (sigma[i] * m + sigma[j]);
            let dst = 2 * (i * m + j);
            out |= ((t >> src) & 3) << dst;
        }
    }
    out
}

/// All maps M → M, as image tuples in lexicographic order.
fn monoid(m: usize) -> Vec<Vec<usize>> {
    let total = m.pow(m as u32);
    (0..total)
        .map(|mut k| {
            let mut s = vec![0; m];
            for i in (0..m).rev() {
                s[i] = k % m;
                k /= m;
            }
            s
        })
        .collect()
}

fn decode(mut idx: usize, n: usize, m: usize, out: &mut [usize]) {
    for i in (0..m).rev() {
        out[i] = idx % n;
        idx /= n;
    }
}

pub fn m_wl(g: &Graph, m: usize, tuple_cap: u128) -> Result<MaryPartition> {
    if !(2..=5).contains(&m) {
        return Err(Error::Invalid(format!("m={m} outside 2..=5")));
    }
    let n = g.n();
    let tuples = (n as u128).pow(m as u32);
    if tuples > tuple_cap {
        return Err(Error::TupleCap { tuples, cap: tuple_cap });
    }
    let total = tuples as usize;
    let mon = monoid(m);
    let mut initial_cache: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut keys: Vec<Vec<u64>> = Vec::with_capacity(total);
    let mut x = vec![0usize; m];
    for idx in 0..total {
        decode(idx, n, m, &mut x);
        let t = atomic_type(g, &x);
        let key = initial_cache
            .entry(t)
            .or_insert_with(|| mon.iter().map(|s| pull_back(t, m, s)).collect())
            .clone();
        keys.push(key);
    }
    let mut colors = dense_ranks(&keys);
    drop(keys);

    let pw: Vec<usize> = (0..m).map(|i| n.pow((m - 1 - i) as u32)).collect();
    let mut rounds = 0;
    loop {
        let before = colors.iter().copied().max().map_or(0, |v| v as usize + 1);
        let sigs: Vec<(u32, u64, u64)> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut x = vec![0usize; m];
                decode(idx, n, m, &mut x);
                let mut h1 = 0u64;
                let mut h2 = 0u64;
                for a in 0..n {
                    let mut t = 0u64;
                    for i in 0..m {
                        let j = idx - x[i] * pw[i] + a * pw[i];
                        t = mix64(t ^ color_key(colors[j], 100 + i as u64));
                    }
                    h1 = h1.wrapping_add(mix64b(t));
                    h2 = h2.wrapping_add(mix64(t.rotate_left(31) ^ 0x5851_f42d_4c95_7f2d));
                }
                (colors[idx], h1, h2)
            })
            .collect();
        colors = dense_ranks(&sigs);
        rounds += 1;
        let after = colors.iter().copied().max().map_or(0, |v| v as usize + 1);
        if after == before {
            return Ok(MaryPartition { m, n, colors, num_classes: after, rounds });
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NkAudit {
    pub ok: bool,
    pub checked_classes: usize,
    pub witness: Option<String>,
}

impl MaryPartition {
    /// `pr₂`: the sets `{(x_1,x_2) : x ∈ Λ}` as basis relations.
    pub fn pr2(&self) -> Result<CoherentConfiguration> {
        let (n, m) = (self.n, self.m);
        let stride = n.pow((m - 2) as u32);
        let mut proj: Vec<Vec<u32>> = vec![Vec::new(); self.num_classes];
        for (idx, &c) in self.colors.iter().enumerate() {
            proj[c as usize].push((idx / stride) as u32);
        }
        let mut ids: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
        let mut order = Vec::new();
        for p in proj.iter_mut() {
            p.sort_unstable();
            p.dedup();
            if !ids.contains_key(p) {
                ids.insert(p.clone(), order.len() as u32);
                order.push(p.clone());
            }
        }
        let mut colors = vec![u32::MAX; n * n];
        for (id, set) in order.iter().enumerate() {
            for &pair in set {
                if colors[pair as usize] != u32::MAX {
                    return Err(Error::Invalid(format!(
                        "projections overlap at pair ({}, {})",
                        pair as usize / n,
                        pair as usize % n
                    )));
                }
                colors[pair as usize] = id as u32;
            }
        }
        Ok(CoherentConfiguration::from_colors(n, colors))
    }

    /// Checks that `n_k(Λ)` is constant on every class for every `k <= m`.
    pub fn n_k_audit(&self) -> NkAudit {
        let (n, m) = (self.n, self.m);
        for k in 1..=m {
            let stride = n.pow((m - k) as u32);
            let mut counts: HashMap<(u32, usize), usize> = HashMap::new();
            for (idx, &c) in self.colors.iter().enumerate() {
                *counts.entry((c, idx / stride)).or_default() += 1;
            }
            let mut per_class: Vec<Option<usize>> = vec![None; self.num_classes];
            for (&(c, prefix), &v) in &counts {
                match per_class[c as usize] {
                    None => per_class[c as usize] = Some(v),
                    Some(w) if w != v => {
                        return NkAudit {
                            ok: false,
                            checked_classes: self.num_classes,
                            witness: Some(format!("n_{k} varies on class {c} (prefix {prefix}: {v} vs {w})")),
                        }
                    }
                    _ => {}
                }
            }
        }
        NkAudit { ok: true, checked_classes: self.num_classes, witness: None }
    }
}
