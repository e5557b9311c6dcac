//! Coherent configurations and the coherent closure `WL(r, s, …, 1_α, …)`.
//!
//! A configuration is stored as an `n×n` matrix of dense basis-relation ids.
//! Closures are computed by 2-dimensional colour refinement: the colour of
//! `(α,β)` is replaced by `(old colour, {{(c(α,γ), c(γ,β)) : γ ∈ Ω}})` until
//! the number of colours stops growing.
//!
//! Two refinement paths exist. [`coherent_closure_reference`] keeps the
//! exact sorted multisets and is O(rounds·n³ log n). The default path hashes
//! the multisets to 128 bits and, before touching pairs at all, runs vertex
//! refinement on the same input: the diagonal of the closure always refines
//! the stable vertex colouring, so a discrete vertex colouring already
//! proves the closure is the discrete configuration `D_Ω`.

mod base;
mod mwl;
mod refine;
mod vertex;

pub use base::{base_number, BaseNumber};
pub use mwl::{m_wl, MaryPartition};
pub use vertex::{vertex_refinement, TypedAdjacency, VertexColoring};

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::relation::Relation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherentConfiguration {
    n: usize,
    colors: Vec<u32>,
    rank: usize,
    sizes: Vec<usize>,
    diagonal: Vec<bool>,
    transpose: Vec<Option<u32>>,
    fibers: Vec<Vec<usize>>,
}

impl CoherentConfiguration {
    /// Wraps an `n×n` colouring. Colour values are renumbered densely,
    /// preserving their order.
    pub fn from_colors(n: usize, mut colors: Vec<u32>) -> Self {
        assert_eq!(colors.len(), n * n, "colour matrix must be n×n");
        let mut distinct: Vec<u32> = colors.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.last().is_some_and(|&m| m as usize + 1 != distinct.len()) {
            let map: HashMap<u32, u32> =
                distinct.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect();
            for c in colors.iter_mut() {
                *c = map[c];
            }
        }
        let rank = distinct.len();
        let mut sizes = vec![0usize; rank];
        let mut diag_hits = vec![0usize; rank];
        let mut transpose: Vec<Option<Option<u32>>> = vec![None; rank];
        for a in 0..n {
            for b in 0..n {
                let c = colors[a * n + b] as usize;
                sizes[c] += 1;
                if a == b {
                    diag_hits[c] += 1;
                }
                let t = colors[b * n + a];
                transpose[c] = match transpose[c] {
                    None => Some(Some(t)),
                    Some(Some(prev)) if prev == t => Some(Some(t)),
                    _ => Some(None),
                };
            }
        }
        let diagonal: Vec<bool> = (0..rank).map(|c| diag_hits[c] == sizes[c]).collect();
        let mut by_color: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for a in 0..n {
            by_color.entry(colors[a * n + a]).or_default().push(a);
        }
        CoherentConfiguration {
            n,
            colors,
            rank,
            sizes,
            diagonal,
            transpose: transpose.into_iter().map(|t| t.flatten()).collect(),
            fibers: by_color.into_values().collect(),
        }
    }

    /// The configuration whose basis relations are all singletons.
    pub fn discrete(n: usize) -> Self {
        CoherentConfiguration::from_colors(n, (0..(n * n) as u32).collect())
    }

    /// `{1_Ω, Ω² \ 1_Ω}`
    pub fn trivial(n: usize) -> Self {
        let colors = (0..n * n).map(|i| u32::from(i / n != i % n)).collect();
        CoherentConfiguration::from_colors(n, colors)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    #[inline]
    pub fn color(&self, a: usize, b: usize) -> u32 {
        self.colors[a * self.n + b]
    }

    pub fn size(&self, c: u32) -> usize {
        self.sizes[c as usize]
    }

    pub fn is_reflexive(&self, c: u32) -> bool {
        self.diagonal[c as usize]
    }

    pub fn transpose_of(&self, c: u32) -> Option<u32> {
        self.transpose[c as usize]
    }

    pub fn fibers(&self) -> &[Vec<usize>] {
        &self.fibers
    }

    pub fn is_discrete(&self) -> bool {
        self.fibers.len() == self.n
    }

    pub fn basis_relation(&self, c: u32) -> Relation {
        let n = self.n;
        Relation::from_pairs(
            n,
            (0..n * n).filter(|&i| self.colors[i] == c).map(|i| (i / n, i % n)),
        )
        .expect("in range")
    }

    pub fn basis_relations(&self) -> Vec<Relation> {
        (0..self.rank as u32).map(|c| self.basis_relation(c)).collect()
    }

    /// `|αs|` for the basis relation `s`, taken at the first point where it
    /// is nonzero.
    pub fn valency(&self, c: u32) -> usize {
        let n = self.n;
        (0..n)
            .map(|a| (0..n).filter(|&b| self.color(a, b) == c).count())
            .find(|&k| k > 0)
            .unwrap_or(0)
    }

    /// True when `rel` is a union of basis relations.
    pub fn contains_relation(&self, rel: &Relation) -> bool {
        let mut state: Vec<Option<bool>> = vec![None; self.rank];
        for a in 0..self.n {
            for b in 0..self.n {
                let c = self.color(a, b) as usize;
                let inside = rel.contains(a, b);
                match state[c] {
                    None => state[c] = Some(inside),
                    Some(s) if s != inside => return false,
                    _ => {}
                }
            }
        }
        true
    }

    /// True when `set` (as a membership mask) is a union of fibers.
    pub fn is_homogeneity_set(&self, set: &[bool]) -> bool {
        self.fibers.iter().all(|f| f.iter().all(|&a| set[a] == set[f[0]]))
    }

    /// `self ≤ other`: every basis relation of `self` is a union of basis
    /// relations of `other`.
    pub fn is_coarser_or_equal(&self, other: &CoherentConfiguration) -> bool {
        if self.n != other.n {
            return false;
        }
        let mut map: Vec<Option<u32>> = vec![None; other.rank];
        for (i, &oc) in other.colors.iter().enumerate() {
            let sc = self.colors[i];
            match map[oc as usize] {
                None => map[oc as usize] = Some(sc),
                Some(prev) if prev != sc => return false,
                _ => {}
            }
        }
        true
    }

    pub fn same_partition(&self, other: &CoherentConfiguration) -> bool {
        self.rank == other.rank && self.is_coarser_or_equal(other) && other.is_coarser_or_equal(self)
    }

    /// The configuration with points renamed by `perm` (point `a` becomes
    /// `perm[a]`), keeping colour ids.
    pub fn relabel(&self, perm: &[usize]) -> CoherentConfiguration {
        let n = self.n;
        let mut colors = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                colors[perm[a] * n + perm[b]] = self.color(a, b);
            }
        }
        CoherentConfiguration::from_colors(n, colors)
    }

    fn structure_vector(&self, a: usize, b: usize, scratch: &mut Vec<u64>) {
        let n = self.n;
        scratch.clear();
        for g in 0..n {
            scratch.push((self.color(a, g) as u64) << 32 | self.color(g, b) as u64);
        }
        scratch.sort_unstable();
    }

    /// `c_{rs}^t = |αr ∩ βs*|`, computed at up to `checks` representatives
    /// of `t` and required to agree.
    pub fn intersection_number(&self, r: u32, s: u32, t: u32, checks: usize) -> Result<usize> {
        if t as usize >= self.rank || self.sizes[t as usize] == 0 {
            return Err(Error::EmptyRelation(t));
        }
        let n = self.n;
        let mut value = None;
        for (a, b) in (0..n * n)
            .filter(|&i| self.colors[i] == t)
            .map(|i| (i / n, i % n))
            .take(checks.max(1))
        {
            let v = (0..n).filter(|&g| self.color(a, g) == r && self.color(g, b) == s).count();
            match value {
                None => value = Some(v),
                Some(w) if w != v => {
                    return Err(Error::Invalid(format!(
                        "c_({r},{s})^{t} is not constant: {w} vs {v} at ({a},{b})"
                    )))
                }
                _ => {}
            }
        }
        Ok(value.unwrap())
    }

    /// Checks C1, C2 and C3. C3 is checked on every pair of every basis
    /// relation when `n <= 100`, otherwise on up to 64 pairs per relation.
    pub fn audit(&self) -> AxiomAudit {
        self.audit_with(if self.n <= 100 { usize::MAX } else { 64 })
    }

    pub fn audit_with(&self, pairs_per_relation: usize) -> AxiomAudit {
        let n = self.n;
        let mut report = AxiomAudit { c1: true, c2: true, c3: true, witness: None };
        for c in 0..self.rank {
            let has_diag = (0..n).any(|a| self.colors[a * n + a] as usize == c);
            if has_diag && !self.diagonal[c] {
                report.c1 = false;
                report.witness.get_or_insert(format!("C1: colour {c} mixes diagonal and off-diagonal pairs"));
            }
            if self.transpose[c].is_none() {
                report.c2 = false;
                report.witness.get_or_insert(format!("C2: transpose of colour {c} is not a colour"));
            }
        }
        let mut reference: Vec<Option<Vec<u64>>> = vec![None; self.rank];
        let mut seen = vec![0usize; self.rank];
        let mut scratch = Vec::with_capacity(n);
        'pairs: for a in 0..n {
            for b in 0..n {
                let t = self.color(a, b) as usize;
                if seen[t] >= pairs_per_relation {
                    continue;
                }
                seen[t] += 1;
                self.structure_vector(a, b, &mut scratch);
                match &reference[t] {
                    None => reference[t] = Some(scratch.clone()),
                    Some(r) if *r != scratch => {
                        report.c3 = false;
                        report.witness.get_or_insert(format!(
                            "C3: intersection numbers differ within colour {t} at ({a},{b})"
                        ));
                        break 'pairs;
                    }
                    _ => {}
                }
            }
        }
        report
    }

    /// `{α : |αs| <= d}` is a homogeneity set, checked for every basis
    /// relation `s` and every `d` in `0..=n`.
    pub fn check_valency_sets(&self) -> bool {
        let n = self.n;
        let mut val = vec![0usize; self.rank * n];
        for a in 0..n {
            for b in 0..n {
                val[self.color(a, b) as usize * n + a] += 1;
            }
        }
        (0..self.rank).all(|s| {
            let row = &val[s * n..(s + 1) * n];
            let mut levels: Vec<usize> = row.to_vec();
            levels.sort_unstable();
            levels.dedup();
            levels.iter().all(|&d| {
                let set: Vec<bool> = row.iter().map(|&v| v <= d).collect();
                self.is_homogeneity_set(&set)
            })
        })
    }

    pub fn header(&self) -> ConfigurationHeader {
        ConfigurationHeader { n: self.n, rank: self.rank, fibers: self.fibers.clone() }
    }

    /// JSON header line followed by `n` rows of space-separated colour ids.
    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string(&self.header()).expect("serialisable");
        s.push('\n');
        for a in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|b| self.color(a, b).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigurationHeader {
    pub n: usize,
    pub rank: usize,
    pub fibers: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomAudit {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub witness: Option<String>,
}

impl AxiomAudit {
    pub fn is_coherent(&self) -> bool {
        self.c1 && self.c2 && self.c3
    }
}

#[derive(Clone, Debug)]
pub struct ClosureOptions {
    /// Largest `n` for which full pair refinement is attempted.
    pub max_full_n: usize,
    /// Worker threads for pair refinement; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Try vertex refinement first and stop there if it is discrete.
    pub vertex_shortcut: bool,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions { max_full_n: 5000, threads: None, vertex_shortcut: true }
    }
}

const MAX_RELATIONS: usize = 24;

/// Initial pair keys: diagonal flag, membership of `(a,b)` and `(b,a)` in
/// every relation, and the 1-based individualisation mark on the diagonal.
fn initial_keys(n: usize, relations: &[Relation], individualized: &[usize]) -> Result<Vec<u64>> {
    if relations.len() > MAX_RELATIONS {
        return Err(Error::Invalid(format!("at most {MAX_RELATIONS} input relations")));
    }
    for r in relations {
        if r.n() != n {
            return Err(Error::Domain { expected: n, got: r.n() });
        }
    }
    let marks = individualization_marks(n, individualized)?;
    let mut keys = vec![0u64; n * n];
    for a in 0..n {
        keys[a * n + a] = 1 | (marks[a] as u64) << 49;
    }
    for (ri, r) in relations.iter().enumerate() {
        for (a, b) in r.pairs() {
            keys[a * n + b] |= 1 << (1 + 2 * ri);
            keys[b * n + a] |= 1 << (2 + 2 * ri);
        }
    }
    Ok(keys)
}

fn individualization_marks(n: usize, individualized: &[usize]) -> Result<Vec<u32>> {
    let mut marks = vec![0u32; n];
    for (i, &a) in individualized.iter().enumerate() {
        if a >= n {
            return Err(Error::Domain { expected: n, got: a + 1 });
        }
        if marks[a] == 0 {
            marks[a] = i as u32 + 1;
        }
    }
    Ok(marks)
}

/// Relation-membership adjacency for vertex refinement. Only pairs that lie
/// in at least one input relation are listed; everything else has type 0.
pub(crate) fn typed_adjacency_from_relations(
    n: usize,
    relations: &[Relation],
    individualized: &[usize],
) -> Result<(TypedAdjacency, Vec<u64>)> {
    let marks = individualization_marks(n, individualized)?;
    let mut diag = vec![0u64; n];
    let mut lists: Vec<Vec<(u32, u64)>> = vec![Vec::new(); n];
    for (ri, r) in relations.iter().enumerate() {
        if r.n() != n {
            return Err(Error::Domain { expected: n, got: r.n() });
        }
        let out_bit = 1u64 << (2 * ri);
        let in_bit = 1u64 << (2 * ri + 1);
        for a in 0..n {
            for b in r.successors(a) {
                if a == b {
                    diag[a] |= out_bit;
                } else if r.is_symmetric() {
                    lists[a].push((b as u32, out_bit | in_bit));
                } else {
                    lists[a].push((b as u32, out_bit));
                    lists[b].push((a as u32, in_bit));
                }
            }
        }
    }
    for (a, d) in diag.iter_mut().enumerate() {
        *d |= (marks[a] as u64) << 48;
    }
    Ok((TypedAdjacency::from_lists(lists), diag))
}

/// Stable vertex colouring of `(relations…, 1_α…)`. The fibers of the
/// coherent closure refine it, so any union of its cells is a homogeneity
/// set of the closure.
pub fn vertex_coloring(n: usize, relations: &[Relation], individualized: &[usize]) -> Result<VertexColoring> {
    let (adj, diag) = typed_adjacency_from_relations(n, relations, individualized)?;
    Ok(vertex_refinement(&adj, &diag))
}

/// `WL(relations…, 1_α…)` with default options.
pub fn coherent_closure(n: usize, relations: &[Relation], individualized: &[usize]) -> Result<CoherentConfiguration> {
    coherent_closure_with(n, relations, individualized, &ClosureOptions::default())
}

pub fn coherent_closure_with(
    n: usize,
    relations: &[Relation],
    individualized: &[usize],
    opts: &ClosureOptions,
) -> Result<CoherentConfiguration> {
    let seed = if opts.vertex_shortcut {
        let (adj, diag) = typed_adjacency_from_relations(n, relations, individualized)?;
        let vc = vertex_refinement(&adj, &diag);
        if vc.is_discrete() {
            return Ok(discrete_from_vertex_colors(&vc));
        }
        Some(vc)
    } else {
        None
    };
    if n > opts.max_full_n {
        return Err(Error::Budget(format!(
            "full pair refinement needs n <= {}, got n = {n}",
            opts.max_full_n
        )));
    }
    let mut keys = initial_keys(n, relations, individualized)?;
    if let Some(vc) = &seed {
        seed_with_vertex_colors(n, &mut keys, vc);
    }
    let colors = run_pair_refinement(n, keys, opts)?;
    Ok(CoherentConfiguration::from_colors(n, colors))
}

/// The extension `X_{α1..αb}` of an existing configuration.
pub fn extension(cc: &CoherentConfiguration, points: &[usize]) -> Result<CoherentConfiguration> {
    extension_with(cc, points, &ClosureOptions::default())
}

pub fn extension_with(
    cc: &CoherentConfiguration,
    points: &[usize],
    opts: &ClosureOptions,
) -> Result<CoherentConfiguration> {
    let n = cc.n();
    let marks = individualization_marks(n, points)?;
    let seed = if opts.vertex_shortcut {
        let lists: Vec<Vec<(u32, u64)>> = (0..n)
            .map(|a| {
                (0..n)
                    .filter(|&b| b != a)
                    .map(|b| (b as u32, 1 + ((cc.color(a, b) as u64) << 32 | cc.color(b, a) as u64)))
                    .collect()
            })
            .collect();
        let diag: Vec<u64> = (0..n).map(|a| (cc.color(a, a) as u64) << 20 | marks[a] as u64).collect();
        let vc = vertex_refinement(&TypedAdjacency::from_lists(lists), &diag);
        if vc.is_discrete() {
            return Ok(discrete_from_vertex_colors(&vc));
        }
        Some(vc)
    } else {
        None
    };
    if n > opts.max_full_n {
        return Err(Error::Budget(format!("full pair refinement needs n <= {}", opts.max_full_n)));
    }
    let mut keys: Vec<u64> = (0..n * n)
        .map(|i| {
            let (a, b) = (i / n, i % n);
            let mark = if a == b { marks[a] as u64 } else { 0 };
            (cc.colors()[i] as u64) << 20 | mark
        })
        .collect();
    if let Some(vc) = &seed {
        seed_with_vertex_colors(n, &mut keys, vc);
    }
    let colors = run_pair_refinement(n, keys, opts)?;
    Ok(CoherentConfiguration::from_colors(n, colors))
}

fn run_pair_refinement(n: usize, keys: Vec<u64>, opts: &ClosureOptions) -> Result<Vec<u32>> {
    let colors = refine::dense_ranks(&keys);
    match opts.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Invalid(e.to_string()))?;
            Ok(pool.install(|| refine::refine_hashed(n, colors)))
        }
        None => Ok(refine::refine_hashed(n, colors)),
    }
}

fn seed_with_vertex_colors(n: usize, keys: &mut [u64], vc: &VertexColoring) {
    // compress (key, c(a), c(b)) back into a single rank space
    let triples: Vec<(u64, u32, u32)> = (0..n * n)
        .map(|i| (keys[i], vc.colors[i / n], vc.colors[i % n]))
        .collect();
    let ranks = refine::dense_ranks(&triples);
    for (k, r) in keys.iter_mut().zip(ranks) {
        *k = r as u64;
    }
}

fn discrete_from_vertex_colors(vc: &VertexColoring) -> CoherentConfiguration {
    let n = vc.colors.len();
    let colors = (0..n * n)
        .map(|i| vc.colors[i / n] * n as u32 + vc.colors[i % n])
        .collect();
    CoherentConfiguration::from_colors(n, colors)
}

/// Exact closure with sorted multiset signatures and no shortcuts.
pub fn coherent_closure_reference(
    n: usize,
    relations: &[Relation],
    individualized: &[usize],
) -> Result<CoherentConfiguration> {
    let keys = initial_keys(n, relations, individualized)?;
    let colors = refine::refine_exact(n, refine::dense_ranks(&keys));
    Ok(CoherentConfiguration::from_colors(n, colors))
}
