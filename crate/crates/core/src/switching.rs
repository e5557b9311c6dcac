//! Elementary and path switchings between fibers.

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdf::FdfGraph;
use crate::relation::Relation;

/// A path switching: fiber sequence `Δ_1..Δ_{q+2}` (0-based fiber indices)
/// and one full cycle on the `q` lines per consecutive pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchSpec {
    pub fibers: Vec<usize>,
    pub cycles: Vec<Vec<u16>>,
    pub seed: Option<u64>,
}

impl SwitchSpec {
    pub fn validate(&self, q: usize) -> Result<()> {
        let mut seen = vec![false; q + 2];
        if self.fibers.len() != q + 2 {
            return Err(Error::Switch(format!("expected {} fibers, got {}", q + 2, self.fibers.len())));
        }
        for &f in &self.fibers {
            if f >= q + 2 || seen[f] {
                return Err(Error::Switch(format!("fiber sequence is not a permutation of 0..{}", q + 2)));
            }
            seen[f] = true;
        }
        if self.cycles.len() != q + 1 {
            return Err(Error::Switch(format!("expected {} cycles, got {}", q + 1, self.cycles.len())));
        }
        for (t, c) in self.cycles.iter().enumerate() {
            if !is_full_cycle(c, q) {
                return Err(Error::Switch(format!("cycle {t} is not a full cycle on {q} lines")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s.trim())?)
    }

    /// Consecutive fiber pairs `(Δ_t, Δ_{t+1})`.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize, &[u16])> + '_ {
        self.fibers.windows(2).zip(&self.cycles).map(|(w, c)| (w[0], w[1], c.as_slice()))
    }
}

/// True iff `f` is a single cycle through all of `0..q`.
pub fn is_full_cycle(f: &[u16], q: usize) -> bool {
    if f.len() != q || !crate::plane::is_permutation(f, q) {
        return false;
    }
    let mut x = 0usize;
    for step in 1..=q {
        x = f[x] as usize;
        if x == 0 {
            return step == q;
        }
    }
    false
}

/// Switches the edges between fibers `i` and `j` along the full cycle `f`.
pub fn elementary_switch(x: &FdfGraph, i: usize, j: usize, f: &[u16]) -> Result<FdfGraph> {
    let mut y = x.clone();
    switch_in_place(&mut y, i, j, f)?;
    Ok(y)
}

fn switch_in_place(x: &mut FdfGraph, i: usize, j: usize, f: &[u16]) -> Result<()> {
    let q = x.q();
    if i == j {
        return Err(Error::SamePair(i));
    }
    if i >= q + 2 || j >= q + 2 {
        return Err(Error::Switch(format!("fiber index out of range 0..{}", q + 2)));
    }
    if !is_full_cycle(f, q) {
        return Err(Error::Switch("permutation is not a full cycle".into()));
    }
    x.rewrite_pair(i, j, f)
}

pub fn path_switch(xstar: &FdfGraph, spec: &SwitchSpec) -> Result<FdfGraph> {
    if xstar.hyperoval().is_none() || !xstar.provenance().switches.is_empty() || !xstar.sigma().is_identity() {
        return Err(Error::Switch("path switching starts from an unswitched hyperoval graph".into()));
    }
    spec.validate(xstar.q())?;
    let mut x = xstar.clone();
    for (a, b, f) in spec.steps() {
        switch_in_place(&mut x, a, b, f)?;
    }
    x.set_path(spec.clone());
    Ok(x)
}

/// Uniform full cycle on `0..q` (Sattolo's algorithm).
pub fn sample_full_cycle<R: Rng>(q: usize, rng: &mut R) -> Vec<u16> {
    let mut p: Vec<u16> = (0..q as u16).collect();
    for i in (1..q).rev() {
        let j = rng.gen_range(0..i);
        p.swap(i, j);
    }
    p
}

pub fn sample_switch_spec(q: usize, seed: u64) -> SwitchSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fibers: Vec<usize> = (0..q + 2).collect();
    fibers.shuffle(&mut rng);
    let cycles = (0..q + 1).map(|_| sample_full_cycle(q, &mut rng)).collect();
    SwitchSpec { fibers, cycles, seed: Some(seed) }
}

/// `(q+2)! · (q−1)!^{q+1}`.
pub fn switch_space_size(q: usize) -> BigUint {
    let fact = |m: usize| (1..=m).fold(BigUint::from(1u32), |acc, t| acc * BigUint::from(t));
    fact(q + 2) * fact(q.saturating_sub(1)).pow((q + 1) as u32)
}

/// Every switch spec for order `q`, in lexicographic order.
pub fn enumerate_switch_specs(q: usize, limit: u64) -> Result<Vec<SwitchSpec>> {
    let size = switch_space_size(q);
    if size > BigUint::from(limit) {
        return Err(Error::Budget(format!("{size} switch specs exceed the enumeration limit {limit}")));
    }
    let cycles = all_full_cycles(q);
    let mut out = Vec::new();
    for fibers in permutations(q + 2) {
        let mut idx = vec![0usize; q + 1];
        loop {
            out.push(SwitchSpec {
                fibers: fibers.clone(),
                cycles: idx.iter().map(|&t| cycles[t].clone()).collect(),
                seed: None,
            });
            if !advance(&mut idx, cycles.len()) {
                break;
            }
        }
    }
    Ok(out)
}

/// Odometer step over digits in `0..base`; false once it wraps.
fn advance(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

pub fn all_full_cycles(q: usize) -> Vec<Vec<u16>> {
    permutations(q)
        .into_iter()
        .map(|p| p.into_iter().map(|v| v as u16).collect::<Vec<u16>>())
        .filter(|p| is_full_cycle(p, q))
        .collect()
}

/// Union of the `X*` edges between consecutive fibers of the path.
pub fn predicted_path_relation(xstar: &FdfGraph, spec: &SwitchSpec) -> Result<Relation> {
    spec.validate(xstar.q())?;
    let fibers = xstar.fibers();
    let mut pairs = Vec::new();
    for w in spec.fibers.windows(2) {
        for a in fibers.fiber(w[0]) {
            for b in xstar.graph().neighbors(a) {
                if fibers.fiber_of(b) == w[1] {
                    pairs.push((a, b));
                    pairs.push((b, a));
                }
            }
        }
    }
    Relation::from_pairs(xstar.n(), pairs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PairSweep {
    Exhaustive,
    Sampled { pairs: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseViolation {
    pub case: u8,
    pub pair: (usize, usize),
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub fibers: (usize, usize),
    pub pairs_checked: usize,
    /// Pairs seen per case: both outside, one inside, across, same fiber.
    pub per_case: [usize; 4],
    pub violation_count: usize,
    pub violations: Vec<CaseViolation>,
}

impl CaseReport {
    pub fn pass(&self) -> bool {
        self.violation_count == 0
    }
}

const MAX_LISTED: usize = 20;

/// Checks the four pair statements that relate `X` and `X′ = switch(X, i, j, f)`.
pub fn check_switch_case_analysis(x: &FdfGraph, y: &FdfGraph, i: usize, j: usize, sweep: PairSweep) -> Result<CaseReport> {
    if x.n() != y.n() {
        return Err(Error::OrderMismatch(x.n(), y.n()));
    }
    let n = x.n();
    let q = x.q();
    let fibers = x.fibers();
    let pairs: Vec<(usize, usize)> = match sweep {
        PairSweep::Exhaustive => (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect(),
        PairSweep::Sampled { pairs, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..pairs)
                .map(|_| loop {
                    let a = rng.gen_range(0..n);
                    let b = rng.gen_range(0..n);
                    if a != b {
                        break (a.min(b), a.max(b));
                    }
                })
                .collect()
        }
    };
    let (gx, gy) = (x.graph(), y.graph());
    let mut report = CaseReport {
        fibers: (i, j),
        pairs_checked: pairs.len(),
        per_case: [0; 4],
        violation_count: 0,
        violations: Vec::new(),
    };
    for (a, b) in pairs {
        let (fa, fb) = (fibers.fiber_of(a), fibers.fiber_of(b));
        let ina = fa == i || fa == j;
        let inb = fb == i || fb == j;
        let case = match (ina, inb) {
            (false, false) => 1u8,
            (true, false) | (false, true) => 2,
            _ if fa != fb => 3,
            _ => 4,
        };
        report.per_case[case as usize - 1] += 1;
        let (ex, ey) = (gx.has_edge(a, b), gy.has_edge(a, b));
        let nx = gx.common_neighbors(a, b)?;
        let ny = gy.common_neighbors(a, b)?;
        let (cx, cy) = (gx.edges_within(&nx), gy.edges_within(&ny));
        let lost = nx.iter().filter(|v| ny.binary_search(v).is_err()).count();
        let fail = match case {
            1 => {
                if ex != ey {
                    Some("adjacency changed".to_string())
                } else if nx != ny {
                    Some("common neighbourhood changed".to_string())
                } else if cx.abs_diff(cy) > 1 {
                    Some(format!("e changed from {cx} to {cy}"))
                } else {
                    None
                }
            }
            2 => {
                if ex != ey {
                    Some("adjacency changed".to_string())
                } else if lost > 1 {
                    Some(format!("{lost} common neighbours lost"))
                } else if cx.abs_diff(cy) > q - 1 {
                    Some(format!("e changed from {cx} to {cy}"))
                } else {
                    None
                }
            }
            3 => {
                if ex && ey {
                    Some("edge survived the switching".to_string())
                } else if nx != ny {
                    Some("common neighbourhood changed".to_string())
                } else if cx != cy {
                    Some(format!("e changed from {cx} to {cy}"))
                } else {
                    None
                }
            }
            _ => {
                let disjoint = nx.iter().all(|v| ny.binary_search(v).is_err());
                if ex || ey {
                    Some("same-fiber pair adjacent".to_string())
                } else if nx != ny && !disjoint {
                    Some("common neighbourhoods neither equal nor disjoint".to_string())
                } else if cx != 0 || cy != 0 {
                    Some(format!("e = {cx}, {cy}, expected 0"))
                } else {
                    None
                }
            }
        };
        if let Some(detail) = fail {
            report.violation_count += 1;
            if report.violations.len() < MAX_LISTED {
                report.violations.push(CaseViolation { case, pair: (a, b), detail });
            }
        }
    }
    Ok(report)
}
