//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance -- 3 5` runs a subset by number.

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use fdfwl::cc::{
    base_number, coherent_closure, coherent_closure_reference, coherent_closure_with, extension, m_wl, BaseNumber,
    ClosureOptions, CoherentConfiguration,
};
use fdfwl::certify::{anchor, fibers_homogeneous, predicted_relation, threshold};
use fdfwl::iso::{iso_classes, iso_test, IsoOptions, IsoVerdict};
use fdfwl::plane::{build_affine_scheme, find_affine_hyperoval};
use fdfwl::srg::{e_counts, four_condition_census, four_condition_higman, s_e_relation, srg_parameters};
use fdfwl::switching::{
    check_switch_case_analysis, elementary_switch, enumerate_switch_specs, path_switch, sample_switch_spec,
    switch_space_size, PairSweep,
};
use fdfwl::{build_xstar, AffinePlane, FdfGraph, Graph, Relation, SrgParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn xstar(q: usize, seed: u64) -> FdfGraph {
    let p = AffinePlane::with_order(q).unwrap();
    build_xstar(&p, &find_affine_hyperoval(&p, seed).unwrap()).unwrap()
}

fn switched(q: usize, seed: u64) -> FdfGraph {
    path_switch(&xstar(q, seed), &sample_switch_spec(q, seed)).unwrap()
}

/// Plain nested-loop parameters, independent of the bitset code.
fn naive_params(g: &Graph) -> Option<(usize, usize, usize, usize)> {
    let n = g.n();
    let adj: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| g.has_edge(a, b)).collect()).collect();
    let k = adj[0].iter().filter(|&&x| x).count();
    let (mut lam, mut mu) = (None, None);
    for a in 0..n {
        if adj[a].iter().filter(|&&x| x).count() != k {
            return None;
        }
        for b in a + 1..n {
            let c = (0..n).filter(|&v| adj[a][v] && adj[b][v]).count();
            let slot = if adj[a][b] { &mut lam } else { &mut mu };
            if *slot.get_or_insert(c) != c {
                return None;
            }
        }
    }
    Some((n, k, lam?, mu?))
}

fn binom2(q: usize) -> usize {
    q * (q - 1) / 2
}

fn c1_parameters() -> Outcome {
    let expected = [(2, (16, 6, 2, 2)), (4, (96, 20, 4, 4)), (8, (640, 72, 8, 8)), (16, (4608, 272, 16, 16))];
    let mut ok = true;
    let mut seen = Vec::new();
    for (q, (n, k, l, m)) in expected {
        let x = xstar(q, 0);
        let got = srg_parameters(x.graph()).params();
        let want = SrgParams { n, k, lambda: l, mu: m };
        ok &= got == Some(want);
        if q <= 4 {
            ok &= naive_params(x.graph()) == Some((n, k, l, m));
        }
        seen.push(got.map_or("not strongly regular".to_string(), |p| p.to_string()));
    }
    outcome(ok, seen.join(" "))
}

fn c2_switching_parameters() -> Outcome {
    let mut ok = true;
    let mut graphs = 0;
    for q in [2, 4, 8, 16] {
        for seed in 1..=5 {
            let x = switched(q, seed);
            ok &= srg_parameters(x.graph()).params() == Some(SrgParams::fdf(q));
            graphs += 1;
        }
    }
    outcome(ok, format!("{graphs} path-switched graphs, q in {{2,4,8,16}}, 5 seeds each"))
}

fn c3_four_condition() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for q in [2, 4, 8, 16] {
        let x = xstar(q, 0);
        let g = x.graph();
        let h = four_condition_higman(g).unwrap();
        let n = g.n();
        let edges = g.edge_count();
        let non = n * (n - 1) / 2 - edges;
        ok &= h.pass;
        ok &= h.counts["a_values"] == json!({ binom2(q).to_string(): edges });
        ok &= h.counts["b_values"] == json!({ "0": non });
        if q <= 4 {
            let c = four_condition_census(g, 100).unwrap();
            ok &= c.pass && c.pass == h.pass;
            notes.push(format!("q={q} census+higman"));
        } else {
            notes.push(format!("q={q} higman a={}", binom2(q)));
        }
    }
    // after a single elementary switching the two checks must still agree
    let x = xstar(4, 0);
    let y = elementary_switch(&x, 0, 1, &[1, 2, 3, 0]).unwrap();
    let h = four_condition_higman(y.graph()).unwrap();
    let c = four_condition_census(y.graph(), 100).unwrap();
    ok &= h.pass == c.pass;
    notes.push(format!("switched control: higman {} census {}", h.pass, c.pass));
    outcome(ok, notes.join(", "))
}

fn c4_case_analysis() -> Outcome {
    let mut ok = true;
    let mut pairs = 0usize;
    let mut violations = 0usize;
    let mut steps = 0usize;
    for (q, seeds) in [(2usize, 1..=3u64), (4, 1..=3), (8, 1..=1)] {
        for seed in seeds {
            let spec = sample_switch_spec(q, seed);
            let mut prev = xstar(q, seed);
            for (t, (i, j, f)) in spec.steps().enumerate() {
                let next = elementary_switch(&prev, i, j, f).unwrap();
                let sweep = if q <= 4 {
                    PairSweep::Exhaustive
                } else {
                    PairSweep::Sampled { pairs: 100_000, seed: seed * 1000 + t as u64 }
                };
                let r = check_switch_case_analysis(&prev, &next, i, j, sweep).unwrap();
                if q <= 4 {
                    ok &= r.pairs_checked == prev.n() * (prev.n() - 1) / 2;
                } else {
                    ok &= r.pairs_checked >= 100_000;
                }
                ok &= r.per_case.iter().all(|&c| c > 0) || q == 2;
                pairs += r.pairs_checked;
                violations += r.violation_count;
                steps += 1;
                prev = next;
            }
        }
    }
    ok &= violations == 0;
    outcome(ok, format!("{steps} switchings, {pairs} pairs, {violations} violations"))
}

fn c5_two_point_extension() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for q in [4, 8, 16] {
        let t = Instant::now();
        let mut good = 0;
        for seed in 1..=3 {
            let x = switched(q, seed);
            let s = predicted_relation(&x).unwrap();
            let (a, b) = anchor(&x);
            let ok_anchor = !x.graph().has_edge(a, b) && x.fibers().fiber_of(a) != x.fibers().fiber_of(b);
            let rels = [x.graph().edge_relation(), s.clone()];
            let discrete = match coherent_closure(x.n(), &rels, &[a, b]) {
                Ok(cc) => cc.is_discrete(),
                Err(e) => {
                    eprintln!("q={q} seed={seed}: {e}");
                    false
                }
            };
            let mut homogeneous = fibers_homogeneous(&x, &s, a).unwrap();
            if q == 4 {
                // exact check against the full one-point extension
                let cc = coherent_closure(x.n(), &rels, &[a]).unwrap();
                let f = x.fibers();
                homogeneous &= (0..q + 2).all(|i| cc.is_homogeneity_set(&f.mask(&[i])));
            }
            if ok_anchor && discrete && homogeneous {
                good += 1;
            } else {
                ok = false;
                eprintln!("q={q} seed={seed}: anchor {ok_anchor} discrete {discrete} fibers {homogeneous}");
            }
        }
        notes.push(format!("q={q} {good}/3 in {:.1}s", t.elapsed().as_secs_f64()));
    }
    outcome(ok, notes.join(", "))
}

fn c6_s_e_identification() -> Outcome {
    let q = 32;
    let e = threshold(q);
    let x = switched(q, 1);
    let s = predicted_relation(&x).unwrap();
    let n = x.n();
    let g = x.graph();
    let pairs: Vec<(usize, usize)> = s.pairs().filter(|&(a, b)| a < b).collect();
    let counts = e_counts(g, &pairs).unwrap();
    let min = counts.iter().copied().min().unwrap();
    let below = counts.iter().filter(|&&c| c < e).count();
    let mut ok = pairs.len() == (q + 1) * q * q * q && below == 0;

    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut sample = Vec::with_capacity(1_000_000);
    while sample.len() < 1_000_000 {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && !g.has_edge(a, b) && !s.contains(a, b) {
            sample.push((a, b));
        }
    }
    let comp = e_counts(g, &sample).unwrap();
    let max = comp.iter().copied().max().unwrap();
    let above = comp.iter().filter(|&&c| c >= e).count();
    ok &= above == 0;
    drop((x, s));

    // the identification is only claimed above q = 16; report without gating
    let y = switched(16, 1);
    let sy = s_e_relation(y.graph(), threshold(16));
    let py = predicted_relation(&y).unwrap();
    let observation = if sy == py {
        "q=16 s_e agrees with the path relation".to_string()
    } else {
        format!("q=16 s_e differs ({} vs {} pairs)", sy.len(), py.len())
    };
    outcome(
        ok,
        format!(
            "q=32: {} predicted pairs, min e = {min} >= {e}; {} samples, max e = {max} < {e}; {observation}",
            pairs.len(),
            sample.len()
        ),
    )
}

fn random_corpus() -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..50)
        .map(|i| {
            let n = match i {
                0..=14 => 4 + i % 7,
                15..=24 => 11 + i % 2,
                _ => rng.gen_range(13..=60),
            };
            let p = rng.gen_range(0.1..0.9);
            Graph::random(n, p, &mut rng)
        })
        .collect()
}

/// `{α : |αs| ≤ d}` is a union of fibers for every basis relation and `d`.
fn fiber_union_property(cc: &CoherentConfiguration) -> bool {
    let n = cc.n();
    (0..cc.rank() as u32).all(|c| {
        let deg: Vec<usize> = (0..n).map(|a| (0..n).filter(|&b| cc.color(a, b) == c).count()).collect();
        let ds: HashSet<usize> = deg.iter().copied().collect();
        ds.iter().all(|&d| cc.is_homogeneity_set(&deg.iter().map(|&x| x <= d).collect::<Vec<_>>()))
    })
}

fn c7_engine_properties() -> Outcome {
    let mut fails: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fail = |k: &'static str, cond: bool| {
        if !cond {
            *fails.entry(k).or_default() += 1;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let corpus = random_corpus();
    for g in &corpus {
        let n = g.n();
        let e = g.edge_relation();
        let cc = coherent_closure(n, &[e.clone()], &[]).unwrap();
        fail("axioms", cc.audit().is_coherent());
        fail("contains-E", cc.contains_relation(&e));
        fail("reference", cc.same_partition(&coherent_closure_reference(n, &[e.clone()], &[]).unwrap()));
        fail("idempotence", extension(&cc, &[]).unwrap().same_partition(&cc));
        let finer = coherent_closure(n, &[e.clone()], &[0]).unwrap();
        fail("monotone-point", cc.is_coarser_or_equal(&finer) && finer.audit().is_coherent());
        let extra = Relation::from_pairs(n, [(0, n - 1)]).unwrap();
        fail("monotone-relation", cc.is_coarser_or_equal(&coherent_closure(n, &[e.clone(), extra], &[]).unwrap()));
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let relabeled = coherent_closure(n, &[g.relabel(&perm).unwrap().edge_relation()], &[]).unwrap();
        fail("equivariance", relabeled.same_partition(&cc.relabel(&perm)));
        let pair_only = |threads| ClosureOptions { threads, vertex_shortcut: false, ..ClosureOptions::default() };
        let one = coherent_closure_with(n, &[e.clone()], &[1], &pair_only(Some(1))).unwrap();
        let three = coherent_closure_with(n, &[e.clone()], &[1], &pair_only(Some(3))).unwrap();
        fail("determinism", one.colors() == three.colors());
        fail("fiber-unions", fiber_union_property(&cc));
        if n <= 12 {
            let p2 = m_wl(g, 2, 2_000_000).unwrap().pr2().unwrap();
            fail("pr2-wl2", p2.same_partition(&cc));
        }
        if n <= 10 {
            let m3 = m_wl(g, 3, 2_000_000).unwrap();
            fail("n_k", m3.n_k_audit().ok);
            fail("pr2-wl3-coherent", m3.pr2().unwrap().audit().is_coherent());
        }
    }
    let small = corpus.iter().filter(|g| g.n() <= 12).count();
    let tiny = corpus.iter().filter(|g| g.n() <= 10).count();
    outcome(
        fails.is_empty(),
        format!("{} graphs ({small} with n<=12, {tiny} with n<=10); failures {fails:?}", corpus.len()),
    )
}

fn c8_affine_base_number() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for q in [2, 4, 8] {
        let plane = AffinePlane::with_order(q).unwrap();
        let cc = build_affine_scheme(&plane);
        let n = cc.n();
        let mut pairs = 0;
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    ok &= extension(&cc, &[a, b]).unwrap().is_discrete();
                    pairs += 1;
                }
            }
        }
        let b = base_number(&cc, &[], 10_000).unwrap();
        let exact = match b {
            BaseNumber::Exact { b, .. } => b,
            BaseNumber::Unknown { .. } => usize::MAX,
        };
        ok &= exact <= 2;
        notes.push(format!("q={q}: {pairs} ordered pairs discrete, b={exact}"));
    }
    outcome(ok, notes.join(", "))
}

/// Exhaustive backtracking isomorphism search, vertices taken in BFS order.
fn oracle_isomorphic(x: &Graph, y: &Graph) -> bool {
    let n = x.n();
    if y.n() != n || x.edge_count() != y.edge_count() {
        return false;
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        order.push(root);
        let mut head = order.len() - 1;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for u in x.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    order.push(u);
                }
            }
        }
    }
    fn extend(x: &Graph, y: &Graph, order: &[usize], map: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let k = map.len();
        if k == order.len() {
            return true;
        }
        let v = order[k];
        for c in 0..y.n() {
            if used[c] || x.degree(v) != y.degree(c) {
                continue;
            }
            if (0..k).all(|t| x.has_edge(order[t], v) == y.has_edge(map[t], c)) {
                used[c] = true;
                map.push(c);
                if extend(x, y, order, map, used) {
                    return true;
                }
                map.pop();
                used[c] = false;
            }
        }
        false
    }
    extend(x, y, &order, &mut Vec::new(), &mut vec![false; n])
}

/// The 4×4 rook's graph: SRG(16,6,2,2), not isomorphic to the q = 2
/// graphs, which are Shrikhande graphs.
fn rook() -> Graph {
    let mut e = Vec::new();
    for u in 0..16 {
        for v in u + 1..16 {
            if u / 4 == v / 4 || u % 4 == v % 4 {
                e.push((u, v));
            }
        }
    }
    Graph::from_edges(16, e).unwrap()
}

fn relabel(g: &Graph, rng: &mut ChaCha8Rng) -> Graph {
    let mut perm: Vec<usize> = (0..g.n()).collect();
    perm.shuffle(rng);
    g.relabel(&perm).unwrap()
}

fn c9_isomorphism() -> Outcome {
    let q = 2;
    let e = threshold(q);
    let base = xstar(q, 0);
    let specs = enumerate_switch_specs(q, 1000).unwrap();
    let graphs: Vec<Graph> = specs.iter().map(|s| path_switch(&base, s).unwrap().graph().clone()).collect();
    let aux = |g: &Graph| s_e_relation(g, e);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut agree = 0;
    let mut total = 0;
    let opts = IsoOptions { fiber_size: Some(q * q), ..IsoOptions::default() };
    let mut check = |x: &Graph, y: &Graph| {
        let r = fdfwl::iso::iso_test_with(x, y, &aux(x), &aux(y), &opts).unwrap();
        let truth = oracle_isomorphic(x, y);
        total += 1;
        let verdict_ok = match r.verdict {
            IsoVerdict::Isomorphic => truth && fdfwl::iso::verify(x, y, &aux(x), &aux(y), r.bijection.as_ref().unwrap()),
            IsoVerdict::NotIsomorphic => !truth,
            IsoVerdict::Inconclusive => false,
        };
        agree += usize::from(verdict_ok);
        truth
    };
    let mut planted_true = 0;
    for _ in 0..20 {
        let g = &graphs[rng.gen_range(0..graphs.len())];
        planted_true += usize::from(check(g, &relabel(g, &mut rng)));
    }
    let mut relabeled_true = 0;
    for _ in 0..20 {
        let a = &graphs[rng.gen_range(0..graphs.len())];
        let b = &graphs[rng.gen_range(0..graphs.len())];
        relabeled_true += usize::from(check(a, &relabel(b, &mut rng)));
    }
    let control = rook();
    let mut control_true = 0;
    for _ in 0..5 {
        let g = &graphs[rng.gen_range(0..graphs.len())];
        control_true += usize::from(check(g, &relabel(&control, &mut rng)));
    }
    let mut ok = agree == total && planted_true == 20 && control_true == 0;

    let rels: Vec<Relation> = graphs.iter().map(aux).collect();
    let items: Vec<(&Graph, &Relation)> = graphs.iter().zip(&rels).collect();
    let classes = iso_classes(&items, &opts).unwrap();
    ok &= classes.inconclusive.is_empty();
    ok &= classes.sizes().iter().all(|&s| s <= 16 * 16);
    for (i, class) in classes.classes.iter().enumerate() {
        for &m in &class[1..] {
            let pi = classes.to_representative[m].as_ref().unwrap();
            ok &= fdfwl::iso::verify(&graphs[m], &graphs[class[0]], &rels[m], &rels[class[0]], pi);
        }
        for other in &classes.classes[i + 1..] {
            for &a in class {
                for &b in other {
                    ok &= !oracle_isomorphic(&graphs[a], &graphs[b]);
                }
            }
        }
    }
    let distinct: HashSet<Vec<(usize, usize)>> = graphs.iter().map(|g| g.edges().collect()).collect();
    // sanity: the isomorphism test itself is consistent with a direct call
    ok &= iso_test(&graphs[0], &graphs[0], &rels[0], &rels[0]).unwrap().verdict == IsoVerdict::Isomorphic;
    outcome(
        ok,
        format!(
            "{agree}/{total} agree with exhaustive search ({planted_true} planted, {relabeled_true} of 20 mixed pairs isomorphic, \
             {control_true} of 5 rook's-graph controls); \
             24 specs -> {} distinct labeled graphs, classes {:?}",
            distinct.len(),
            classes.sizes()
        ),
    )
}

fn c10_counting() -> Outcome {
    let fact = |m: u64| (1..=m).product::<u64>();
    let oracle = |q: u64| fact(q + 2) * fact(q - 1).pow(q as u32 + 1);
    let c2 = switch_space_size(2);
    let c4 = switch_space_size(4);
    let listed = enumerate_switch_specs(2, 1000).unwrap().len();
    let ok = c2 == BigUint::from(24u32)
        && c4 == BigUint::from(5_598_720u32)
        && c2 == BigUint::from(oracle(2))
        && c4 == BigUint::from(oracle(4))
        && listed == 24;
    outcome(ok, format!("q=2: {c2} ({listed} enumerated), q=4: {c4}, q=8: {}", switch_space_size(8)))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "srg parameters of X*", c1_parameters),
        (2, "path switching preserves parameters", c2_switching_parameters),
        (3, "4-condition", c3_four_condition),
        (4, "switching case analysis", c4_case_analysis),
        (5, "discrete two-point extension", c5_two_point_extension),
        (6, "s_e identification", c6_s_e_identification),
        (7, "coherent closure engine", c7_engine_properties),
        (8, "affine scheme base number", c8_affine_base_number),
        (9, "isomorphism testing", c9_isomorphism),
        (10, "switch spec counting", c10_counting),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| outcome(false, "panicked"));
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag} {name}: {} [{:.1}s]", o.detail, t.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
