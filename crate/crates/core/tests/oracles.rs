//! Expected values computed independently of the library code paths.

use fdfwl::cc::coherent_closure;
use fdfwl::certify::predicted_relation;
use fdfwl::plane::{build_affine_scheme, exhaustive_hyperovals, find_affine_hyperoval};
use fdfwl::srg::e_count;
use fdfwl::switching::{path_switch, sample_switch_spec};
use fdfwl::{build_xstar, AffinePlane, Field, Relation};

/// GF(2^k) product by shift-and-add, reducing by the modulus bit by bit.
fn slow_mul(a: u32, b: u32, k: u32, modulus: u32) -> u32 {
    let mut acc = 0u32;
    for i in 0..k {
        if b >> i & 1 == 1 {
            acc ^= a << i;
        }
    }
    for bit in (k..2 * k).rev() {
        if acc >> bit & 1 == 1 {
            acc ^= modulus << (bit - k);
        }
    }
    acc
}

#[test]
fn multiplication_tables_match_schoolbook() {
    for k in 1..=8 {
        let f = Field::new(k).unwrap();
        for a in 0..f.order() as u32 {
            for b in 0..f.order() as u32 {
                assert_eq!(f.mul_raw(a as u8, b as u8) as u32, slow_mul(a, b, k, f.modulus()), "k={k} {a}*{b}");
            }
        }
    }
}

/// `(v,i) ~ (u,j)` iff `i ≠ j` and `v − u` is parallel to `h_i − h_j`,
/// written out with coordinates instead of line indices.
#[test]
fn xstar_adjacency_from_coordinates() {
    for q in [2usize, 4, 8] {
        let p = AffinePlane::with_order(q).unwrap();
        let f = p.field();
        let h = find_affine_hyperoval(&p, 5).unwrap();
        let x = build_xstar(&p, &h).unwrap();
        let hp: Vec<(u8, u8)> = h.points().iter().map(|&v| p.coords(v)).collect();
        let parallel = |(a, b): (u8, u8), (c, d): (u8, u8)| f.mul_raw(a, d) == f.mul_raw(b, c);
        let qq = q * q;
        for s in 0..x.n() {
            for t in 0..x.n() {
                let (i, j) = (s / qq, t / qq);
                let (vs, vt) = (p.coords(s % qq), p.coords(t % qq));
                let diff = (vs.0 ^ vt.0, vs.1 ^ vt.1);
                let dir = (hp[i].0 ^ hp[j].0, hp[i].1 ^ hp[j].1);
                let expect = i != j && parallel(diff, dir);
                assert_eq!(x.graph().has_edge(s, t), expect, "q={q} {s} {t}");
            }
        }
    }
}

/// Hyperovals of AG(2,4) avoiding the origin, counted by brute force over
/// 6-subsets: no three points collinear.
#[test]
fn q4_hyperoval_count() {
    let p = AffinePlane::with_order(4).unwrap();
    fn extend(p: &AffinePlane, set: &mut Vec<usize>, next: usize) -> usize {
        if set.len() == 6 {
            return 1;
        }
        let mut count = 0;
        for v in next..16 {
            let free = (0..set.len()).all(|a| (a + 1..set.len()).all(|b| !p.collinear(set[a], set[b], v)));
            if free {
                set.push(v);
                count += extend(p, set, v + 1);
                set.pop();
            }
        }
        count
    }
    let count = extend(&p, &mut Vec::new(), 1);
    assert_eq!(exhaustive_hyperovals(&p).len(), count);
    assert!(count > 0);
}

#[test]
fn affine_scheme_intersection_numbers() {
    let q = 4;
    let p = AffinePlane::with_order(q).unwrap();
    let cc = build_affine_scheme(&p);
    assert_eq!(cc.rank(), q + 2);
    let diag = cc.color(0, 0);
    for r in (0..cc.rank() as u32).filter(|&r| r != diag) {
        assert_eq!(cc.intersection_number(r, r, diag, 16).unwrap(), q - 1);
        assert_eq!(cc.intersection_number(diag, r, r, 100).unwrap(), 1);
        // two points on a common line of class r: the rest of that line
        assert_eq!(cc.intersection_number(r, r, r, 100).unwrap(), q - 2);
    }
}

/// `E_{Δk,Δi}·E_{Δi,Δk}` restricted to `Δ_k` is the equivalence "same line
/// of class L[k][i]".
#[test]
fn line_equivalence_from_cross_edges() {
    let q = 4;
    let p = AffinePlane::with_order(q).unwrap();
    let x = build_xstar(&p, &find_affine_hyperoval(&p, 0).unwrap()).unwrap();
    let f = x.fibers();
    let n = x.n();
    for (k, i) in [(0, 1), (2, 5), (4, 3)] {
        let cross = |from: usize, to: usize| {
            Relation::from_pairs(
                n,
                x.graph().edges().flat_map(|(a, b)| [(a, b), (b, a)]).filter(|&(a, b)| {
                    f.fiber_of(a) == from && f.fiber_of(b) == to
                }),
            )
            .unwrap()
        };
        let s = cross(k, i).dot(&cross(i, k)).unwrap();
        let class = x.classes().get(k, i);
        for a in f.fiber(k) {
            for b in f.fiber(k) {
                let same = p.line_through(class, a % 16) == p.line_through(class, b % 16);
                assert_eq!(s.contains(a, b), same);
            }
        }
    }
}

/// Common neighbourhoods of predicted pairs in the switched graph are
/// dense: at least `C(q,2) − 3(q−1)` edges. Checked for q = 8 on every pair.
#[test]
fn predicted_pairs_have_dense_common_neighbourhoods() {
    let q = 8;
    let p = AffinePlane::with_order(q).unwrap();
    let x = build_xstar(&p, &find_affine_hyperoval(&p, 2).unwrap()).unwrap();
    let y = path_switch(&x, &sample_switch_spec(q, 2)).unwrap();
    let s = predicted_relation(&y).unwrap();
    let bound = q * (q - 1) / 2 - 3 * (q - 1);
    for (a, b) in s.pairs().filter(|&(a, b)| a < b) {
        assert!(e_count(y.graph(), a, b).unwrap() >= bound);
    }
}

#[test]
fn closure_of_xstar_q2_contains_edges() {
    let p = AffinePlane::with_order(2).unwrap();
    let x = build_xstar(&p, &find_affine_hyperoval(&p, 0).unwrap()).unwrap();
    let cc = coherent_closure(16, &[x.graph().edge_relation()], &[]).unwrap();
    assert!(cc.audit().is_coherent());
    assert!(cc.contains_relation(&x.graph().edge_relation()));
}
