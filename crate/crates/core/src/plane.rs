//! The Desarguesian affine plane AG(2,q) over GF(q), q = 2^k.
//!
//! Points are indexed `x·q + y`. Parallel classes are indexed by slope:
//! class `m < q` holds the lines `y = m·x + b`, and class `q` holds the
//! vertical lines `x = c`. Inside a class a line is indexed by its intercept
//! (`b` or `c`), which is also the domain of every σ permutation.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cc::CoherentConfiguration;
use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Clone, Debug)]
pub struct AffinePlane {
    field: Field,
    q: usize,
}

pub fn build_affine_plane(field: Field) -> AffinePlane {
    let q = field.order();
    AffinePlane { field, q }
}

impl AffinePlane {
    pub fn with_order(q: usize) -> Result<Self> {
        Ok(build_affine_plane(Field::with_order(q)?))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn num_points(&self) -> usize {
        self.q * self.q
    }

    pub fn num_classes(&self) -> usize {
        self.q + 1
    }

    pub fn vertical_class(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn point(&self, x: u8, y: u8) -> usize {
        x as usize * self.q + y as usize
    }

    #[inline]
    pub fn coords(&self, p: usize) -> (u8, u8) {
        ((p / self.q) as u8, (p % self.q) as u8)
    }

    /// Coordinatewise sum (= difference in characteristic 2).
    pub fn add(&self, p: usize, r: usize) -> usize {
        let (a, b) = self.coords(p);
        let (c, d) = self.coords(r);
        self.point(a ^ c, b ^ d)
    }

    pub fn scale(&self, s: u8, p: usize) -> usize {
        let (x, y) = self.coords(p);
        self.point(self.field.mul_raw(s, x), self.field.mul_raw(s, y))
    }

    /// Parallel class containing the direction `(dx, dy) != 0`.
    pub fn class_of_direction(&self, dx: u8, dy: u8) -> usize {
        debug_assert!(dx != 0 || dy != 0);
        if dx == 0 {
            self.q
        } else {
            self.field.div_raw(dy, dx) as usize
        }
    }

    /// Class of the unique line through two distinct points.
    pub fn class_of_pair(&self, p: usize, r: usize) -> usize {
        let (a, b) = self.coords(p);
        let (c, d) = self.coords(r);
        self.class_of_direction(a ^ c, b ^ d)
    }

    /// Intercept of the line of `class` through `point`.
    #[inline]
    pub fn line_through(&self, class: usize, point: usize) -> usize {
        let (x, y) = self.coords(point);
        if class == self.q {
            x as usize
        } else {
            (y ^ self.field.mul_raw(class as u8, x)) as usize
        }
    }

    /// Points of line `line` in `class`, ordered by the free coordinate.
    pub fn line_points(&self, class: usize, line: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.q).map(move |t| {
            let t = t as u8;
            if class == self.q {
                self.point(line as u8, t)
            } else {
                let y = self.field.mul_raw(class as u8, t) ^ line as u8;
                self.point(t, y)
            }
        })
    }

    pub fn collinear(&self, p: usize, r: usize, s: usize) -> bool {
        if p == r || p == s || r == s {
            return true;
        }
        let c = self.class_of_pair(p, r);
        self.line_through(c, s) == self.line_through(c, p)
    }
}

/// `q+2` points of the plane, no three collinear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperoval {
    points: Vec<usize>,
}

impl Hyperoval {
    pub fn new(plane: &AffinePlane, points: Vec<usize>) -> Result<Self> {
        let h = Hyperoval { points };
        h.validate(plane)?;
        Ok(h)
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self, plane: &AffinePlane) -> Result<()> {
        let q = plane.order();
        let pts = &self.points;
        if pts.len() != q + 2 {
            return Err(Error::Hyperoval(format!("expected {} points, got {}", q + 2, pts.len())));
        }
        if pts.iter().any(|&p| p >= plane.num_points()) {
            return Err(Error::Hyperoval("point index out of range".into()));
        }
        let mut sorted = pts.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != pts.len() {
            return Err(Error::Hyperoval("repeated point".into()));
        }
        // AG(2,2) has exactly q+2 = 4 points, so the origin cannot be avoided there.
        if q > 2 && pts.contains(&0) {
            return Err(Error::Hyperoval("contains the zero point".into()));
        }
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                for c in b + 1..pts.len() {
                    if plane.collinear(pts[a], pts[b], pts[c]) {
                        return Err(Error::Hyperoval(format!(
                            "points {}, {}, {} are collinear",
                            pts[a], pts[b], pts[c]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Plain-text form: `q`, the modulus in hex, then one `x y` hex pair per point.
    pub fn to_text(&self, plane: &AffinePlane) -> String {
        let mut s = String::new();
        writeln!(s, "{}", plane.order()).unwrap();
        writeln!(s, "{:#x}", plane.field().modulus()).unwrap();
        for &p in &self.points {
            let (x, y) = plane.coords(p);
            writeln!(s, "{x:x} {y:x}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<(AffinePlane, Hyperoval)> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };
        let (ln, ql) = lines.next().ok_or_else(|| perr(0, "missing q"))?;
        let q: usize = ql.trim().parse().map_err(|_| perr(ln, "bad q"))?;
        let plane = AffinePlane::with_order(q)?;
        let (ln, ml) = lines.next().ok_or_else(|| perr(ln, "missing modulus"))?;
        let modulus = u32::from_str_radix(ml.trim().trim_start_matches("0x"), 16)
            .map_err(|_| perr(ln, "bad modulus"))?;
        if modulus != plane.field().modulus() {
            return Err(perr(ln, &format!("modulus {modulus:#x} differs from the canonical one")));
        }
        let mut pts = Vec::new();
        for (ln, l) in lines {
            let mut it = l.split_whitespace();
            let mut coord = || -> Result<u8> {
                let tok = it.next().ok_or_else(|| perr(ln, "missing coordinate"))?;
                let v = u32::from_str_radix(tok, 16).map_err(|_| perr(ln, "bad coordinate"))?;
                if v as usize >= q {
                    return Err(perr(ln, "coordinate out of range"));
                }
                Ok(v as u8)
            };
            let x = coord()?;
            let y = coord()?;
            pts.push(plane.point(x, y));
        }
        let h = Hyperoval::new(&plane, pts)?;
        Ok((plane, h))
    }
}

/// Deterministic hyperoval for a given seed.
///
/// For q <= 4 the seed picks one of the zero-avoiding hyperovals found by
/// exhaustive search. For larger q we take the regular hyperoval
/// `{(1:t:t²)} ∪ {(0:1:0), (1:0:0)}` of PG(2,q), map a seed-chosen exterior
/// line to infinity, and translate if the origin is hit.
pub fn find_affine_hyperoval(plane: &AffinePlane, seed: u64) -> Result<Hyperoval> {
    let q = plane.order();
    if !q.is_multiple_of(2) {
        return Err(Error::Hyperoval(format!("q={q} is odd")));
    }
    if q == 2 {
        return Hyperoval::new(plane, (0..4).collect());
    }
    if q <= 4 {
        let all = exhaustive_hyperovals(plane);
        if all.is_empty() {
            return Err(Error::HyperovalSearch(q));
        }
        let pick = all[(seed % all.len() as u64) as usize].clone();
        return Hyperoval::new(plane, pick);
    }
    conic_hyperoval(plane, seed)
}

/// All zero-avoiding (q+2)-arcs, each sorted, in lexicographic order.
pub fn exhaustive_hyperovals(plane: &AffinePlane) -> Vec<Vec<usize>> {
    let q = plane.order();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(q + 2);
    fn rec(plane: &AffinePlane, start: usize, want: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == want {
            out.push(cur.clone());
            return;
        }
        for p in start..plane.num_points() {
            let ok = (0..cur.len())
                .all(|a| (a + 1..cur.len()).all(|b| !plane.collinear(cur[a], cur[b], p)));
            if ok {
                cur.push(p);
                rec(plane, p + 1, want, cur, out);
                cur.pop();
            }
        }
    }
    rec(plane, 1, q + 2, &mut cur, &mut out);
    out
}

fn conic_hyperoval(plane: &AffinePlane, seed: u64) -> Result<Hyperoval> {
    let q = plane.order();
    let f = plane.field();
    let mut proj: Vec<[u8; 3]> = (0..q as u32)
        .map(|t| {
            let t = t as u8;
            [1, t, f.mul_raw(t, t)]
        })
        .collect();
    proj.push([0, 0, 1]);
    proj.push([0, 1, 0]);

    // Lines a·x + b·y + c·z = 0, normalised so the first nonzero coefficient is 1.
    let mut lines = Vec::new();
    for a in 0..=1u32 {
        for b in 0..q as u32 {
            for c in 0..q as u32 {
                let coef = [a as u8, b as u8, c as u8];
                let first = coef.iter().position(|&v| v != 0);
                if first.is_none() || coef[first.unwrap()] != 1 {
                    continue;
                }
                if a == 0 && b == 0 && c != 1 {
                    continue;
                }
                lines.push(coef);
            }
        }
    }
    let eval = |l: &[u8; 3], p: &[u8; 3]| f.mul_raw(l[0], p[0]) ^ f.mul_raw(l[1], p[1]) ^ f.mul_raw(l[2], p[2]);
    let mut exterior: Vec<[u8; 3]> =
        lines.into_iter().filter(|l| proj.iter().all(|p| eval(l, p) != 0)).collect();
    if exterior.is_empty() {
        return Err(Error::HyperovalSearch(q));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    exterior.shuffle(&mut rng);
    let l = exterior[0];
    let (rx, ry): ([u8; 3], [u8; 3]) = if l[2] != 0 {
        ([1, 0, 0], [0, 1, 0])
    } else if l[1] != 0 {
        ([1, 0, 0], [0, 0, 1])
    } else {
        ([0, 1, 0], [0, 0, 1])
    };
    let mut pts: Vec<usize> = proj
        .iter()
        .map(|p| {
            let z = eval(&l, p);
            let x = f.div_raw(eval(&rx, p), z);
            let y = f.div_raw(eval(&ry, p), z);
            plane.point(x, y)
        })
        .collect();
    if pts.contains(&0) {
        let d = (0..plane.num_points()).find(|p| !pts.contains(p)).expect("q^2 > q+2");
        for p in pts.iter_mut() {
            *p = plane.add(*p, d);
        }
    }
    pts.sort_unstable();
    Hyperoval::new(plane, pts)
}

/// The symmetric `(q+2)×(q+2)` array of parallel classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassArray {
    size: usize,
    entries: Vec<usize>,
}

const DIAGONAL: usize = usize::MAX;

impl ClassArray {
    /// Row-major entries; diagonal entries are ignored.
    pub fn new(size: usize, num_classes: usize, mut entries: Vec<usize>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::ClassArray(format!("expected {} entries", size * size)));
        }
        for i in 0..size {
            entries[i * size + i] = DIAGONAL;
        }
        let a = ClassArray { size, entries };
        a.validate(num_classes)?;
        Ok(a)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j);
        self.entries[i * self.size + j]
    }

    pub fn validate(&self, num_classes: usize) -> Result<()> {
        let m = self.size;
        for i in 0..m {
            let mut seen = vec![false; num_classes];
            for j in 0..m {
                if i == j {
                    continue;
                }
                let c = self.get(i, j);
                if c >= num_classes {
                    return Err(Error::ClassArray(format!("entry ({i},{j}) = {c} is not a class")));
                }
                if c != self.get(j, i) {
                    return Err(Error::ClassArray(format!("not symmetric at ({i},{j})")));
                }
                if seen[c] {
                    return Err(Error::ClassArray(format!("row {i} repeats class {c}")));
                }
                seen[c] = true;
            }
        }
        Ok(())
    }
}

/// `L[i][j]` is the class of the direction `h_i - h_j`.
pub fn class_array_from_hyperoval(plane: &AffinePlane, h: &Hyperoval) -> Result<ClassArray> {
    let pts = h.points();
    let m = pts.len();
    let mut entries = vec![DIAGONAL; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                entries[i * m + j] = plane.class_of_pair(pts[i], pts[j]);
            }
        }
    }
    ClassArray::new(m, plane.num_classes(), entries)
}

/// The bijections σ_ij between lines of the class `L[i][j]`, stored as
/// permutations of intercepts, with σ_ji = σ_ij⁻¹.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaSet {
    q: usize,
    size: usize,
    perms: Vec<Vec<u16>>,
}

impl SigmaSet {
    pub fn identity(q: usize, size: usize) -> Self {
        let id: Vec<u16> = (0..q as u16).collect();
        SigmaSet { q, size, perms: vec![id; size * size] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &[u16] {
        &self.perms[i * self.size + j]
    }

    /// Sets σ_ij = `perm` and σ_ji = `perm`⁻¹.
    pub fn set_pair(&mut self, i: usize, j: usize, perm: &[u16]) -> Result<()> {
        if i == j || i >= self.size || j >= self.size {
            return Err(Error::Sigma(format!("bad fiber pair ({i},{j})")));
        }
        if !is_permutation(perm, self.q) {
            return Err(Error::Sigma(format!("σ_{i}{j} is not a permutation of {} lines", self.q)));
        }
        let mut inv = vec![0u16; self.q];
        for (k, &v) in perm.iter().enumerate() {
            inv[v as usize] = k as u16;
        }
        self.perms[i * self.size + j] = perm.to_vec();
        self.perms[j * self.size + i] = inv;
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        (0..self.size).all(|i| {
            (0..self.size).all(|j| i == j || self.get(i, j).iter().enumerate().all(|(k, &v)| k == v as usize))
        })
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.size {
            for j in 0..self.size {
                if i == j {
                    continue;
                }
                let s = self.get(i, j);
                if !is_permutation(s, self.q) {
                    return Err(Error::Sigma(format!("σ_{i}{j} is not a permutation")));
                }
                let t = self.get(j, i);
                if s.iter().enumerate().any(|(k, &v)| t[v as usize] as usize != k) {
                    return Err(Error::Sigma(format!("σ_{j}{i} is not the inverse of σ_{i}{j}")));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn is_permutation<T: Copy + Into<usize>>(p: &[T], q: usize) -> bool {
    if p.len() != q {
        return false;
    }
    let mut seen = vec![false; q];
    for &v in p {
        let v: usize = v.into();
        if v >= q || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// Diagonal plus one basis relation per parallel class.
pub fn build_affine_scheme(plane: &AffinePlane) -> CoherentConfiguration {
    let n = plane.num_points();
    let mut colors = vec![0u32; n * n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                colors[a * n + b] = 1 + plane.class_of_pair(a, b) as u32;
            }
        }
    }
    CoherentConfiguration::from_colors(n, colors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(q: usize) -> AffinePlane {
        AffinePlane::with_order(q).unwrap()
    }

    fn count_lines(p: &AffinePlane) -> usize {
        p.num_classes() * p.order()
    }

    #[test]
    fn small_plane_counts() {
        let p2 = plane(2);
        assert_eq!((p2.num_points(), p2.num_classes(), count_lines(&p2)), (4, 3, 6));
        for c in 0..3 {
            for l in 0..2 {
                assert_eq!(p2.line_points(c, l).count(), 2);
            }
        }
        let p4 = plane(4);
        assert_eq!((p4.num_points(), p4.num_classes(), count_lines(&p4)), (16, 5, 20));
    }

    #[test]
    fn lines_match_equations_and_partition_points() {
        for q in [2, 4, 8] {
            let p = plane(q);
            let f = p.field();
            for c in 0..p.num_classes() {
                let mut cover = vec![0; p.num_points()];
                for l in 0..q {
                    for pt in p.line_points(c, l) {
                        cover[pt] += 1;
                        let (x, y) = p.coords(pt);
                        if c == q {
                            assert_eq!(x as usize, l);
                        } else {
                            assert_eq!(y, f.mul_raw(c as u8, x) ^ l as u8);
                        }
                        assert_eq!(p.line_through(c, pt), l);
                    }
                }
                assert!(cover.iter().all(|&k| k == 1));
            }
        }
    }

    #[test]
    fn two_points_lie_on_exactly_one_line_q8() {
        let p = plane(8);
        let n = p.num_points();
        let mut lines_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for c in 0..p.num_classes() {
            for l in 0..8 {
                for pt in p.line_points(c, l) {
                    lines_of[pt].push((c, l));
                }
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let common = lines_of[a].iter().filter(|x| lines_of[b].contains(x)).count();
                assert_eq!(common, 1, "{a} {b}");
            }
        }
    }

    #[test]
    fn line_through_simple_classes() {
        let p = plane(8);
        let pt = p.point(5, 3);
        assert_eq!(p.line_through(0, pt), 3);
        assert_eq!(p.line_through(p.vertical_class(), pt), 5);
    }

    #[test]
    fn line_through_random_membership_q8() {
        use rand::Rng;
        let p = plane(8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let c = rng.gen_range(0..p.num_classes());
            let pt = rng.gen_range(0..p.num_points());
            let l = p.line_through(c, pt);
            assert!(p.line_points(c, l).any(|x| x == pt));
        }
    }

    fn assert_line_parity(p: &AffinePlane, h: &Hyperoval) {
        for c in 0..p.num_classes() {
            for l in 0..p.order() {
                let k = p.line_points(c, l).filter(|x| h.points().contains(x)).count();
                assert!(k == 0 || k == 2, "line ({c},{l}) meets H in {k} points");
            }
        }
    }

    #[test]
    fn hyperoval_q2_is_whole_plane() {
        let p = plane(2);
        let h = find_affine_hyperoval(&p, 0).unwrap();
        assert_eq!(h.points(), &[0, 1, 2, 3]);
    }

    #[test]
    fn hyperoval_q4_exhaustive() {
        let p = plane(4);
        let all = exhaustive_hyperovals(&p);
        assert!(!all.is_empty());
        for seed in 0..5 {
            let h = find_affine_hyperoval(&p, seed).unwrap();
            assert_eq!(h.len(), 6);
            assert!(!h.points().contains(&0));
            assert_line_parity(&p, &h);
            // independent triple check: no line carries three points
            for c in 0..p.num_classes() {
                for l in 0..4 {
                    let k = p.line_points(c, l).filter(|x| h.points().contains(x)).count();
                    assert!(k < 3);
                }
            }
        }
    }

    #[test]
    fn hyperoval_conic_construction() {
        for q in [8, 16, 32] {
            let p = plane(q);
            for seed in [0, 1, 7] {
                let h = find_affine_hyperoval(&p, seed).unwrap();
                assert_eq!(h.len(), q + 2);
                assert!(!h.points().contains(&0));
                if q <= 16 {
                    assert_line_parity(&p, &h);
                }
                assert_eq!(find_affine_hyperoval(&p, seed).unwrap(), h);
            }
        }
    }

    #[test]
    fn hyperoval_rejections() {
        let p = plane(4);
        assert!(Hyperoval::new(&p, vec![1, 2, 3]).is_err());
        // (0,1), (0,2), (0,3) are on the vertical line x = 0
        let bad = vec![p.point(0, 1), p.point(0, 2), p.point(0, 3), 5, 10, 15];
        assert!(Hyperoval::new(&p, bad).is_err());
    }

    #[test]
    fn hyperoval_text_roundtrip() {
        let p = plane(8);
        let h = find_affine_hyperoval(&p, 3).unwrap();
        let (p2, h2) = Hyperoval::from_text(&h.to_text(&p)).unwrap();
        assert_eq!(p2.order(), 8);
        assert_eq!(h2, h);
        assert!(Hyperoval::from_text("8\n0x1f\n").is_err());
    }

    #[test]
    fn class_array_properties() {
        for q in [2, 4, 8, 16] {
            let p = plane(q);
            let h = find_affine_hyperoval(&p, 1).unwrap();
            let l = class_array_from_hyperoval(&p, &h).unwrap();
            for i in 0..q + 2 {
                let mut row: Vec<_> = (0..q + 2).filter(|&j| j != i).map(|j| l.get(i, j)).collect();
                for j in 0..q + 2 {
                    if i != j {
                        assert_eq!(l.get(i, j), l.get(j, i));
                    }
                }
                row.sort_unstable();
                assert_eq!(row, (0..q + 1).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn class_array_q4_rows_by_triple_scan() {
        // L[i][j] = L[i][k] would put h_i, h_j, h_k on one line
        let p = plane(4);
        let h = find_affine_hyperoval(&p, 2).unwrap();
        let l = class_array_from_hyperoval(&p, &h).unwrap();
        let pts = h.points();
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    if i != j && j != k && i != k {
                        assert_ne!(l.get(i, j), l.get(i, k));
                        assert!(!p.collinear(pts[i], pts[j], pts[k]));
                    }
                }
            }
        }
    }

    #[test]
    fn class_array_rejects_repeats() {
        let entries = vec![0, 1, 1, 1, 0, 1, 1, 1, 0];
        assert!(ClassArray::new(3, 3, entries).is_err());
    }

    #[test]
    fn sigma_pairs_are_inverse() {
        let mut s = SigmaSet::identity(4, 6);
        assert!(s.is_identity());
        s.set_pair(1, 3, &[1, 2, 3, 0]).unwrap();
        assert_eq!(s.get(3, 1), &[3, 0, 1, 2]);
        s.validate().unwrap();
        assert!(!s.is_identity());
        assert!(s.set_pair(1, 1, &[0, 1, 2, 3]).is_err());
        assert!(s.set_pair(1, 2, &[0, 0, 2, 3]).is_err());
    }

    #[test]
    fn affine_scheme_degree_and_rank() {
        for q in [2, 4] {
            let cc = build_affine_scheme(&plane(q));
            assert_eq!(cc.n(), q * q);
            assert_eq!(cc.rank(), q + 2);
            assert!(cc.audit().is_coherent());
        }
    }
}
