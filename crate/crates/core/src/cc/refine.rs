//! Pair colour refinement to a fixed point.

use std::collections::BTreeMap;

use rayon::prelude::*;

/// Maps each key to its rank among the distinct keys (dense, order-preserving).
pub(crate) fn dense_ranks<T: Ord + Clone + Send + Sync>(keys: &[T]) -> Vec<u32> {
    let mut distinct: Vec<T> = keys.to_vec();
    distinct.par_sort_unstable();
    distinct.dedup();
    keys.par_iter()
        .map(|k| distinct.binary_search(k).expect("present") as u32)
        .collect()
}

fn count_colors(colors: &[u32]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m as usize + 1)
}

/// Reference refinement: signatures are the exact sorted multisets.
pub(crate) fn refine_exact(n: usize, mut colors: Vec<u32>) -> Vec<u32> {
    loop {
        let before = count_colors(&colors);
        let mut table: BTreeMap<(u32, Vec<(u32, u32)>), u32> = BTreeMap::new();
        let mut sigs = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut m: Vec<(u32, u32)> =
                    (0..n).map(|g| (colors[a * n + g], colors[g * n + b])).collect();
                m.sort_unstable();
                let sig = (colors[a * n + b], m);
                table.insert(sig.clone(), 0);
                sigs.push(sig);
            }
        }
        for (i, v) in table.values_mut().enumerate() {
            *v = i as u32;
        }
        colors = sigs.iter().map(|s| table[s]).collect();
        if count_colors(&colors) == before {
            return colors;
        }
    }
}

#[inline]
pub(crate) fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[inline]
pub(crate) fn mix64b(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^ (x >> 33)
}

pub(crate) fn color_key(c: u32, salt: u64) -> u64 {
    mix64(c as u64 ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Hashed refinement: each multiset is folded into two independent 64-bit
/// sums. Colour keys depend only on colour ids, so the result is
/// independent of thread count and invariant under relabelling.
pub(crate) fn refine_hashed(n: usize, mut colors: Vec<u32>) -> Vec<u32> {
    loop {
        let before = count_colors(&colors);
        let left: Vec<u64> = colors.par_iter().map(|&c| color_key(c, 1)).collect();
        // right[b*n + g] = key of c(g, b)
        let mut right = vec![0u64; n * n];
        right.par_chunks_mut(n).enumerate().for_each(|(b, row)| {
            for g in 0..n {
                row[g] = color_key(colors[g * n + b], 2);
            }
        });
        let sigs: Vec<(u32, u64, u64)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|a| {
                let la = &left[a * n..(a + 1) * n];
                let colors = &colors;
                let right = &right;
                (0..n).map(move |b| {
                    let rb = &right[b * n..(b + 1) * n];
                    let mut h1 = 0u64;
                    let mut h2 = 0u64;
                    for g in 0..n {
                        h1 = h1.wrapping_add(mix64(la[g] ^ rb[g]));
                        h2 = h2.wrapping_add(mix64b(la[g].wrapping_add(rb[g].rotate_left(17))));
                    }
                    (colors[a * n + b], h1, h2)
                })
            })
            .collect();
        colors = dense_ranks(&sigs);
        if count_colors(&colors) == before {
            return colors;
        }
    }
}
