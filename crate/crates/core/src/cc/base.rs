//! Base number search by increasing individualisation size.

use serde::Serialize;

use super::{extension_with, ClosureOptions, CoherentConfiguration};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseNumber {
    /// Exact value with witness points.
    Exact { b: usize, witness: Vec<usize> },
    /// No discrete extension with fewer than `above` points was found
    /// before the budget ran out.
    Unknown { above: usize, tried: usize },
}

/// Tries `b = 0`, then single points, then pairs. `preferred` pairs are
/// tried before the lexicographic sweep. `search_limit` bounds the total
/// number of extensions computed.
pub fn base_number(
    cc: &CoherentConfiguration,
    preferred: &[(usize, usize)],
    search_limit: usize,
) -> Result<BaseNumber> {
    let opts = ClosureOptions::default();
    let n = cc.n();
    if cc.is_discrete() {
        return Ok(BaseNumber::Exact { b: 0, witness: vec![] });
    }
    let mut tried = 0;
    for a in 0..n {
        if tried >= search_limit {
            return Ok(BaseNumber::Unknown { above: 1, tried });
        }
        tried += 1;
        if extension_with(cc, &[a], &opts)?.is_discrete() {
            return Ok(BaseNumber::Exact { b: 1, witness: vec![a] });
        }
    }
    let sweep = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
    for (a, b) in preferred.iter().copied().chain(sweep) {
        if tried >= search_limit {
            return Ok(BaseNumber::Unknown { above: 2, tried });
        }
        tried += 1;
        if extension_with(cc, &[a, b], &opts)?.is_discrete() {
            return Ok(BaseNumber::Exact { b: 2, witness: vec![a, b] });
        }
    }
    Ok(BaseNumber::Unknown { above: 2, tried })
}
