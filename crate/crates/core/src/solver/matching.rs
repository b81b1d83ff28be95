//! Maximum-weight matching on general graphs, backed by the blossom
//! implementation in `mwmatching`.

use mwmatching::{Matching, SENTINEL};

/// Maximum-weight matching over vertices `0..n`. Edges with nonpositive
/// weight are ignored. Returned pairs are `(low, high)` sorted ascending.
pub fn max_weight_matching(edges: &[(usize, usize, i64)]) -> Vec<(usize, usize)> {
    let mut input: Vec<(usize, usize, i32)> = Vec::new();
    for &(u, v, w) in edges {
        assert_ne!(u, v, "matching edges must join distinct vertices");
        if w <= 0 {
            continue;
        }
        // Even weights keep the blossom duals integral.
        let w = i32::try_from(2 * w).expect("matching weight fits in i32");
        input.push((u, v, w));
    }
    if input.is_empty() {
        return Vec::new();
    }
    let mate = Matching::new(input).solve();
    let mut pairs: Vec<(usize, usize)> = mate
        .iter()
        .enumerate()
        .filter(|&(v, &m)| m != SENTINEL && v < m)
        .map(|(v, &m)| (v, m))
        .collect();
    pairs.sort_unstable();
    pairs
}
