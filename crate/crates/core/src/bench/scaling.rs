//! Preferential-attachment graphs for timing runs.

use rand::Rng;

use crate::seed::rng_for;
use crate::{Error, Result};

/// Barabási–Albert graph: a clique on `m + 1` seed nodes, then each new node
/// links to `m` distinct existing nodes chosen proportionally to degree.
/// About `m·n` edges; sorted `(u, v)` with `u < v`.
pub fn preferential_attachment(n: usize, m: usize, rng_seed: u64) -> Result<Vec<(usize, usize)>> {
    if m == 0 || n <= m {
        return Err(Error::Parameter(format!("preferential attachment needs n > m >= 1, got n={n}, m={m}")));
    }
    let mut rng = rng_for(rng_seed, "preferential-attachment", 0);
    let mut edges = Vec::with_capacity(n * m);
    // every endpoint once per incident edge
    let mut ends: Vec<usize> = Vec::with_capacity(2 * n * m);
    for u in 0..=m {
        for v in u + 1..=m {
            edges.push((u, v));
            ends.extend([u, v]);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for u in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let v = ends[rng.random_range(0..ends.len())];
            if !targets.contains(&v) {
                targets.push(v);
            }
        }
        for &v in &targets {
            edges.push((v, u));
            ends.extend([v, u]);
        }
    }
    edges.sort_unstable();
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_count_and_simplicity() {
        let e = preferential_attachment(1000, 3, 1).unwrap();
        assert_eq!(e.len(), 6 + 3 * 996);
        let mut d = e.clone();
        d.dedup();
        assert_eq!(d.len(), e.len());
        assert!(e.iter().all(|&(u, v)| u < v && v < 1000));
        assert_eq!(e, preferential_attachment(1000, 3, 1).unwrap());
        assert!(preferential_attachment(3, 3, 0).is_err());
    }

    #[test]
    fn hubs_emerge() {
        let e = preferential_attachment(4000, 3, 2).unwrap();
        let mut deg = vec![0usize; 4000];
        for (u, v) in e {
            deg[u] += 1;
            deg[v] += 1;
        }
        assert!(*deg.iter().max().unwrap() > 60);
    }
}
