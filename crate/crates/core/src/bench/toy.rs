//! A small office network with income attributes and three planted outliers.
//!
//! Four communities (very poor, poor, medium, rich) of equal size form a
//! two-level hierarchy: very poor with poor, medium with rich. Three nodes
//! carry incomes from the wrong community:
//!
//! * `o1`, medium income inside the rich community;
//! * `o2`, very poor income inside the medium community, with a few extra
//!   links into the poor community;
//! * `o3`, rich income inside the very poor community.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::graph::{connected_components, AttributedGraph};
use crate::seed::rng_for;
use crate::stability::Partition;
use crate::{Error, Result};

pub const COMMUNITY_NAMES: [&str; 4] = ["very_poor", "poor", "medium", "rich"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OfficeConfig {
    pub community_size: usize,
    /// Income centre per community, in [`COMMUNITY_NAMES`] order.
    pub incomes: [f64; 4],
    pub income_noise: f64,
    /// Edge probability inside a community.
    pub p_in: f64,
    /// Random edges between each pair of communities, row-major upper
    /// triangle: (vp,p) (vp,m) (vp,r) (p,m) (p,r) (m,r).
    pub cross_edges: [usize; 6],
    /// Links from `o2` into the poor community.
    pub o2_links: usize,
    /// Weight bandwidth that suits these incomes.
    pub sigma: f64,
    pub rng_seed: u64,
}

impl Default for OfficeConfig {
    fn default() -> Self {
        Self {
            community_size: 40,
            incomes: [0.0, 2.0, 5.5, 8.5],
            income_noise: 0.2,
            p_in: 0.25,
            cross_edges: [10, 0, 0, 4, 0, 12],
            o2_links: 2,
            sigma: 1.0,
            rng_seed: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OfficeNetwork {
    pub graph: AttributedGraph,
    pub truth: Partition,
    /// Node indices of `o1`, `o2`, `o3`.
    pub outliers: [usize; 3],
    pub sigma: f64,
}

pub fn office_network(cfg: &OfficeConfig) -> Result<OfficeNetwork> {
    let s = cfg.community_size;
    if s < 4 || !(0.0..=1.0).contains(&cfg.p_in) {
        return Err(Error::Config("office network needs 4+ nodes per community and p_in in [0, 1]".into()));
    }
    let n = 4 * s;
    let mut rng = rng_for(cfg.rng_seed, "office", 0);
    let noise = Normal::new(0.0, cfg.income_noise.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let community: Vec<usize> = (0..n).map(|u| u / s).collect();
    let mut income: Vec<f64> = community.iter().map(|&c| cfg.incomes[c] + noise.sample(&mut rng)).collect();
    // the last member of a community is its outlier
    let outliers = [4 * s - 1, 3 * s - 1, s - 1];
    income[outliers[0]] = cfg.incomes[2] + noise.sample(&mut rng);
    income[outliers[1]] = cfg.incomes[0] + noise.sample(&mut rng);
    income[outliers[2]] = cfg.incomes[3] + noise.sample(&mut rng);

    let mut edges = Vec::new();
    for c in 0..4 {
        for i in c * s..(c + 1) * s {
            for j in i + 1..(c + 1) * s {
                if rng.random::<f64>() < cfg.p_in {
                    edges.push((i, j));
                }
            }
        }
    }
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    for (&(a, b), &count) in pairs.iter().zip(&cfg.cross_edges) {
        for _ in 0..count {
            // outliers keep their planted neighbourhoods
            let pick = |rng: &mut rand_chacha::ChaCha8Rng, c: usize| loop {
                let u = c * s + rng.random_range(0..s);
                if !outliers.contains(&u) {
                    break u;
                }
            };
            let u = pick(&mut rng, a);
            let v = pick(&mut rng, b);
            edges.push((u, v));
        }
    }
    for _ in 0..cfg.o2_links {
        edges.push((outliers[1], s + rng.random_range(0..s - 1)));
    }
    let names: Vec<String> = (0..n)
        .map(|u| match outliers.iter().position(|&o| o == u) {
            Some(k) => format!("o{}", k + 1),
            None => format!("{}_{}", COMMUNITY_NAMES[community[u]], u % s),
        })
        .collect();
    let mut labels = vec![false; n];
    for &o in &outliers {
        labels[o] = true;
    }
    let graph = AttributedGraph::new(names, income.into_iter().map(|x| vec![x]).collect(), edges, Some(labels))?;
    if connected_components(&graph).len() != 1 {
        return Err(Error::Config("office network came out disconnected; raise p_in".into()));
    }
    Ok(OfficeNetwork {
        graph,
        truth: Partition::new(&community),
        outliers,
        sigma: cfg.sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_network_shape() {
        let net = office_network(&OfficeConfig::default()).unwrap();
        assert_eq!(net.graph.node_count(), 160);
        assert_eq!(net.truth.sizes(), vec![40; 4]);
        assert_eq!(net.graph.node_ids()[net.outliers[2]], "o3");
        assert!(net.graph.attributes(net.outliers[2])[0] > 7.0);
    }
}
