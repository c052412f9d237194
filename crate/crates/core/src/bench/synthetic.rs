//! Planted-partition attributed networks with hierarchical attribute
//! clusters and injected attribute anomalies.
//!
//! Topology is a degree-corrected stub-matching model: community sizes and
//! node degrees follow truncated power laws, each node sends a fraction `μ`
//! of its stubs outside its community, and invalid stub pairs (self-loops,
//! duplicates, wrong side) are re-paired a bounded number of times before
//! being dropped. Attributes of community `C` are drawn around the centre of
//! its hierarchy group with one of three noise families.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::graph::{largest_component, AttributedGraph};
use crate::seed::rng_for;
use crate::stability::Partition;
use crate::{Error, Result};

const REPAIR_ROUNDS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Uniform,
    Logistic,
}

impl Family {
    /// Draw around `center` with spread `scale`: standard deviation for the
    /// normal, half-width for the uniform, scale for the logistic.
    pub fn sample(self, center: f64, scale: f64, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Family::Normal => center + scale * Normal::new(0.0, 1.0).expect("unit normal").sample(rng),
            Family::Uniform => center + scale * (2.0 * rng.random::<f64>() - 1.0),
            Family::Logistic => {
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                center + scale * (u / (1.0 - u)).ln()
            }
        }
    }
}

/// Per-context attribute distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeModel {
    pub centers: Vec<f64>,
    pub families: Vec<Family>,
    pub noise: f64,
}

impl AttributeModel {
    pub fn contexts(&self) -> usize {
        self.centers.len()
    }

    pub fn sample(&self, context: usize, rng: &mut ChaCha8Rng) -> f64 {
        self.families[context].sample(self.centers[context], self.noise, rng)
    }

    fn select(&self, keep: &[usize]) -> Self {
        Self {
            centers: keep.iter().map(|&c| self.centers[c]).collect(),
            families: keep.iter().map(|&c| self.families[c]).collect(),
            noise: self.noise,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub nodes: usize,
    pub mixing: f64,
    pub size_exponent: f64,
    pub min_community: usize,
    pub max_community: usize,
    pub degree_exponent: f64,
    pub mean_degree: f64,
    pub max_degree: usize,
    pub attribute_dim: usize,
    pub noise: f64,
    /// Noise family per community; cycles normal, uniform, logistic when empty.
    pub families: Vec<Family>,
    /// Attribute-centre group per community; pairs `2g, 2g+1` into group `g`
    /// when empty.
    pub hierarchy: Vec<usize>,
    pub anomaly_fraction: f64,
    pub perturbed_attr_fraction: f64,
    pub rng_seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            nodes: 1000,
            mixing: 0.1,
            size_exponent: 1.0,
            min_community: 50,
            max_community: 200,
            degree_exponent: 2.0,
            mean_degree: 20.0,
            max_degree: 100,
            attribute_dim: 20,
            noise: 0.1,
            families: Vec::new(),
            hierarchy: Vec::new(),
            anomaly_fraction: 0.05,
            perturbed_attr_fraction: 0.3,
            rng_seed: 0,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(0.0..1.0).contains(&self.mixing) {
            return bad(format!("mixing must lie in [0, 1), got {}", self.mixing));
        }
        if self.min_community < 2 || self.min_community > self.max_community {
            return bad(format!("community size bounds [{}, {}] are invalid", self.min_community, self.max_community));
        }
        let k_max = self.nodes / self.min_community;
        if k_max == 0 || k_max * self.max_community < self.nodes {
            return bad(format!(
                "sizes in [{}, {}] cannot tile {} nodes",
                self.min_community, self.max_community, self.nodes
            ));
        }
        if !(self.mean_degree >= 1.0 && self.mean_degree < self.max_degree as f64) {
            return bad(format!("mean degree {} must lie in [1, {})", self.mean_degree, self.max_degree));
        }
        if self.attribute_dim == 0 || !(self.noise >= 0.0) {
            return bad("attribute dimension must be positive and noise nonnegative".into());
        }
        if !(0.0..=1.0).contains(&self.anomaly_fraction) || !(0.0..=1.0).contains(&self.perturbed_attr_fraction) {
            return bad("anomaly fractions must lie in [0, 1]".into());
        }
        if self.anomaly_fraction > 0.0 && (self.anomaly_fraction * self.nodes as f64) < 1.0 {
            return bad(format!("anomaly fraction {} selects no node", self.anomaly_fraction));
        }
        Ok(())
    }
}

/// A generated network with its planted structure.
#[derive(Debug, Clone)]
pub struct SyntheticNetwork {
    /// Carries the anomaly labels.
    pub graph: AttributedGraph,
    pub truth: Partition,
    pub labels: Vec<bool>,
    pub model: AttributeModel,
}

/// Inverse-CDF draw from `x^{-exponent}` on `[a, b]`.
pub(crate) fn power_law(a: f64, b: f64, exponent: f64, u: f64) -> f64 {
    if (exponent - 1.0).abs() < 1e-12 {
        a * (b / a).powf(u)
    } else {
        let e = 1.0 - exponent;
        (a.powf(e) + u * (b.powf(e) - a.powf(e))).powf(1.0 / e)
    }
}

fn power_law_mean(a: f64, b: f64, exponent: f64) -> f64 {
    let integral = |p: f64| {
        // ∫_a^b x^p dx
        if (p + 1.0).abs() < 1e-12 {
            (b / a).ln()
        } else {
            (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)
        }
    };
    integral(1.0 - exponent) / integral(-exponent)
}

fn community_sizes(cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let (lo, hi) = (cfg.min_community, cfg.max_community);
    let mut sizes = Vec::new();
    let mut total = 0;
    while total < cfg.nodes {
        let left = cfg.nodes - total;
        let s = power_law(lo as f64, hi as f64 + 1.0, cfg.size_exponent, rng.random()).floor() as usize;
        let s = s.clamp(lo, hi).min(left);
        sizes.push(s);
        total += s;
    }
    // A short last community is filled from the others, keeping every size in bounds.
    let mut deficit = lo.saturating_sub(*sizes.last().expect("nonempty"));
    let last = sizes.len() - 1;
    sizes[last] += deficit;
    let mut i = 0;
    while deficit > 0 {
        if i == last {
            return Err(Error::Config(format!("could not tile {} nodes with sizes in [{lo}, {hi}]", cfg.nodes)));
        }
        let take = (sizes[i] - lo).min(deficit);
        sizes[i] -= take;
        deficit -= take;
        i += 1;
    }
    Ok(sizes)
}

fn degrees(cfg: &SyntheticConfig, n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let hi = cfg.max_degree as f64;
    let (mut a, mut b) = (1.0, cfg.mean_degree);
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if power_law_mean(mid, hi, cfg.degree_exponent) < cfg.mean_degree {
            a = mid;
        } else {
            b = mid;
        }
    }
    let k_min = 0.5 * (a + b);
    (0..n)
        .map(|_| {
            let k = power_law(k_min, hi, cfg.degree_exponent, rng.random()).round() as usize;
            k.clamp(1, cfg.max_degree)
        })
        .collect()
}

/// Pair up stubs, retrying rejected ones; returns accepted edges.
fn match_stubs(
    mut stubs: Vec<usize>,
    allowed: impl Fn(usize, usize) -> bool,
    edges: &mut HashSet<(usize, usize)>,
    rng: &mut ChaCha8Rng,
) {
    for _ in 0..REPAIR_ROUNDS {
        stubs.shuffle(rng);
        let mut rejected = Vec::new();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u != v && allowed(u, v) && edges.insert((u, v)) {
                continue;
            }
            rejected.extend_from_slice(pair);
        }
        if rejected.len() < 2 {
            return;
        }
        stubs = rejected;
    }
}

/// Generate a network, then inject anomalies. The result is restricted to
/// its largest connected component.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<SyntheticNetwork> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.rng_seed, "synthetic-topology", 0);
    let sizes = community_sizes(cfg, &mut rng)?;
    let c = sizes.len();
    let community: Vec<usize> = sizes.iter().enumerate().flat_map(|(i, &s)| std::iter::repeat_n(i, s)).collect();
    let n = community.len();
    let deg = degrees(cfg, n, &mut rng);

    let mut inner: Vec<Vec<usize>> = vec![Vec::new(); c];
    let mut outer = Vec::new();
    for u in 0..n {
        let x = cfg.mixing * deg[u] as f64;
        let k_out = x.floor() as usize + usize::from(rng.random::<f64>() < x.fract());
        let k_in = (deg[u] - k_out.min(deg[u])).min(sizes[community[u]] - 1);
        inner[community[u]].extend(std::iter::repeat_n(u, k_in));
        outer.extend(std::iter::repeat_n(u, k_out.min(deg[u])));
    }
    let mut edges = HashSet::new();
    for stubs in inner {
        match_stubs(stubs, |_, _| true, &mut edges, &mut rng);
    }
    if c > 1 {
        match_stubs(outer, |u, v| community[u] != community[v], &mut edges, &mut rng);
    }
    let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
    edges.sort_unstable();

    let families: Vec<Family> = (0..c)
        .map(|i| match cfg.families.is_empty() {
            true => [Family::Normal, Family::Uniform, Family::Logistic][i % 3],
            false => cfg.families[i % cfg.families.len()],
        })
        .collect();
    let centers: Vec<f64> = (0..c)
        .map(|i| match cfg.hierarchy.get(i) {
            Some(&g) => g as f64,
            None if cfg.hierarchy.is_empty() => (i / 2) as f64,
            None => i as f64,
        })
        .collect();
    let model = AttributeModel {
        centers,
        families,
        noise: cfg.noise,
    };
    let mut attr_rng = rng_for(cfg.rng_seed, "synthetic-attributes", 0);
    let attributes: Vec<Vec<f64>> = community
        .iter()
        .map(|&ci| (0..cfg.attribute_dim).map(|_| model.sample(ci, &mut attr_rng)).collect())
        .collect();
    let ids = (0..n).map(|u| format!("n{u}")).collect();
    let full = AttributedGraph::new(ids, attributes, edges, None)?;
    let (mut graph, kept) = largest_component(&full)?;
    if kept.len() < n {
        log::warn!("synthetic graph kept {} of {n} nodes in its largest component", kept.len());
    }
    let raw: Vec<usize> = kept.iter().map(|&u| community[u]).collect();
    let mut present: Vec<usize> = raw.clone();
    present.dedup();
    let truth = Partition::new(&raw);
    let model = model.select(&present);

    let labels = if cfg.anomaly_fraction > 0.0 {
        inject_anomalies(
            &mut graph,
            &truth,
            &model,
            cfg.anomaly_fraction,
            cfg.perturbed_attr_fraction,
            cfg.rng_seed,
        )?
    } else {
        vec![false; graph.node_count()]
    };
    graph.set_labels(Some(labels.clone()))?;
    Ok(SyntheticNetwork {
        graph,
        truth,
        labels,
        model,
    })
}

/// Perturb `⌊fraction·N⌋` uniformly chosen nodes by redrawing
/// `⌊attr_fraction·d⌋` of their attributes from the distribution of another,
/// uniformly chosen context. Returns the anomaly labels.
pub fn inject_anomalies(
    graph: &mut AttributedGraph,
    truth: &Partition,
    model: &AttributeModel,
    fraction: f64,
    attr_fraction: f64,
    rng_seed: u64,
) -> Result<Vec<bool>> {
    let n = graph.node_count();
    if truth.len() != n {
        return Err(Error::Shape {
            expected: n,
            got: truth.len(),
        });
    }
    if truth.num_contexts() < 2 || model.contexts() != truth.num_contexts() {
        return Err(Error::Config("anomaly injection needs at least two communities with a model each".into()));
    }
    let count = (fraction * n as f64).floor() as usize;
    if count == 0 || count > n {
        return Err(Error::Config(format!("anomaly fraction {fraction} selects {count} of {n} nodes")));
    }
    let d = graph.attribute_dim();
    let per_node = (attr_fraction * d as f64 + 1e-9).floor() as usize;
    let mut rng = rng_for(rng_seed, "anomalies", 0);
    let mut chosen = sample(&mut rng, n, count).into_vec();
    chosen.sort_unstable();
    let mut labels = vec![false; n];
    for u in chosen {
        labels[u] = true;
        let own = truth.context_of(u);
        let mut other = rng.random_range(0..truth.num_contexts() - 1);
        if other >= own {
            other += 1;
        }
        let mut dims = sample(&mut rng, d, per_node).into_vec();
        dims.sort_unstable();
        for k in dims {
            graph.attributes_mut(u)[k] = model.sample(other, &mut rng);
        }
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::connected_components;

    fn small(seed: u64) -> SyntheticConfig {
        SyntheticConfig {
            nodes: 300,
            rng_seed: seed,
            ..SyntheticConfig::default()
        }
    }

    #[test]
    fn power_law_draws_stay_in_bounds() {
        for e in [0.5, 1.0, 2.0, 3.0] {
            for u in [0.0, 0.3, 0.999] {
                let x = power_law(5.0, 50.0, e, u);
                assert!((5.0..=50.0).contains(&x));
            }
        }
        assert!((power_law_mean(1.0, 100.0, 2.0) - 100f64.ln() / 0.99).abs() < 1e-12);
    }

    #[test]
    fn respects_bounds_and_is_connected() {
        for seed in 0..5 {
            let net = generate_synthetic(&small(seed)).unwrap();
            let g = &net.graph;
            assert_eq!(connected_components(g).len(), 1);
            assert!(g.node_count() > 280);
            assert_eq!(net.labels.iter().filter(|&&l| l).count(), (0.05 * g.node_count() as f64) as usize);
            assert!(net.truth.sizes().iter().all(|&s| s <= 200));
            assert_eq!(g.attribute_dim(), 20);
        }
    }

    #[test]
    fn mean_degree_near_target() {
        let mut total = 0.0;
        for seed in 0..5 {
            let net = generate_synthetic(&SyntheticConfig { rng_seed: seed, ..SyntheticConfig::default() }).unwrap();
            total += 2.0 * net.graph.edges().len() as f64 / net.graph.node_count() as f64;
        }
        let mean = total / 5.0;
        assert!((mean - 20.0).abs() < 4.0, "mean degree {mean}");
    }

    #[test]
    fn mixing_is_close_to_target() {
        let net = generate_synthetic(&SyntheticConfig { rng_seed: 4, ..SyntheticConfig::default() }).unwrap();
        let cross = net.graph.edges().iter().filter(|&&(u, v)| net.truth.context_of(u) != net.truth.context_of(v)).count();
        let mu = cross as f64 / net.graph.edges().len() as f64;
        assert!((mu - 0.1).abs() < 0.03, "mixing {mu}");
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic(&small(7)).unwrap();
        let b = generate_synthetic(&small(7)).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.truth, b.truth);
        let c = generate_synthetic(&small(8)).unwrap();
        assert_ne!(a.graph, c.graph);
    }

    #[test]
    fn no_anomalies_means_no_labels() {
        let net = generate_synthetic(&SyntheticConfig { anomaly_fraction: 0.0, ..small(1) }).unwrap();
        assert!(net.labels.iter().all(|&l| !l));
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        let e = generate_synthetic(&SyntheticConfig { nodes: 40, ..SyntheticConfig::default() });
        assert!(matches!(e, Err(Error::Config(_))));
        let e = generate_synthetic(&SyntheticConfig { nodes: 250, min_community: 100, max_community: 110, ..SyntheticConfig::default() });
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn injection_changes_exactly_the_requested_entries() {
        let cfg = SyntheticConfig { anomaly_fraction: 0.0, ..small(3) };
        let net = generate_synthetic(&cfg).unwrap();
        let mut g = net.graph.clone();
        let n = g.node_count();
        let single = inject_anomalies(&mut g, &net.truth, &net.model, 1.5 / n as f64, 0.3, 11).unwrap();
        assert_eq!(single.iter().filter(|&&l| l).count(), 1);

        let mut g = net.graph.clone();
        let labels = inject_anomalies(&mut g, &net.truth, &net.model, 0.1, 0.3, 11).unwrap();
        for u in 0..n {
            let changed = (0..20).filter(|&k| g.attributes(u)[k] != net.graph.attributes(u)[k]).count();
            assert_eq!(changed, if labels[u] { 6 } else { 0 });
        }
        let one = Partition::all_in_one(n);
        let model1 = AttributeModel { centers: vec![0.0], families: vec![Family::Normal], noise: 0.1 };
        assert!(matches!(inject_anomalies(&mut g, &one, &model1, 0.1, 0.3, 1), Err(Error::Config(_))));
    }

    #[test]
    fn perturbed_attributes_move_away_from_the_center() {
        let cfg = SyntheticConfig {
            nodes: 200,
            anomaly_fraction: 0.0,
            hierarchy: (0..10).collect(),
            ..SyntheticConfig::default()
        };
        let net = generate_synthetic(&cfg).unwrap();
        let dist = |g: &AttributedGraph, u: usize| {
            let c = net.model.centers[net.truth.context_of(u)];
            g.attributes(u).iter().map(|x| (x - c).powi(2)).sum::<f64>()
        };
        let (mut before, mut after) = (0.0, 0.0);
        for seed in 0..100 {
            let mut g = net.graph.clone();
            let labels = inject_anomalies(&mut g, &net.truth, &net.model, 0.05, 0.3, seed).unwrap();
            for u in (0..labels.len()).filter(|&u| labels[u]) {
                before += dist(&net.graph, u);
                after += dist(&g, u);
            }
        }
        assert!(after > before);
    }

    #[test]
    fn families_have_expected_spread() {
        let mut rng = rng_for(0, "t", 0);
        for (f, var) in [(Family::Normal, 0.01), (Family::Uniform, 0.01 / 3.0), (Family::Logistic, 0.01 * std::f64::consts::PI.powi(2) / 3.0)] {
            let xs: Vec<f64> = (0..40000).map(|_| f.sample(2.0, 0.1, &mut rng)).collect();
            let (m, s) = crate::mean_std(&xs);
            assert!((m - 2.0).abs() < 0.01);
            assert!((s * s - var).abs() < 0.1 * var, "{f:?}");
        }
    }
}
