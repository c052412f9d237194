//! Node concentration after heat diffusion, and the outlier threshold.
//!
//! The concentration of node `u` at scale `t` is `c_u(t) = ‖e^{-tL} δ_u‖₂`.
//! It starts at 1 and decays towards `1/√N` as the impulse spreads; a node
//! joined to its neighbours only by weak (attribute-dissimilar) edges keeps
//! its heat longer. Nodes with `c_u(t) ≥ mean + 2·std` are flagged.

use serde::Serialize;

use crate::graph::LaplacianMatrix;
use crate::kernel::{cheb_apply, guarded_coefficients, spectral_bound, KernelMatrix};
use crate::{mean_std, Error, Result};

/// Per-node concentrations at one diffusion time.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationProfile {
    pub time: f64,
    pub values: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl ConcentrationProfile {
    pub fn new(time: f64, values: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&values);
        Self {
            time,
            values,
            mean,
            std,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Column norms of the kernel.
pub fn concentration_profile(kernel: &KernelMatrix) -> ConcentrationProfile {
    let values = (0..kernel.order())
        .map(|u| kernel.column(u).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    ConcentrationProfile::new(kernel.time(), values)
}

/// Ranked scores and the flagged set at one scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnomalyReport {
    pub time: f64,
    /// Node indices by descending score, ties by ascending index.
    pub ranking: Vec<usize>,
    pub scores: Vec<f64>,
    pub threshold: f64,
    /// Ascending node indices with `score ≥ threshold`.
    pub flagged: Vec<usize>,
    /// Context id per node, when a partition at the same scale is known.
    pub contexts: Option<Vec<usize>>,
}

impl AnomalyReport {
    pub fn is_flagged(&self, u: usize) -> bool {
        self.flagged.binary_search(&u).is_ok()
    }

    /// 1-based rank of every node.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.scores.len()];
        for (r, &u) in self.ranking.iter().enumerate() {
            ranks[u] = r + 1;
        }
        ranks
    }
}

/// Relative spread under which a profile counts as constant; absorbs
/// rounding noise in otherwise identical concentrations.
const FLAT_PROFILE: f64 = 1e-12;
/// Relative slack on the inclusive comparison, so values that tie the
/// threshold in exact arithmetic are not lost to rounding.
const TIE_SLACK: f64 = 1e-12;

/// `mean + 2·std` and the nodes reaching it. Constant profiles flag nothing.
pub fn threshold_rule(scores: &[f64]) -> (f64, Vec<usize>) {
    let (mean, std) = mean_std(scores);
    let threshold = mean + 2.0 * std;
    if std <= FLAT_PROFILE * mean.abs() {
        return (threshold, Vec::new());
    }
    let flagged = scores
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= threshold - TIE_SLACK * threshold.abs())
        .map(|(u, _)| u)
        .collect();
    (threshold, flagged)
}

/// Descending order of `scores`, ties broken by ascending index.
pub fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut ranking: Vec<usize> = (0..scores.len()).collect();
    ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    ranking
}

pub fn detect(profile: &ConcentrationProfile) -> AnomalyReport {
    let (threshold, flagged) = threshold_rule(&profile.values);
    AnomalyReport {
        time: profile.time,
        ranking: rank_descending(&profile.values),
        scores: profile.values.clone(),
        threshold,
        flagged,
        contexts: None,
    }
}

/// Concentration of a single node over several times, via one Chebyshev
/// filter per time (no kernel matrix is built).
pub fn concentration_curve(
    lap: &LaplacianMatrix,
    node: usize,
    times: &[f64],
    degree: usize,
) -> Result<Vec<f64>> {
    let n = lap.order();
    if node >= n {
        return Err(Error::Parameter(format!("node index {node} out of range for {n} nodes")));
    }
    if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Parameter("times must be non-negative and ascending".into()));
    }
    let bound = spectral_bound(lap, false);
    let mut impulse = vec![0.0; n];
    impulse[node] = 1.0;
    times
        .iter()
        .map(|&t| {
            let y = cheb_apply(lap, &guarded_coefficients(t, bound, degree), &impulse)?;
            Ok(y.iter().map(|v| v * v).sum::<f64>().sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::exact_kernel;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn edge() -> LaplacianMatrix {
        LaplacianMatrix::from_weighted_edges(2, [(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn identity_kernel_gives_unit_concentration() {
        let p = concentration_profile(&exact_kernel(&edge(), 0.0, 10).unwrap());
        assert!(p.values.iter().all(|c| (c - 1.0).abs() < 1e-12));
        assert!(detect(&p).flagged.is_empty());
    }

    #[test]
    fn single_edge_closed_form() {
        // c(t) = sqrt((1 + e^{-4t}) / 2)
        let p = concentration_profile(&exact_kernel(&edge(), 1.0, 10).unwrap());
        let expect = ((1.0 + (-4f64).exp()) / 2.0).sqrt();
        assert_abs_diff_eq!(p.values[0], expect, epsilon = 1e-12);
        assert_abs_diff_eq!(expect, 0.713553, epsilon = 1e-6);
    }

    #[test]
    fn large_time_limit() {
        let lap = LaplacianMatrix::from_weighted_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let p = concentration_profile(&exact_kernel(&lap, 200.0, 10).unwrap());
        assert!(p.values.iter().all(|c| (c - 0.5).abs() < 1e-9));
    }

    #[test]
    fn threshold_examples() {
        let r = detect(&ConcentrationProfile::new(0.0, vec![0.9, 0.1, 0.1, 0.1, 0.1]));
        assert_abs_diff_eq!(r.threshold, 0.9, epsilon = 1e-12);
        // 0.26 + 2·0.32 lands on 0.9 up to rounding; the rule is inclusive.
        let (mean, std) = mean_std(&r.scores);
        assert_abs_diff_eq!(mean, 0.26, epsilon = 1e-12);
        assert_abs_diff_eq!(std, 0.32, epsilon = 1e-12);
        assert_eq!(r.flagged, vec![0]);
        let r = detect(&ConcentrationProfile::new(0.0, vec![0.5, 0.5, 0.6]));
        assert_abs_diff_eq!(r.threshold, 0.6276, epsilon = 1e-4);
        assert!(r.flagged.is_empty());
        let r = detect(&ConcentrationProfile::new(0.0, vec![0.3; 6]));
        assert!(r.flagged.is_empty());
    }

    #[test]
    fn ties_at_threshold_are_flagged() {
        // mean 1, std 2 -> threshold 5, reached exactly by the single outlier
        let mut v = vec![0.5; 16];
        v[3] = 9.0;
        let r = detect(&ConcentrationProfile::new(0.0, v.clone()));
        let (mean, std) = mean_std(&v);
        assert_eq!(r.threshold, mean + 2.0 * std);
        assert_eq!(r.flagged, vec![3]);
        assert_eq!(r.ranking[0], 3);
        assert_eq!(&r.ranking[1..4], &[0, 1, 2]);
    }

    #[test]
    fn curve_examples() {
        let c0 = concentration_curve(&edge(), 0, &[0.0], 30).unwrap();
        assert_eq!(c0.len(), 1);
        assert_abs_diff_eq!(c0[0], 1.0, epsilon = 1e-10);
        let c = concentration_curve(&edge(), 1, &[0.0, 1.0], 30).unwrap();
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c[1], ((1.0 + (-4f64).exp()) / 2.0).sqrt(), epsilon = 1e-10);
        assert!(concentration_curve(&edge(), 2, &[0.0], 30).is_err());
        assert!(concentration_curve(&edge(), 0, &[1.0, 0.5], 30).is_err());
    }

    proptest! {
        #[test]
        fn threshold_scale_invariant(values in prop::collection::vec(0.01f64..1.0, 5..40), k in 0.1f64..50.0) {
            let a = detect(&ConcentrationProfile::new(0.0, values.clone()));
            let scaled: Vec<f64> = values.iter().map(|v| v * k).collect();
            let b = detect(&ConcentrationProfile::new(0.0, scaled));
            // Compare away from exact-threshold ties, where rounding may differ.
            let (mean, std) = mean_std(&values);
            let thr = mean + 2.0 * std;
            prop_assume!(values.iter().all(|v| (v - thr).abs() > 1e-9 * thr));
            prop_assert_eq!(a.flagged, b.flagged);
        }

        #[test]
        fn curve_is_non_increasing(w in prop::collection::vec(0.1f64..3.0, 5), node in 0usize..6) {
            let edges: Vec<_> = (0..5).map(|i| (i, i + 1, w[i])).collect();
            let lap = LaplacianMatrix::from_weighted_edges(6, edges).unwrap();
            let times: Vec<f64> = (0..20).map(|i| 0.1 * i as f64).collect();
            let c = concentration_curve(&lap, node, &times, 30).unwrap();
            for pair in c.windows(2) {
                prop_assert!(pair[1] <= pair[0] + 1e-8);
            }
        }
    }
}
