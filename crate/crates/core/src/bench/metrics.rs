//! Ranking and classification metrics for binary anomaly labels.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed::rng_for;
use crate::{Error, Result};

fn check(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Shape {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Metric("scores contain NaN".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    Ok((pos, labels.len() - pos))
}

/// Groups of equal scores in descending order, as index lists.
fn tie_groups(scores: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for u in order {
        match groups.last_mut() {
            Some(g) if scores[g[0]] == scores[u] => g.push(u),
            _ => groups.push(vec![u]),
        }
    }
    groups
}

/// Probability that a random positive outscores a random negative, ties ½.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = check(scores, labels)?;
    if pos == 0 || neg == 0 {
        return Err(Error::Metric("ROC-AUC needs both classes".into()));
    }
    // Mann-Whitney with midranks, ranks ascending from 1.
    let groups = tie_groups(scores);
    let n = scores.len();
    let mut above = 0usize;
    let mut rank_sum = 0.0;
    for g in &groups {
        let low = n - above - g.len() + 1;
        let mid = (low + n - above) as f64 / 2.0;
        rank_sum += mid * g.iter().filter(|&&u| labels[u]).count() as f64;
        above += g.len();
    }
    let p = pos as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Average precision with tied scores entering together.
pub fn pr_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, _) = check(scores, labels)?;
    if pos == 0 {
        return Err(Error::Metric("PR-AUC needs at least one positive".into()));
    }
    let (mut tp, mut seen, mut ap) = (0usize, 0usize, 0.0);
    for g in tie_groups(scores) {
        let hits = g.iter().filter(|&&u| labels[u]).count();
        tp += hits;
        seen += g.len();
        if hits > 0 {
            ap += (tp as f64 / seen as f64) * (hits as f64 / pos as f64);
        }
    }
    Ok(ap)
}

/// Confusion counts and derived rates for a flagged set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// Precision of the anomaly class; 0 when nothing is flagged.
    pub precision: f64,
    pub recall: f64,
    /// Per-class F1 averaged with class-support weights.
    pub f1_weighted: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn prf1(flagged: &[usize], labels: &[bool]) -> Result<Classification> {
    let mut hit = vec![false; labels.len()];
    for &u in flagged {
        *hit.get_mut(u)
            .ok_or_else(|| Error::Reference(format!("flagged node {u} outside 0..{}", labels.len())))? = true;
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&h, &l) in hit.iter().zip(labels) {
        match (h, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1_pos = f1(precision, recall);
    let f1_neg = f1(ratio(tn, tn + fn_), ratio(tn, tn + fp));
    let n = labels.len().max(1) as f64;
    let pos = (tp + fn_) as f64;
    Ok(Classification {
        precision,
        recall,
        f1_weighted: (pos * f1_pos + (n - pos) * f1_neg) / n,
        tp,
        fp,
        tn,
        fn_,
    })
}

/// All detection metrics for one score vector and flagged set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub roc_auc: f64,
    pub pr_auc: f64,
    #[serde(flatten)]
    pub classification: Classification,
}

pub fn evaluate(scores: &[f64], labels: &[bool], flagged: &[usize]) -> Result<EvalResult> {
    Ok(EvalResult {
        roc_auc: roc_auc(scores, labels)?,
        pr_auc: pr_auc(scores, labels)?,
        classification: prf1(flagged, labels)?,
    })
}

/// Uniform scores in `[0, 1)`.
pub fn random_baseline(n: usize, rng_seed: u64) -> Vec<f64> {
    let mut rng = rng_for(rng_seed, "random-baseline", 0);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
        let (mut won, mut total) = (0.0, 0.0);
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    total += 1.0;
                    won += match scores[i].partial_cmp(&scores[j]).unwrap() {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Equal => 0.5,
                        std::cmp::Ordering::Less => 0.0,
                    };
                }
            }
        }
        won / total
    }

    #[test]
    fn roc_examples() {
        assert_eq!(roc_auc(&[0.9, 0.1], &[true, false]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.8, 0.7, 0.6, 0.5], &[true, false, true, false]).unwrap(), 0.75);
        assert_eq!(roc_auc(&[0.3; 5], &[true, false, true, false, false]).unwrap(), 0.5);
        assert!(matches!(roc_auc(&[0.1, 0.2], &[true, true]), Err(Error::Metric(_))));
    }

    #[test]
    fn pr_examples() {
        assert_eq!(pr_auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap(), 1.0);
        assert_eq!(pr_auc(&[0.9, 0.1], &[false, true]).unwrap(), 0.5);
        assert_abs_diff_eq!(pr_auc(&[0.5; 7], &[true, false, true, false, false, true, false]).unwrap(), 3.0 / 7.0, epsilon = 1e-15);
        assert!(pr_auc(&[0.5, 0.2], &[false, false]).is_err());
    }

    #[test]
    fn prf1_examples() {
        let labels = [true, false, true, false];
        let exact = prf1(&[0, 2], &labels).unwrap();
        assert_eq!((exact.precision, exact.recall, exact.f1_weighted), (1.0, 1.0, 1.0));
        let none = prf1(&[], &labels).unwrap();
        assert_eq!((none.precision, none.recall), (0.0, 0.0));

        let mut labels = [false; 10];
        labels[0] = true;
        labels[1] = true;
        let r = prf1(&[0, 5], &labels).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_, r.tn), (1, 1, 1, 7));
        assert_eq!((r.precision, r.recall), (0.5, 0.5));
        // F1 = 2tp / (2tp + fp + fn) per class
        let f1_neg = 14.0 / 16.0;
        let f1_pos = 2.0 / 4.0;
        assert_abs_diff_eq!(r.f1_weighted, 0.8 * f1_neg + 0.2 * f1_pos, epsilon = 1e-12);
        assert_abs_diff_eq!(r.f1_weighted, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn random_baseline_is_near_half() {
        let labels: Vec<bool> = (0..200).map(|i| i % 2 == 0).collect();
        let mean: f64 = (0..200).map(|s| roc_auc(&random_baseline(200, s), &labels).unwrap()).sum::<f64>() / 200.0;
        assert!((mean - 0.5).abs() < 0.05);
        assert_eq!(random_baseline(10, 3), random_baseline(10, 3));
        assert!(random_baseline(1000, 1).iter().all(|x| (0.0..1.0).contains(x)));
    }

    fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (2usize..40).prop_flat_map(|n| {
            (prop::collection::vec(0u8..6, n).prop_map(|v| v.into_iter().map(f64::from).collect()),
             prop::collection::vec(any::<bool>(), n))
        })
        .prop_filter("both classes", |(_, l)| l.iter().any(|&x| x) && l.iter().any(|&x| !x))
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise_oracle((s, l) in scored()) {
            prop_assert!((roc_auc(&s, &l).unwrap() - pairwise_auc(&s, &l)).abs() < 1e-12);
        }

        #[test]
        fn auc_invariant_under_monotone_maps((s, l) in scored()) {
            let t: Vec<f64> = s.iter().map(|x| (x * 0.7).exp() + 3.0).collect();
            prop_assert!((roc_auc(&s, &l).unwrap() - roc_auc(&t, &l).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn auc_complements(l in prop::collection::vec(any::<bool>(), 2..40), seed in 0u64..500) {
            prop_assume!(l.iter().any(|&x| x) && l.iter().any(|&x| !x));
            let s = random_baseline(l.len(), seed);
            let neg: Vec<f64> = s.iter().map(|x| -x).collect();
            prop_assert!((roc_auc(&s, &l).unwrap() + roc_auc(&neg, &l).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
