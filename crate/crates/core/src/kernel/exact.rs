use nalgebra::{DMatrix, SymmetricEigen};

use super::{KernelMatrix, KernelMethod};
use crate::graph::LaplacianMatrix;
use crate::{Error, Result};

/// Full eigendecomposition `L = U Λ Uᵀ`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    order: usize,
    values: Vec<f64>,
    /// `vectors[u * n + i] = U_{u i}`.
    vectors: Vec<f64>,
}

impl Spectrum {
    pub fn new(lap: &LaplacianMatrix, dense_limit: usize) -> Result<Self> {
        let n = lap.order();
        if n > dense_limit {
            return Err(Error::Size(format!(
                "{n} nodes exceeds the dense limit of {dense_limit}; use the Chebyshev route"
            )));
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &lap.to_dense()));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = vec![0.0; n * n];
        for (new, &old) in order.iter().enumerate() {
            for u in 0..n {
                vectors[u * n + new] = eig.eigenvectors[(u, old)];
            }
        }
        Ok(Self {
            order: n,
            values,
            vectors,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Second-smallest eigenvalue (algebraic connectivity).
    pub fn fiedler_value(&self) -> f64 {
        self.values.get(1).copied().unwrap_or(0.0)
    }

    /// Beyond this, `e^{-tλ₂}` is negligible next to `1/N` and the kernel
    /// equals the rank-one projection `11ᵀ/N` to machine precision.
    fn saturated(&self, t: f64) -> bool {
        let l2 = self.fiedler_value();
        l2 > 0.0 && (-t * l2).exp() < 1e-12 / self.order as f64
    }

    pub fn kernel(&self, t: f64) -> KernelMatrix {
        let n = self.order;
        if self.saturated(t) {
            return KernelMatrix::from_parts(n, t, vec![1.0 / n as f64; n * n], KernelMethod::Exact, None);
        }
        // K = V Vᵀ with V = U e^{-tΛ/2}.
        let half: Vec<f64> = self.values.iter().map(|l| (-0.5 * t * l).exp()).collect();
        let v = DMatrix::from_fn(n, n, |u, i| self.vectors[u * n + i] * half[i]);
        let k = &v * v.transpose();
        let mut entries = vec![0.0; n * n];
        for u in 0..n {
            for w in 0..n {
                entries[u * n + w] = k[(u, w)];
            }
        }
        KernelMatrix::from_parts(n, t, entries, KernelMethod::Exact, None)
    }

    /// `c_u(t)² = Σ_i e^{-2tλ_i} U_{ui}²`, the squared column norm.
    pub fn concentrations(&self, t: f64) -> Vec<f64> {
        let n = self.order;
        if self.saturated(t) {
            return vec![(1.0 / n as f64).sqrt(); n];
        }
        let decay: Vec<f64> = self.values.iter().map(|l| (-2.0 * t * l).exp()).collect();
        (0..n)
            .map(|u| {
                let row = &self.vectors[u * n..(u + 1) * n];
                row.iter().zip(&decay).map(|(x, d)| d * x * x).sum::<f64>().sqrt()
            })
            .collect()
    }
}

/// `e^{-tL}` by dense symmetric eigendecomposition.
pub fn exact_kernel(lap: &LaplacianMatrix, t: f64, dense_limit: usize) -> Result<KernelMatrix> {
    super::check_time(t)?;
    Ok(Spectrum::new(lap, dense_limit)?.kernel(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn edge() -> LaplacianMatrix {
        LaplacianMatrix::from_weighted_edges(2, [(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let lap = LaplacianMatrix::from_weighted_edges(4, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0)]).unwrap();
        let k = exact_kernel(&lap, 0.0, 100).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                assert_abs_diff_eq!(k.get(u, v), if u == v { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_edge_closed_form() {
        for t in [0.1, 0.5, 1.0, 3.0] {
            let k = exact_kernel(&edge(), t, 10).unwrap();
            let e = (-2.0 * t).exp();
            assert_abs_diff_eq!(k.get(0, 0), (1.0 + e) / 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(k.get(0, 1), (1.0 - e) / 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(k.get(1, 0), (1.0 - e) / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn large_time_projects_onto_constants() {
        let lap = LaplacianMatrix::from_weighted_edges(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
        let k = exact_kernel(&lap, 1e4, 100).unwrap();
        assert!(k.entries().iter().all(|&x| (x - 0.2).abs() < 1e-12));
        let k = exact_kernel(&lap, 40.0, 100).unwrap();
        assert!(k.entries().iter().all(|&x| (x - 0.2).abs() < 1e-6));
    }

    #[test]
    fn respects_dense_limit() {
        assert!(matches!(exact_kernel(&edge(), 1.0, 1), Err(Error::Size(_))));
        assert!(matches!(exact_kernel(&edge(), -1.0, 10), Err(Error::Parameter(_))));
    }

    #[test]
    fn spectrum_of_triangle() {
        let lap = LaplacianMatrix::from_weighted_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let s = Spectrum::new(&lap, 10).unwrap();
        assert_abs_diff_eq!(s.eigenvalues()[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues()[1], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues()[2], 3.0, epsilon = 1e-12);
    }
}
