//! Heat kernel `e^{-tL}` of a graph Laplacian.
//!
//! Two evaluation routes share one output type:
//!
//! * [`exact_kernel`] diagonalises the dense Laplacian once
//!   (`L = U Λ Uᵀ`) and forms `U e^{-tΛ} Uᵀ`; [`Spectrum`] keeps the
//!   decomposition so a whole time grid costs one eigensolve.
//! * [`full_kernel_approx`] expands `λ ↦ e^{-tλ}` in Chebyshev polynomials
//!   on `[0, λ_max]` and applies the expansion to every unit impulse
//!   `δ_u`, one column at a time, using only sparse products with `L`.
//!   Columns are independent, so they are spread over a worker pool; the
//!   arithmetic for a column never depends on the pool size, which makes
//!   the assembled matrix bitwise reproducible.
//!
//! Both routes symmetrise the result as `(K + Kᵀ)/2`.

mod chebyshev;
mod exact;

pub use chebyshev::{
    cheb_apply, cheb_coefficients, concentration_values, full_kernel_approx, guarded_coefficients,
    spectral_bound, ChebCoefficients, ACCURACY_TARGET, MAX_DEGREE,
};
pub use exact::{exact_kernel, Spectrum};

use std::io::Write;

use crate::graph::LaplacianMatrix;
use crate::Result;

/// Default Chebyshev degree.
pub const DEFAULT_DEGREE: usize = 30;
/// Largest graph evaluated by dense eigendecomposition unless overridden.
pub const DEFAULT_DENSE_LIMIT: usize = 8000;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelMethod {
    Exact,
    Chebyshev { degree: usize },
}

/// Dense symmetric `N × N` evaluation of `e^{-tL}`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    order: usize,
    time: f64,
    /// Row-major; row `u` equals column `u`.
    entries: Vec<f64>,
    method: KernelMethod,
    lambda_bound: Option<f64>,
}

impl KernelMatrix {
    pub(crate) fn from_parts(
        order: usize,
        time: f64,
        mut entries: Vec<f64>,
        method: KernelMethod,
        lambda_bound: Option<f64>,
    ) -> Self {
        debug_assert_eq!(entries.len(), order * order);
        symmetrize(&mut entries, order);
        Self {
            order,
            time,
            entries,
            method,
            lambda_bound,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn method(&self) -> KernelMethod {
        self.method
    }

    /// Spectral upper bound used by the Chebyshev route.
    pub fn lambda_bound(&self) -> Option<f64> {
        self.lambda_bound
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.entries[u * self.order + v]
    }

    /// Column `u`, i.e. `e^{-tL} δ_u`.
    pub fn column(&self, u: usize) -> &[f64] {
        &self.entries[u * self.order..(u + 1) * self.order]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.chunks(self.order).map(|r| r.iter().sum()).collect()
    }

    /// `K x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.order)
            .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &KernelMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Row-major CSV with full round-trip precision.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        for row in self.entries.chunks(self.order) {
            let line: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// In-place `(K + Kᵀ)/2`, tiled for cache locality.
fn symmetrize(a: &mut [f64], n: usize) {
    const TILE: usize = 64;
    for bi in (0..n).step_by(TILE) {
        for bj in (bi..n).step_by(TILE) {
            for i in bi..(bi + TILE).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + TILE).min(n) {
                    let m = 0.5 * (a[i * n + j] + a[j * n + i]);
                    a[i * n + j] = m;
                    a[j * n + i] = m;
                }
            }
        }
    }
}

/// Route selection for [`heat_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    /// Exact up to `dense_limit` nodes, Chebyshev above.
    #[default]
    Auto,
    Exact,
    Chebyshev,
}

#[derive(Debug, Clone)]
pub struct KernelOptions {
    pub degree: usize,
    pub dense_limit: usize,
    /// Tighten `λ_max` by power iteration before building coefficients.
    pub refine_bound: bool,
    pub workers: usize,
    pub method: MethodChoice,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            degree: DEFAULT_DEGREE,
            dense_limit: DEFAULT_DENSE_LIMIT,
            refine_bound: false,
            workers: 1,
            method: MethodChoice::Auto,
        }
    }
}

impl KernelOptions {
    pub fn uses_exact(&self, order: usize) -> bool {
        match self.method {
            MethodChoice::Auto => order <= self.dense_limit,
            MethodChoice::Exact => true,
            MethodChoice::Chebyshev => false,
        }
    }
}

/// Evaluate `e^{-tL}` by whichever route `opts` selects for this size.
pub fn heat_kernel(lap: &LaplacianMatrix, t: f64, opts: &KernelOptions) -> Result<KernelMatrix> {
    KernelEngine::new(lap, opts)?.kernel(t)
}

/// A Laplacian prepared for repeated kernel evaluations over many times.
pub enum KernelEngine<'a> {
    Exact(Spectrum),
    Chebyshev {
        lap: &'a LaplacianMatrix,
        bound: f64,
        degree: usize,
        workers: usize,
    },
}

impl<'a> KernelEngine<'a> {
    pub fn new(lap: &'a LaplacianMatrix, opts: &KernelOptions) -> Result<Self> {
        if opts.uses_exact(lap.order()) {
            let limit = match opts.method {
                MethodChoice::Exact => usize::MAX,
                _ => opts.dense_limit,
            };
            Ok(KernelEngine::Exact(Spectrum::new(lap, limit)?))
        } else {
            Ok(KernelEngine::Chebyshev {
                lap,
                bound: spectral_bound(lap, opts.refine_bound),
                degree: opts.degree,
                workers: opts.workers,
            })
        }
    }

    pub fn order(&self) -> usize {
        match self {
            KernelEngine::Exact(s) => s.order(),
            KernelEngine::Chebyshev { lap, .. } => lap.order(),
        }
    }

    pub fn kernel(&self, t: f64) -> Result<KernelMatrix> {
        check_time(t)?;
        match self {
            KernelEngine::Exact(s) => Ok(s.kernel(t)),
            KernelEngine::Chebyshev {
                lap,
                bound,
                degree,
                workers,
            } => {
                let coeffs = guarded_coefficients(t, *bound, *degree);
                Ok(chebyshev::assemble(lap, &coeffs, *workers))
            }
        }
    }

    /// Node concentrations `‖e^{-tL} δ_u‖₂` without materialising the kernel.
    pub fn concentrations(&self, t: f64) -> Result<Vec<f64>> {
        check_time(t)?;
        match self {
            KernelEngine::Exact(s) => Ok(s.concentrations(t)),
            KernelEngine::Chebyshev {
                lap,
                bound,
                degree,
                workers,
            } => {
                let coeffs = guarded_coefficients(t, *bound, *degree);
                Ok(concentration_values(lap, &coeffs, *workers))
            }
        }
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::Parameter(format!("diffusion time must be finite and >= 0, got {t}")))
    }
}

/// Run `f` on a dedicated pool of `workers` threads.
pub(crate) fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(f)
}
