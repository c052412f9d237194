use std::f64::consts::PI;

use rayon::prelude::*;

use super::{with_workers, KernelMatrix, KernelMethod};
use crate::graph::LaplacianMatrix;
use crate::{Error, Result};

/// Sup-norm error tolerated for the scalar expansion of `e^{-tλ}`.
pub const ACCURACY_TARGET: f64 = 1e-6;
/// Ceiling for automatic degree escalation.
pub const MAX_DEGREE: usize = 512;
const GUARD_GRID: usize = 1000;
/// Columns advanced together through the recurrence.
const BLOCK: usize = 16;

/// Upper bound on the largest Laplacian eigenvalue.
///
/// The default `2 · max_u d_u` is always valid. With `refine`, 50 power
/// iterations estimate `λ_max` and the estimate is inflated by 1%.
pub fn spectral_bound(lap: &LaplacianMatrix, refine: bool) -> f64 {
    let dmax = lap.strengths().iter().copied().fold(0.0, f64::max);
    let cheap = if dmax > 0.0 { 2.0 * dmax } else { 1.0 };
    if !refine {
        return cheap;
    }
    let n = lap.order();
    let mut x: Vec<f64> = (0..n).map(|u| 1.0 + 0.1 * (u % 7) as f64 + 0.01 * (u % 3) as f64).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let mut y = vec![0.0; n];
    let mut rayleigh = 0.0;
    for _ in 0..50 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return cheap;
        }
        x.iter_mut().for_each(|v| *v /= norm);
        lap.mul_vec(&x, &mut y);
        rayleigh = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        std::mem::swap(&mut x, &mut y);
    }
    (1.01 * rayleigh).min(cheap)
}

/// Chebyshev expansion of `λ ↦ e^{-tλ}` on `[0, λ_max]`.
///
/// Stored as `c_0 … c_m` in the convention `f ≈ c_0/2 + Σ_{k≥1} c_k T_k(x)`
/// with `λ = (λ_max/2)(x + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebCoefficients {
    pub time: f64,
    pub lambda_max: f64,
    pub values: Vec<f64>,
}

impl ChebCoefficients {
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    /// Evaluate the expansion at `λ` (Clenshaw recurrence).
    pub fn evaluate(&self, lambda: f64) -> f64 {
        let x = 2.0 * lambda / self.lambda_max - 1.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.values[1..].iter().rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + 0.5 * self.values[0]
    }

    /// Largest deviation from `e^{-tλ}` over `points` evenly spaced values
    /// of `λ` in `[0, λ_max]`.
    pub fn sup_error(&self, points: usize) -> f64 {
        let points = points.max(2);
        (0..points)
            .map(|j| {
                let l = self.lambda_max * j as f64 / (points - 1) as f64;
                (self.evaluate(l) - (-self.time * l).exp()).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Degree-`m` coefficients by Gauss–Chebyshev quadrature on `m + 1` nodes.
pub fn cheb_coefficients(t: f64, lambda_max: f64, m: usize) -> ChebCoefficients {
    assert!(lambda_max > 0.0, "lambda_max must be positive");
    assert!(m >= 1, "degree must be at least 1");
    let nodes = m + 1;
    let theta: Vec<f64> = (0..nodes).map(|j| PI * (j as f64 + 0.5) / nodes as f64).collect();
    let f: Vec<f64> = theta
        .iter()
        .map(|th| (-t * 0.5 * lambda_max * (th.cos() + 1.0)).exp())
        .collect();
    let values = (0..=m)
        .map(|k| {
            2.0 / nodes as f64
                * theta
                    .iter()
                    .zip(&f)
                    .map(|(th, fj)| fj * (k as f64 * th).cos())
                    .sum::<f64>()
        })
        .collect();
    ChebCoefficients {
        time: t,
        lambda_max,
        values,
    }
}

/// Coefficients of at least degree `m`, doubled (up to [`MAX_DEGREE`])
/// until the scalar sup-error drops below [`ACCURACY_TARGET`].
pub fn guarded_coefficients(t: f64, lambda_max: f64, m: usize) -> ChebCoefficients {
    let mut degree = m.max(1);
    loop {
        let c = cheb_coefficients(t, lambda_max, degree);
        let err = c.sup_error(GUARD_GRID);
        if err <= ACCURACY_TARGET || degree >= MAX_DEGREE {
            if err > ACCURACY_TARGET {
                log::warn!(
                    "Chebyshev degree {degree} still has error {err:.2e} at t={t}, lambda_max={lambda_max}"
                );
            } else if degree != m {
                log::warn!("raised Chebyshev degree from {m} to {degree} for t={t}, lambda_max={lambda_max}");
            }
            return c;
        }
        degree = (degree * 2).min(MAX_DEGREE);
    }
}

/// One recurrence step for `W` interleaved signals, fused into a single
/// pass over the rows: `next = 2·L̃·cur - prev` (or `L̃·cur` when `first`),
/// then `out += ck · next`.
#[allow(clippy::too_many_arguments)]
fn recurrence_step<const W: usize>(
    lap: &LaplacianMatrix,
    scale: f64,
    cur: &[f64],
    prev: &[f64],
    next: &mut [f64],
    out: &mut [f64],
    ck: f64,
    first: bool,
) {
    let (row_ptr, cols, vals) = lap.csr();
    for u in 0..lap.order() {
        let mut acc = [0.0; W];
        for k in row_ptr[u]..row_ptr[u + 1] {
            let v = vals[k];
            let src: &[f64; W] = cur[cols[k] * W..(cols[k] + 1) * W].try_into().unwrap();
            for c in 0..W {
                acc[c] += v * src[c];
            }
        }
        let r = u * W..(u + 1) * W;
        let (cur_u, prev_u) = (&cur[r.clone()], &prev[r.clone()]);
        let (next_u, out_u) = (&mut next[r.clone()], &mut out[r]);
        for c in 0..W {
            let shifted = scale * acc[c] - cur_u[c];
            let nx = if first { shifted } else { 2.0 * shifted - prev_u[c] };
            next_u[c] = nx;
            out_u[c] += ck * nx;
        }
    }
}

/// Accumulate `Σ c_k T_k(L̃) x` with `L̃ = (2/λ_max) L - I` for `W`
/// interleaved signals.
fn apply_block<const W: usize>(lap: &LaplacianMatrix, coeffs: &ChebCoefficients, x: &[f64]) -> Vec<f64> {
    let scale = 2.0 / coeffs.lambda_max;
    let c = &coeffs.values;
    let mut out: Vec<f64> = x.iter().map(|v| 0.5 * c[0] * v).collect();
    let mut prev = x.to_vec();
    let mut cur = vec![0.0; x.len()];
    recurrence_step::<W>(lap, scale, &prev, &prev, &mut cur, &mut out, c[1], true);
    let mut next = vec![0.0; x.len()];
    for &ck in &c[2..] {
        recurrence_step::<W>(lap, scale, &cur, &prev, &mut next, &mut out, ck, false);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    out
}

/// Polynomial filter applied to one node signal; never forms a dense matrix.
pub fn cheb_apply(lap: &LaplacianMatrix, coeffs: &ChebCoefficients, signal: &[f64]) -> Result<Vec<f64>> {
    if signal.len() != lap.order() {
        return Err(Error::Shape {
            expected: lap.order(),
            got: signal.len(),
        });
    }
    Ok(apply_block::<1>(lap, coeffs, signal))
}

/// Filtered impulses for columns `first .. first + width`, interleaved with
/// stride [`BLOCK`]; lanes past `width` stay zero.
fn impulse_block(lap: &LaplacianMatrix, coeffs: &ChebCoefficients, first: usize, width: usize) -> Vec<f64> {
    let n = lap.order();
    let mut x = vec![0.0; n * BLOCK];
    for c in 0..width {
        x[(first + c) * BLOCK + c] = 1.0;
    }
    apply_block::<BLOCK>(lap, coeffs, &x)
}

pub(crate) fn assemble(lap: &LaplacianMatrix, coeffs: &ChebCoefficients, workers: usize) -> KernelMatrix {
    let n = lap.order();
    let mut entries = vec![0.0; n * n];
    with_workers(workers, || {
        entries.par_chunks_mut(BLOCK * n).enumerate().for_each(|(b, chunk)| {
            let first = b * BLOCK;
            let width = chunk.len() / n;
            let block = impulse_block(lap, coeffs, first, width);
            for (c, col) in chunk.chunks_mut(n).enumerate() {
                for (v, slot) in col.iter_mut().enumerate() {
                    *slot = block[v * BLOCK + c];
                }
            }
        });
    });
    KernelMatrix::from_parts(
        n,
        coeffs.time,
        entries,
        KernelMethod::Chebyshev {
            degree: coeffs.degree(),
        },
        Some(coeffs.lambda_max),
    )
}

/// `e^{-tL}` assembled column by column from Chebyshev-filtered impulses.
///
/// The degree starts at `m` and is raised automatically when the expansion
/// is not accurate enough for `t · λ_max`.
pub fn full_kernel_approx(lap: &LaplacianMatrix, t: f64, m: usize, workers: usize) -> Result<KernelMatrix> {
    super::check_time(t)?;
    if m == 0 {
        return Err(Error::Parameter("Chebyshev degree must be at least 1".into()));
    }
    let coeffs = guarded_coefficients(t, spectral_bound(lap, false), m);
    Ok(assemble(lap, &coeffs, workers))
}

/// Column norms `‖p(L) δ_u‖₂` for every node, computed block by block
/// without storing the kernel.
pub fn concentration_values(lap: &LaplacianMatrix, coeffs: &ChebCoefficients, workers: usize) -> Vec<f64> {
    let n = lap.order();
    let mut out = vec![0.0; n];
    with_workers(workers, || {
        out.par_chunks_mut(BLOCK).enumerate().for_each(|(b, slots)| {
            let width = slots.len();
            let block = impulse_block(lap, coeffs, b * BLOCK, width);
            for (c, slot) in slots.iter_mut().enumerate() {
                *slot = (0..n).map(|v| block[v * BLOCK + c].powi(2)).sum::<f64>().sqrt();
            }
        });
    });
    out
}
