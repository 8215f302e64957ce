//! H-eigenpairs of nonnegative and Metzler tensors.
//!
//! The spectral radius of a nonnegative tensor is computed with the
//! Collatz–Wielandt power iteration: at every step
//!
//! ```text
//! y = B x^{k-1},   lo = min_i y_i / x_i^{k-1},   hi = max_i y_i / x_i^{k-1}
//! ```
//!
//! bracket `rho(B)` for weakly irreducible `B`, and the iterate is updated as
//! `x <- y^{[1/(k-1)]} / ||.||_inf`. Iteration stops once `hi - lo <= tol`.
//! When `B` has a zero diagonal entry the iteration runs on `B + I` instead,
//! which keeps the eigenvector and makes the iteration primitive.

use crate::error::{Error, Result};
use crate::tensor::{CubicalTensor, EigenPair};

#[derive(Debug, Clone)]
pub struct PowerIterationConfig {
    /// Target width of the Collatz–Wielandt bracket.
    pub tol: f64,
    pub max_iter: usize,
    /// Strictly positive start vector; `None` means all ones.
    pub start: Option<Vec<f64>>,
}

impl Default for PowerIterationConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100_000,
            start: None,
        }
    }
}

/// Output of a power iteration run.
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub pair: EigenPair,
    pub iterations: usize,
    /// Bracket width at termination.
    pub gap: f64,
    /// `(lo, hi)` per iteration, in the coordinates of the iterated tensor.
    pub bounds: Vec<(f64, f64)>,
    /// Total diagonal shift `s` with `lambda = rho(A + s I) - s`.
    pub shift: f64,
}

// Ratios y_i / x_i^{k-1} carry a rounding error of a few ulps of hi; the
// bracket is never asked to close below this.
fn rounding_floor(hi: f64) -> f64 {
    64.0 * f64::EPSILON * hi.abs()
}

fn start_vector(cfg: &PowerIterationConfig, n: usize) -> Result<Vec<f64>> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {}", cfg.tol)));
    }
    let x = cfg.start.clone().unwrap_or_else(|| vec![1.0; n]);
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "start vector must be strictly positive; entry {} is {}",
            i + 1,
            x[i]
        )));
    }
    let m = x.iter().copied().fold(0.0, f64::max);
    Ok(x.into_iter().map(|v| v / m).collect())
}

/// `rho(B)` and its positive eigenvector for a nonnegative, weakly irreducible `B`.
pub fn spectral_radius_nonnegative(b: &CubicalTensor, cfg: &PowerIterationConfig) -> Result<SpectralSolution> {
    if let Some((idx, w)) = b.entries().find(|(_, w)| *w < crate::tensor::NONNEG_TOL) {
        return Err(Error::InvalidArgument(format!(
            "tensor has negative entry {w} at {:?}",
            idx.iter().map(|i| i + 1).collect::<Vec<_>>()
        )));
    }
    let pre = if b.diagonal().iter().any(|&d| d <= 0.0) { 1.0 } else { 0.0 };
    let work = if pre > 0.0 { b.shift_diagonal(pre) } else { b.clone() };
    let n = b.dim();
    let p = b.order() as i32 - 1;
    let inv_p = 1.0 / p as f64;

    let mut x = start_vector(cfg, n)?;
    let mut y = vec![0.0; n];
    let mut bounds = Vec::new();
    let mut gap = f64::INFINITY;
    for iter in 1..=cfg.max_iter {
        work.apply_into(&x, &mut y);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (i, (&yi, &xi)) in y.iter().zip(&x).enumerate() {
            if !(yi > 0.0) || !yi.is_finite() {
                return Err(Error::Reducible(format!(
                    "component {} of B x^{{k-1}} vanished at iteration {iter}; \
                     the tensor is not weakly irreducible",
                    i + 1
                )));
            }
            let r = yi / xi.powi(p);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        bounds.push((lo, hi));
        gap = hi - lo;
        if gap <= cfg.tol.max(rounding_floor(hi)) {
            let lambda = 0.5 * (lo + hi) - pre;
            let pair = EigenPair::new(b, lambda, x)?;
            return Ok(SpectralSolution {
                pair,
                iterations: iter,
                gap,
                bounds,
                shift: pre,
            });
        }
        for (xi, &yi) in x.iter_mut().zip(&y) {
            *xi = yi.powf(inv_p);
        }
        let m = x.iter().copied().fold(0.0, f64::max);
        x.iter_mut().for_each(|v| *v /= m);
        if x.iter().any(|&v| v == 0.0) {
            return Err(Error::Reducible(format!(
                "iterate lost a component at iteration {iter}; the tensor is not weakly irreducible"
            )));
        }
    }
    if !b.weak_irreducibility() {
        return Err(Error::Reducible(format!(
            "no convergence after {} iterations (gap {gap:e}) and the influence digraph is not strongly connected",
            cfg.max_iter
        )));
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iter,
        gap,
    })
}

/// Perron eigenpair of a Metzler tensor `A = B - s I`: `lambda(A) = rho(B) - s`
/// with the positive eigenvector of `B`. The residual is evaluated on `A`.
pub fn perron_metzler(a: &CubicalTensor, cfg: &PowerIterationConfig) -> Result<SpectralSolution> {
    perron_metzler_shifted(a, 0.0, cfg)
}

/// [`perron_metzler`] with `extra` added on top of the minimal Metzler shift.
pub fn perron_metzler_shifted(a: &CubicalTensor, extra: f64, cfg: &PowerIterationConfig) -> Result<SpectralSolution> {
    if !(extra >= 0.0) {
        return Err(Error::InvalidArgument(format!("extra shift must be >= 0, got {extra}")));
    }
    let (b, s) = a.decompose_metzler()?;
    let b = if extra > 0.0 { b.shift_diagonal(extra) } else { b };
    let sol = spectral_radius_nonnegative(&b, cfg)?;
    let total = s + extra;
    let pair = EigenPair::new(a, sol.pair.lambda - total, sol.pair.x)?;
    Ok(SpectralSolution {
        pair,
        shift: sol.shift + total,
        ..sol
    })
}

/// Outcome of checking `L x^{k-1} = 0` for a positive candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPerronReport {
    /// `||L x^{k-1}||_inf / ||x||_inf^{k-1}`.
    pub residual: f64,
    pub passed: bool,
}

pub const ZERO_PERRON_TOL: f64 = 1e-10;

pub fn verify_zero_perron(l: &CubicalTensor, candidate: &[f64]) -> Result<ZeroPerronReport> {
    if let Some(i) = candidate.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "candidate must be strictly positive; entry {} is {}",
            i + 1,
            candidate[i]
        )));
    }
    let lx = l.apply(candidate)?;
    let scale = candidate.iter().copied().fold(0.0, f64::max).powi(l.order() as i32 - 1);
    let residual = lx.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale;
    Ok(ZeroPerronReport {
        residual,
        passed: residual < ZERO_PERRON_TOL,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommonPerron {
    /// Shared eigenvector, normalized to unit max-norm.
    Shared(Vec<f64>),
    /// The tensor at position `tensor` breaks the shared zero Perron pair.
    Failed { tensor: usize, reason: String },
}

/// Perron eigenvalue tolerance for [`common_perron_check`].
pub const COMMON_LAMBDA_TOL: f64 = 1e-8;
/// Eigenvector agreement tolerance (max-norm, after normalization).
pub const COMMON_VECTOR_TOL: f64 = 1e-8;

/// Checks that every tensor has Perron eigenvalue zero with one shared eigenvector.
pub fn common_perron_check(tensors: &[CubicalTensor], cfg: &PowerIterationConfig) -> Result<CommonPerron> {
    let Some(first) = tensors.first() else {
        return Err(Error::InvalidArgument("no tensors given".into()));
    };
    if let Some(t) = tensors.iter().find(|t| t.dim() != first.dim()) {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            got: t.dim(),
        });
    }
    let mut shared: Option<Vec<f64>> = None;
    for (t, tensor) in tensors.iter().enumerate() {
        let pair = perron_metzler(tensor, cfg)?.pair;
        if pair.lambda.abs() > COMMON_LAMBDA_TOL {
            return Ok(CommonPerron::Failed {
                tensor: t,
                reason: format!("Perron eigenvalue {} is not zero", pair.lambda),
            });
        }
        match &shared {
            None => shared = Some(pair.x),
            Some(x) => {
                let diff = x.iter().zip(&pair.x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                if diff > COMMON_VECTOR_TOL {
                    return Ok(CommonPerron::Failed {
                        tensor: t,
                        reason: format!("eigenvector differs by {diff:e} in max-norm"),
                    });
                }
            }
        }
    }
    Ok(CommonPerron::Shared(shared.expect("at least one tensor")))
}
