//! Convolutional distance estimators: log-sum-exp ("LogConv"), the
//! self-normalised soft minimum ("SoftMin"), and their weighted blend.
//!
//! Both kernels are evaluated in shifted form: with `φ_min` factored out every
//! exponent is `≤ 0`, so nothing overflows and the dominant term is exactly 1.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, BoundarySet, ScalarField};
use crate::scalar::Real;

/// Default kernel truncation threshold.
pub const DEFAULT_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvOptions<T> {
    /// Sharpness `λ` (inverse length).
    pub lambda: T,
    /// Multiply the LogConv sum by `λ^d`.
    pub include_prefactor: bool,
    /// Samples whose kernel weight relative to the nearest one falls below this are
    /// skipped. `None` disables truncation.
    pub cutoff_epsilon: Option<T>,
    /// Dimension `d` of the boundary manifold (1 for planar shapes).
    pub boundary_dim: u32,
}

impl<T: Real> ConvOptions<T> {
    pub fn new(lambda: T) -> Self {
        ConvOptions {
            lambda,
            include_prefactor: true,
            cutoff_epsilon: Some(T::lit(DEFAULT_CUTOFF)),
            boundary_dim: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > T::zero() && self.lambda.is_finite()) {
            return Err(Error::BadConfig(format!("lambda must be positive, got {}", self.lambda)));
        }
        if let Some(eps) = self.cutoff_epsilon {
            if !(eps > T::zero() && eps < T::one()) {
                return Err(Error::BadConfig(format!("cutoff epsilon must lie in (0, 1), got {eps}")));
            }
        }
        if !(1..=2).contains(&self.boundary_dim) {
            return Err(Error::BadConfig(format!("boundary dimension must be 1 or 2, got {}", self.boundary_dim)));
        }
        Ok(())
    }

    /// `λ^d` when the prefactor is enabled, otherwise 1.
    pub fn prefactor(&self) -> T {
        if self.include_prefactor {
            self.lambda.powi(self.boundary_dim as i32)
        } else {
            T::one()
        }
    }
}

/// Soft minimum split as `φ_min + excess`; `excess ≥ 0` always.
///
/// `excess = Σ w_k (φ_k − φ_min) e_k / Σ w_k e_k` with `e_k = exp(−λ(φ_k − φ_min))`.
pub fn softmin_parts<T: Real>(phi: &[T], weights: &[T], lambda: T, cutoff: Option<T>) -> Result<(T, T)> {
    let min = min_of(phi);
    let max_exp = cutoff.map_or(T::infinity(), |eps| -eps.ln());
    let (mut num, mut den) = (T::zero(), T::zero());
    for (&p, &w) in phi.iter().zip(weights) {
        let gap = p - min;
        let a = lambda * gap;
        if a > max_exp {
            continue;
        }
        let e = w * (-a).exp();
        num = num + gap * e;
        den = den + e;
    }
    if !(den > T::zero()) {
        return Err(Error::DegenerateSum);
    }
    Ok((min, num / den))
}

/// `Σ_k w_k φ_k e^{−λφ_k} / Σ_k w_k e^{−λφ_k}`.
pub fn softmin<T: Real>(phi: &[T], weights: &[T], lambda: T, cutoff: Option<T>) -> Result<T> {
    let (min, excess) = softmin_parts(phi, weights, lambda, cutoff)?;
    Ok(min + excess)
}

/// LogConv split as `φ_min − deficit` with
/// `deficit = (1/λ) log[P Σ_k w_k e^{−λ(φ_k − φ_min)}]`.
///
/// For unit weights and `P = 1` the sum is at least 1, so `deficit ≥ 0`. The sum of
/// the non-minimal terms goes through `ln_1p` to keep tiny contributions visible.
pub fn logconv_parts<T: Real>(phi: &[T], weights: &[T], lambda: T, prefactor: T, cutoff: Option<T>) -> (T, T) {
    let min = min_of(phi);
    let max_exp = cutoff.map_or(T::infinity(), |eps| -eps.ln());
    let arg = phi
        .iter()
        .position(|&p| p == min)
        .expect("non-empty sample set");
    let lead = weights[arg];
    let mut rest = T::zero();
    for (k, (&p, &w)) in phi.iter().zip(weights).enumerate() {
        let a = lambda * (p - min);
        if k == arg || a > max_exp {
            continue;
        }
        rest = rest + w * (-a).exp();
    }
    let deficit = ((prefactor * lead).ln() + (rest / lead).ln_1p()) / lambda;
    (min, deficit)
}

/// `−(1/λ) log[P Σ_k w_k e^{−λφ_k}]`.
pub fn logconv<T: Real>(phi: &[T], weights: &[T], lambda: T, prefactor: T, cutoff: Option<T>) -> T {
    let (min, deficit) = logconv_parts(phi, weights, lambda, prefactor, cutoff);
    min - deficit
}

fn min_of<T: Real>(phi: &[T]) -> T {
    assert!(!phi.is_empty(), "empty sample set");
    phi.iter().copied().fold(T::infinity(), T::min)
}

/// Evaluates `kernel(φ, w)` at every inside node, with `φ_k = h‖x − p_k‖`.
fn conv_field<T: Real>(
    mask: &BinaryMask,
    boundary: &BoundarySet<T>,
    kernel: impl Fn(&[T], &[T]) -> Result<T> + Sync,
) -> Result<ScalarField<T>> {
    let h = T::lit(mask.spacing());
    let pts: Vec<(T, T)> = boundary
        .points
        .iter()
        .map(|&(x, y)| (T::from_usize_lossy(x), T::from_usize_lossy(y)))
        .collect();
    let values: Vec<T> = mask
        .inside_nodes()
        .par_iter()
        .map_init(
            || Vec::with_capacity(pts.len()),
            |phi, &i| {
                let (x, y) = mask.coords(i);
                let (x, y) = (T::from_usize_lossy(x), T::from_usize_lossy(y));
                phi.clear();
                phi.extend(pts.iter().map(|&(px, py)| h * (x - px).hypot(y - py)));
                kernel(phi, &boundary.weights)
            },
        )
        .collect::<Result<_>>()?;
    Ok(ScalarField::from_unknowns(mask, &values, T::zero()))
}

pub fn softmin_field<T: Real>(mask: &BinaryMask, boundary: &BoundarySet<T>, opts: &ConvOptions<T>) -> Result<ScalarField<T>> {
    opts.validate()?;
    conv_field(mask, boundary, |phi, w| softmin(phi, w, opts.lambda, opts.cutoff_epsilon))
}

pub fn logconv_field<T: Real>(mask: &BinaryMask, boundary: &BoundarySet<T>, opts: &ConvOptions<T>) -> Result<ScalarField<T>> {
    opts.validate()?;
    let p = opts.prefactor();
    conv_field(mask, boundary, |phi, w| Ok(logconv(phi, w, opts.lambda, p, opts.cutoff_epsilon)))
}

/// Weights that cancel the leading asymptotic errors of SoftMin (`+K/λ`) and
/// LogConv (`−(d/2) log λ / λ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendConfig<T> {
    pub k: T,
    pub alpha: T,
    pub beta: T,
}

/// Default heuristic constant `K`.
pub const DEFAULT_K: f64 = 0.1;

/// `α = d log λ / (2K + d log λ)`, `β = 2K / (2K + d log λ)`.
pub fn blend_weights<T: Real>(lambda: T, k: T, d: u32) -> Result<(T, T)> {
    if !(lambda > T::one()) {
        return Err(Error::BadLambda(lambda.to_f64_lossy()));
    }
    if !(k > T::zero() && k.is_finite()) {
        return Err(Error::BadConfig(format!("K must be positive, got {k}")));
    }
    if !(1..=2).contains(&d) {
        return Err(Error::BadConfig(format!("boundary dimension must be 1 or 2, got {d}")));
    }
    let dl = T::from_u32(d).unwrap() * lambda.ln();
    let two_k = k + k;
    let den = two_k + dl;
    Ok((dl / den, two_k / den))
}

impl<T: Real> BlendConfig<T> {
    pub fn new(lambda: T, k: T, d: u32) -> Result<Self> {
        let (alpha, beta) = blend_weights(lambda, k, d)?;
        Ok(BlendConfig { k, alpha, beta })
    }
}

/// `α·soft + β·logc` node-wise; `logc` is expected to carry the `λ^d` prefactor.
pub fn blend_field<T: Real>(soft: &ScalarField<T>, logc: &ScalarField<T>, cfg: &BlendConfig<T>) -> Result<ScalarField<T>> {
    soft.zip_with(logc, |s, l| cfg.alpha * s + cfg.beta * l)
}

/// SoftMin, prefactored LogConv and their blend for one `λ`.
#[derive(Debug, Clone)]
pub struct ConvEstimates<T> {
    pub softmin: ScalarField<T>,
    pub logconv: ScalarField<T>,
    pub blend: ScalarField<T>,
    pub config: BlendConfig<T>,
}

pub fn conv_estimates<T: Real>(
    mask: &BinaryMask,
    boundary: &BoundarySet<T>,
    opts: &ConvOptions<T>,
    k: T,
) -> Result<ConvEstimates<T>> {
    let config = BlendConfig::new(opts.lambda, k, opts.boundary_dim)?;
    let softmin = softmin_field(mask, boundary, opts)?;
    let logconv = logconv_field(mask, boundary, &ConvOptions { include_prefactor: true, ..*opts })?;
    let blend = blend_field(&softmin, &logconv, &config)?;
    Ok(ConvEstimates { softmin, logconv, blend, config })
}
