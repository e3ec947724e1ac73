//! Error norms, error maps and slices against a reference field.
//!
//! `l2` is the root-mean-square error over the inside nodes (a mean, not a sum,
//! so values are comparable across resolutions). Boundary nodes are excluded:
//! every method is exact there by construction. Reductions run sequentially in
//! row-major order so reports are reproducible bit for bit.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{self, ScalarField};
use crate::scalar::Real;

/// Diagnostics attached to a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Flags {
    /// Inside nodes where `v` was raised to the positivity floor.
    pub clamped: usize,
    pub not_converged: bool,
    /// Stage and message of a failed run.
    pub failure: Option<String>,
}

impl Flags {
    pub fn is_clean(&self) -> bool {
        self.clamped == 0 && !self.not_converged && self.failure.is_none()
    }

    pub fn merge(&mut self, other: &Flags) {
        self.clamped += other.clamped;
        self.not_converged |= other.not_converged;
        if self.failure.is_none() {
            self.failure.clone_from(&other.failure);
        }
    }
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.clamped > 0 {
            parts.push(format!("clamp={}", self.clamped));
        }
        if self.not_converged {
            parts.push("noconv".to_string());
        }
        if let Some(msg) = &self.failure {
            parts.push(format!("failed:{}", msg.replace([',', '\n'], " ")));
        }
        f.write_str(&parts.join(";"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub method: String,
    pub normalized: bool,
    /// `t = 1/λ²` of the run (for convolutional methods the same conversion of `λ`).
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
    pub n_nodes: usize,
    pub flags: Flags,
}

impl ErrorReport {
    pub fn new<T: Real>(method: impl Into<String>, normalized: bool, t: f64, approx: &ScalarField<T>, exact: &ScalarField<T>) -> Result<Self> {
        Ok(ErrorReport {
            method: method.into(),
            normalized,
            t,
            l2: error_l2(approx, exact)?.to_f64_lossy(),
            linf: error_linf(approx, exact)?.to_f64_lossy(),
            n_nodes: approx.mask().inside_count(),
            flags: Flags::default(),
        })
    }

    /// A row standing in for a run that failed.
    pub fn failed(method: impl Into<String>, normalized: bool, t: f64, message: impl Into<String>) -> Self {
        ErrorReport {
            method: method.into(),
            normalized,
            t,
            l2: f64::NAN,
            linf: f64::NAN,
            n_nodes: 0,
            flags: Flags { failure: Some(message.into()), ..Flags::default() },
        }
    }
}

fn differences<'a, T: Real>(approx: &'a ScalarField<T>, exact: &'a ScalarField<T>) -> Result<impl Iterator<Item = T> + 'a> {
    approx.ensure_same_mask(exact)?;
    Ok(approx
        .mask()
        .inside_nodes()
        .iter()
        .map(move |&i| approx.at(i) - exact.at(i)))
}

/// `sqrt((1/N) Σ (approx − exact)²)` over the inside nodes.
pub fn error_l2<T: Real>(approx: &ScalarField<T>, exact: &ScalarField<T>) -> Result<T> {
    let n = T::from_usize_lossy(approx.mask().inside_count());
    let sum: T = differences(approx, exact)?.map(|d| d * d).sum();
    Ok((sum / n).sqrt())
}

/// Largest absolute difference over the inside nodes.
pub fn error_linf<T: Real>(approx: &ScalarField<T>, exact: &ScalarField<T>) -> Result<T> {
    Ok(differences(approx, exact)?.fold(T::zero(), |m, d| m.max(d.abs())))
}

/// `|approx − exact|` on the inside nodes, 0 on `∂Ω`, undefined elsewhere.
pub fn error_map<T: Real>(approx: &ScalarField<T>, exact: &ScalarField<T>) -> Result<ScalarField<T>> {
    let diffs: Vec<T> = differences(approx, exact)?.map(T::abs).collect();
    Ok(ScalarField::from_unknowns(approx.mask(), &diffs, T::zero()))
}

/// `(column, value)` pairs along `row`, restricted to inside nodes.
pub fn slice_extract<T: Real>(field: &ScalarField<T>, row: usize) -> Result<Vec<(usize, T)>> {
    let mask = field.mask();
    if row >= mask.height() {
        return Err(Error::EmptySlice { row });
    }
    let series: Vec<_> = (0..mask.width())
        .filter(|&x| mask.is_inside(x, row))
        .map(|x| (x, field.get(x, row)))
        .collect();
    if series.is_empty() {
        return Err(Error::EmptySlice { row });
    }
    Ok(series)
}

/// `|∇field|` from central differences at the inside nodes, 0 on `∂Ω`.
pub fn gradient_magnitude_map<T: Real>(field: &ScalarField<T>) -> ScalarField<T> {
    let g = grid::gradient(field);
    let mags: Vec<T> = field.mask().inside_nodes().iter().map(|&i| g.norm_at(i)).collect();
    ScalarField::from_unknowns(field.mask(), &mags, T::zero())
}
