//! One estimator run on one mask, shared by the command-line tools and tests.

use std::fmt;
use std::str::FromStr;

use crate::conv::{self, ConvOptions, DEFAULT_K};
use crate::edt;
use crate::error::{Error, Result};
use crate::estimators::{self, EstimatorKind, NormalizationScheme};
use crate::grid::{extract_boundary, BinaryMask, ScalarField};
use crate::metrics::{ErrorReport, Flags};
use crate::poisson::{solve_bundle, SolveOptions, SolverConfig};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    LogConv,
    SoftMin,
    Blend,
    Pde(EstimatorKind),
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Exact,
        Method::LogConv,
        Method::SoftMin,
        Method::Blend,
        Method::Pde(EstimatorKind::HeatLog),
        Method::Pde(EstimatorKind::Taylor1),
        Method::Pde(EstimatorKind::Taylor2),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::LogConv => "logconv",
            Method::SoftMin => "softmin",
            Method::Blend => "blend",
            Method::Pde(kind) => kind.name(),
        }
    }

    /// Whether gradient normalization applies (the screened-Poisson family).
    pub fn is_differential(self) -> bool {
        matches!(self, Method::Pde(_))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "edt" => Ok(Method::Exact),
            "logconv" => Ok(Method::LogConv),
            "softmin" => Ok(Method::SoftMin),
            "blend" => Ok(Method::Blend),
            other => other
                .parse::<EstimatorKind>()
                .map(Method::Pde)
                .map_err(|_| Error::Parse(format!("unknown method `{other}`"))),
        }
    }
}

/// Parameters of a single run. `t = 1/λ²` for every method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub lambda: f64,
    pub k: f64,
    pub boundary_dim: u32,
    /// Normalize the gradient of differential estimates; ignored by the others.
    pub normalize: bool,
    /// `λ^d` factor inside LogConv. The blend always uses it.
    pub prefactor: bool,
    /// Overrides the scalar type's default CG tolerance.
    pub rel_tol: Option<f64>,
    pub scheme: NormalizationScheme,
}

impl RunParams {
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::BadConfig(format!("lambda must be positive, got {lambda}")));
        }
        Ok(RunParams {
            lambda,
            k: DEFAULT_K,
            boundary_dim: 1,
            normalize: true,
            prefactor: true,
            rel_tol: None,
            scheme: NormalizationScheme::default(),
        })
    }

    pub fn from_t(t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::BadConfig(format!("t must be positive, got {t}")));
        }
        Self::from_lambda(t.sqrt().recip())
    }

    pub fn t(&self) -> f64 {
        (self.lambda * self.lambda).recip()
    }

    fn solve_options<T: Real>(&self) -> SolveOptions<T> {
        let mut opts = self.rel_tol.map(|tol| SolveOptions::with_tol(T::lit(tol))).unwrap_or_default();
        opts.best_effort = true;
        opts
    }
}

/// A distance estimate and the diagnostics raised while computing it.
#[derive(Debug, Clone)]
pub struct MethodRun<T> {
    pub method: Method,
    pub normalized: bool,
    pub field: ScalarField<T>,
    pub flags: Flags,
}

/// Computes `method` on `mask`. Non-convergent solves yield their best iterate
/// and set `not_converged` instead of failing.
pub fn run_method<T: Real>(mask: &BinaryMask, method: Method, params: &RunParams) -> Result<MethodRun<T>> {
    let lambda = T::lit(params.lambda);
    let mut flags = Flags::default();
    let boundary = || extract_boundary::<T>(mask);
    let conv_opts = || ConvOptions {
        include_prefactor: params.prefactor,
        boundary_dim: params.boundary_dim,
        ..ConvOptions::new(lambda)
    };
    let normalized = params.normalize && method.is_differential();
    let field = match method {
        Method::Exact => edt::edt_fast(mask, &boundary()),
        Method::SoftMin => conv::softmin_field(mask, &boundary(), &conv_opts())?,
        Method::LogConv => conv::logconv_field(mask, &boundary(), &conv_opts())?,
        Method::Blend => conv::conv_estimates(mask, &boundary(), &conv_opts(), T::lit(params.k))?.blend,
        Method::Pde(kind) => {
            let solve = params.solve_options::<T>();
            let config = SolverConfig::from_lambda(lambda)?.with_solve(solve);
            let bundle = solve_bundle(mask, &config)?;
            flags.not_converged |= !bundle.converged;
            let est = estimators::estimate(&bundle, kind);
            flags.clamped += est.clamped;
            if normalized {
                let n = estimators::normalize_gradient_with(&est.field, params.scheme, &solve)?;
                flags.not_converged |= !n.converged;
                n.field
            } else {
                est.field
            }
        }
    };
    Ok(MethodRun { method, normalized, field, flags })
}

/// Runs `method` and scores it against `exact`. Errors become a failed report.
pub fn evaluate<T: Real>(mask: &BinaryMask, exact: &ScalarField<T>, method: Method, params: &RunParams) -> ErrorReport {
    let normalized = params.normalize && method.is_differential();
    let run = run_method(mask, method, params).and_then(|run| {
        let mut report = ErrorReport::new(method.name(), run.normalized, params.t(), &run.field, exact)?;
        report.flags = run.flags;
        Ok(report)
    });
    run.unwrap_or_else(|e| ErrorReport::failed(method.name(), normalized, params.t(), e.to_string()))
}

/// `n` points from `lo` to `hi` inclusive, geometric when `log` is set.
pub fn parameter_grid(lo: f64, hi: f64, n: usize, log: bool) -> Result<Vec<f64>> {
    if n == 0 || !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(Error::BadConfig(format!("bad grid [{lo}, {hi}] with {n} points")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = |k: usize| k as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|k| match k {
            0 => lo,
            k if k == n - 1 => hi,
            k if log => (lo.ln() + (hi.ln() - lo.ln()) * step(k)).exp(),
            k => lo + (hi - lo) * step(k),
        })
        .collect())
}
