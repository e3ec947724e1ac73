//! Screened Poisson problem `−Δv + λ²v = 0` in `Ω`, `v = 1` on `∂Ω`, and the
//! two systems obtained by differentiating it in `λ`.
//!
//! All three share the operator `A = −Δ_h + λ²I` on the inside nodes (5-point
//! Laplacian, Dirichlet neighbours moved to the right-hand side); only the
//! right-hand sides differ. Solves use Jacobi-preconditioned conjugate gradients.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, NodeKind, ScalarField};
use crate::scalar::Real;

/// Stopping rule for [`solve_spd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions<T> {
    /// Target `‖Ax − b‖ / ‖b‖`.
    pub rel_tol: T,
    /// Iteration cap; `None` means ten times the number of unknowns.
    pub max_iters: Option<usize>,
    /// Return the best iterate instead of [`Error::NoConvergence`] at the cap.
    pub best_effort: bool,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions {
            rel_tol: T::lit(T::DEFAULT_REL_TOL),
            max_iters: None,
            best_effort: false,
        }
    }
}

impl<T: Real> SolveOptions<T> {
    pub fn with_tol(rel_tol: T) -> Self {
        SolveOptions { rel_tol, max_iters: None, best_effort: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.rel_tol <= T::lit(1e-4)) {
            return Err(Error::BadConfig(format!("rel_tol must lie in (0, 1e-4], got {}", self.rel_tol)));
        }
        Ok(())
    }
}

/// Screening parameter plus solver settings. `λ` and `t = 1/λ²` are kept in sync.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    lambda: T,
    t: T,
    pub solve: SolveOptions<T>,
}

impl<T: Real> SolverConfig<T> {
    pub fn from_lambda(lambda: T) -> Result<Self> {
        if !(lambda > T::zero() && lambda.is_finite()) {
            return Err(Error::BadConfig(format!("lambda must be positive, got {lambda}")));
        }
        Ok(SolverConfig {
            lambda,
            t: (lambda * lambda).recip(),
            solve: SolveOptions::default(),
        })
    }

    /// `λ = 1/√t`.
    pub fn from_t(t: T) -> Result<Self> {
        if !(t > T::zero() && t.is_finite()) {
            return Err(Error::BadConfig(format!("t must be positive, got {t}")));
        }
        Ok(SolverConfig {
            lambda: t.sqrt().recip(),
            t,
            solve: SolveOptions::default(),
        })
    }

    pub fn with_solve(mut self, solve: SolveOptions<T>) -> Self {
        self.solve = solve;
        self
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn t(&self) -> T {
        self.t
    }
}

/// A symmetric positive definite operator acting on unknown vectors.
pub trait SpdOperator<T>: Sync {
    fn size(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
    /// `|A| |x|` with entrywise absolute values.
    fn apply_abs(&self, x: &[T], y: &mut [T]);
    fn diagonal(&self) -> Vec<T>;
}

const DIRICHLET: usize = usize::MAX;

/// Matrix-free `−Δ_h + λ²I` restricted to the inside nodes of a mask.
#[derive(Debug, Clone)]
pub struct ScreenedOperator<T> {
    mask: BinaryMask,
    lambda: T,
    inv_h2: T,
    /// Unknown numbers of the four neighbours, `DIRICHLET` for boundary nodes.
    neighbours: Vec<[usize; 4]>,
}

pub fn assemble_operator<T: Real>(mask: &BinaryMask, lambda: T) -> ScreenedOperator<T> {
    let h = T::lit(mask.spacing());
    let neighbours = mask
        .inside_nodes()
        .iter()
        .map(|&i| mask.neighbours(i).map(|j| mask.unknown_index(j).unwrap_or(DIRICHLET)))
        .collect();
    ScreenedOperator {
        mask: mask.clone(),
        lambda,
        inv_h2: (h * h).recip(),
        neighbours,
    }
}

impl<T: Real> ScreenedOperator<T> {
    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// `4/h² + λ²`, identical for every unknown.
    pub fn diagonal_entry(&self) -> T {
        T::lit(4.0) * self.inv_h2 + self.lambda * self.lambda
    }

    /// `(1/h²) · #Dirichlet neighbours` for every unknown: the right-hand side
    /// produced by unit boundary data.
    pub fn dirichlet_load(&self) -> Vec<T> {
        self.neighbours
            .iter()
            .map(|nb| T::from_usize_lossy(nb.iter().filter(|&&j| j == DIRICHLET).count()) * self.inv_h2)
            .collect()
    }
}

impl<T: Real> ScreenedOperator<T> {
    fn rows(&self, x: &[T], y: &mut [T], absolute: bool) {
        let diag = self.diagonal_entry();
        let row = |(u, nb): (usize, &[usize; 4])| {
            let off: T = nb
                .iter()
                .map(|&j| if j == DIRICHLET { T::zero() } else if absolute { x[j].abs() } else { x[j] })
                .sum();
            if absolute {
                diag * x[u].abs() + self.inv_h2 * off
            } else {
                diag * x[u] - self.inv_h2 * off
            }
        };
        if self.size() >= 4096 {
            y.par_iter_mut()
                .zip(self.neighbours.par_iter().enumerate())
                .for_each(|(out, item)| *out = row(item));
        } else {
            y.iter_mut()
                .zip(self.neighbours.iter().enumerate())
                .for_each(|(out, item)| *out = row(item));
        }
    }
}

impl<T: Real> SpdOperator<T> for ScreenedOperator<T> {
    fn size(&self) -> usize {
        self.neighbours.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.rows(x, y, false);
    }

    fn apply_abs(&self, x: &[T], y: &mut [T]) {
        self.rows(x, y, true);
    }

    fn diagonal(&self) -> Vec<T> {
        vec![self.diagonal_entry(); self.size()]
    }
}

/// Outcome of a conjugate-gradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    /// Best iterate found (the converged one when `converged`).
    pub x: Vec<T>,
    /// True relative residual `‖Ax − b‖ / ‖b‖` of `x`.
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> Solution<T> {
    pub fn check(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence {
                iterations: self.iterations,
                residual: self.residual.to_f64_lossy(),
            })
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// `out = b − A x`; returns `‖out‖`.
fn true_residual<T: Real>(op: &impl SpdOperator<T>, x: &[T], b: &[T], out: &mut [T]) -> T {
    op.apply(x, out);
    for (o, &bi) in out.iter_mut().zip(b) {
        *o = bi - *o;
    }
    dot(out, out).sqrt()
}

/// Componentwise backward error test `|r_i| ≤ tol · (|A||x| + |b|)_i`. Entries whose
/// scale is below `min_positive / ε` count as converged.
fn componentwise_ok<T: Real>(op: &impl SpdOperator<T>, x: &[T], r: &[T], b: &[T], tol: T, scratch: &mut [T]) -> bool {
    op.apply_abs(x, scratch);
    let floor = T::min_positive_value() / T::epsilon();
    r.iter()
        .zip(scratch.iter())
        .zip(b)
        .all(|((&ri, &ax), &bi)| ri.abs() <= tol * (ax + bi.abs()).max(floor))
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
///
/// Stops when `‖b − Ax‖ ≤ rel_tol · ‖b‖` and, node by node, the residual is below
/// `rel_tol` times `(|A||x| + |b|)_i`. The second test keeps exponentially small
/// entries accurate in relative terms. Deterministic: all reductions run
/// sequentially in index order. When the recursively updated residual passes but
/// the true residual does not, the iteration restarts from the current iterate.
pub fn solve_spd<T: Real>(op: &impl SpdOperator<T>, rhs: &[T], opts: &SolveOptions<T>) -> Solution<T> {
    let n = op.size();
    assert_eq!(rhs.len(), n, "rhs length");
    let b_norm = dot(rhs, rhs).sqrt();
    if b_norm == T::zero() {
        return Solution { x: vec![T::zero(); n], residual: T::zero(), iterations: 0, converged: true };
    }
    let tol = opts.rel_tol;
    let max_iters = opts.max_iters.unwrap_or(10 * n.max(1));
    let target = tol * b_norm;
    let inv_diag: Vec<T> = op.diagonal().into_iter().map(T::recip).collect();

    let mut x = vec![T::zero(); n];
    let mut r = rhs.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&a, &d)| a * d).collect();
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut scratch = vec![T::zero(); n];
    let mut rz = dot(&r, &z);

    let mut best = x.clone();
    let mut best_norm = b_norm;
    let mut iterations = 0;

    while iterations < max_iters {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rz / pap;
        for ((xi, ri), (&pi, &api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *xi = *xi + alpha * pi;
            *ri = *ri - alpha * api;
        }
        iterations += 1;

        let r_norm = dot(&r, &r).sqrt();
        if r_norm < best_norm {
            best_norm = r_norm;
            best.copy_from_slice(&x);
        }
        if r_norm <= target && componentwise_ok(op, &x, &r, rhs, tol, &mut scratch) {
            let actual = true_residual(op, &x, rhs, &mut ap);
            if actual <= target && componentwise_ok(op, &x, &ap, rhs, tol, &mut scratch) {
                return Solution { x, residual: actual / b_norm, iterations, converged: true };
            }
            // drift between recursive and true residual: restart from x
            r.copy_from_slice(&ap);
            best_norm = actual;
            best.copy_from_slice(&x);
            for ((zi, &ri), &d) in z.iter_mut().zip(&r).zip(&inv_diag) {
                *zi = ri * d;
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }

        for ((zi, &ri), &d) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * d;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, &zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }

    let actual = true_residual(op, &best, rhs, &mut ap);
    let converged = actual <= target && componentwise_ok(op, &best, &ap, rhs, tol, &mut scratch);
    Solution { x: best, residual: actual / b_norm, iterations, converged }
}

/// A solved field together with its solver statistics.
#[derive(Debug, Clone)]
pub struct SolvedField<T> {
    pub field: ScalarField<T>,
    pub residual: T,
    pub iterations: usize,
    /// False only for best-effort solves that hit the iteration cap.
    pub converged: bool,
}

pub(crate) fn solve_to_field<T: Real>(
    op: &ScreenedOperator<T>,
    rhs: &[T],
    opts: &SolveOptions<T>,
    boundary_value: T,
) -> Result<SolvedField<T>> {
    let mut sol = solve_spd(op, rhs, opts);
    let converged = sol.converged;
    if !opts.best_effort {
        sol = sol.check()?;
    }
    Ok(SolvedField {
        field: ScalarField::from_unknowns(op.mask(), &sol.x, boundary_value),
        residual: sol.residual,
        iterations: sol.iterations,
        converged,
    })
}

/// `A v = b` with unit Dirichlet data; `v = 1` is written on the boundary nodes.
pub fn solve_v_with<T: Real>(op: &ScreenedOperator<T>, opts: &SolveOptions<T>) -> Result<SolvedField<T>> {
    solve_to_field(op, &op.dirichlet_load(), opts, T::one())
}

/// `A v′ = −2λ v` with zero Dirichlet data.
pub fn solve_vprime_with<T: Real>(op: &ScreenedOperator<T>, opts: &SolveOptions<T>, v: &ScalarField<T>) -> Result<SolvedField<T>> {
    let two_lambda = T::lit(2.0) * op.lambda();
    let rhs: Vec<T> = v.unknowns().into_iter().map(|vi| -two_lambda * vi).collect();
    solve_to_field(op, &rhs, opts, T::zero())
}

/// `A v″ = −2v − 4λ v′` with zero Dirichlet data.
pub fn solve_vsecond_with<T: Real>(
    op: &ScreenedOperator<T>,
    opts: &SolveOptions<T>,
    v: &ScalarField<T>,
    v_prime: &ScalarField<T>,
) -> Result<SolvedField<T>> {
    let four_lambda = T::lit(4.0) * op.lambda();
    let two = T::lit(2.0);
    let rhs: Vec<T> = v
        .unknowns()
        .into_iter()
        .zip(v_prime.unknowns())
        .map(|(vi, dvi)| -two * vi - four_lambda * dvi)
        .collect();
    solve_to_field(op, &rhs, opts, T::zero())
}

pub fn solve_v<T: Real>(mask: &BinaryMask, config: &SolverConfig<T>) -> Result<ScalarField<T>> {
    config.solve.validate()?;
    let op = assemble_operator(mask, config.lambda());
    Ok(solve_v_with(&op, &config.solve)?.field)
}

pub fn solve_vprime<T: Real>(mask: &BinaryMask, config: &SolverConfig<T>, v: &ScalarField<T>) -> Result<ScalarField<T>> {
    config.solve.validate()?;
    v.mask().same_as(mask).then_some(()).ok_or(Error::MaskMismatch)?;
    let op = assemble_operator(mask, config.lambda());
    Ok(solve_vprime_with(&op, &config.solve, v)?.field)
}

pub fn solve_vsecond<T: Real>(
    mask: &BinaryMask,
    config: &SolverConfig<T>,
    v: &ScalarField<T>,
    v_prime: &ScalarField<T>,
) -> Result<ScalarField<T>> {
    config.solve.validate()?;
    v.ensure_same_mask(v_prime)?;
    v.mask().same_as(mask).then_some(()).ok_or(Error::MaskMismatch)?;
    let op = assemble_operator(mask, config.lambda());
    Ok(solve_vsecond_with(&op, &config.solve, v, v_prime)?.field)
}

/// `v`, `∂v/∂λ` and `∂²v/∂λ²` at one `λ`.
#[derive(Debug, Clone)]
pub struct PdeBundle<T> {
    pub v: ScalarField<T>,
    pub v_prime: ScalarField<T>,
    pub v_second: ScalarField<T>,
    pub lambda: T,
    /// Relative residuals of the three solves, in order.
    pub residuals: [T; 3],
    pub converged: bool,
}

/// Runs the three chained solves on a single assembled operator.
pub fn solve_bundle<T: Real>(mask: &BinaryMask, config: &SolverConfig<T>) -> Result<PdeBundle<T>> {
    config.solve.validate()?;
    let op = assemble_operator(mask, config.lambda());
    let v = solve_v_with(&op, &config.solve)?;
    let dv = solve_vprime_with(&op, &config.solve, &v.field)?;
    let d2v = solve_vsecond_with(&op, &config.solve, &v.field, &dv.field)?;
    Ok(PdeBundle {
        residuals: [v.residual, dv.residual, d2v.residual],
        converged: v.converged && dv.converged && d2v.converged,
        v: v.field,
        v_prime: dv.field,
        v_second: d2v.field,
        lambda: config.lambda(),
    })
}

impl<T: Real> PdeBundle<T> {
    /// The bundle an exact distance `d` would produce: `v = e^{−λd}`, `v′ = −d·v`,
    /// `v″ = d²·v`, with zero residuals.
    pub fn from_distance(d: &ScalarField<T>, lambda: T) -> Self {
        let mask = d.mask();
        let build = |f: &dyn Fn(T) -> T, boundary: T| {
            ScalarField::from_fn(mask, |x, y, kind| match kind {
                NodeKind::Inside => f(d.get(x, y)),
                _ => boundary,
            })
        };
        PdeBundle {
            v: build(&|di| (-lambda * di).exp(), T::one()),
            v_prime: build(&|di| -di * (-lambda * di).exp(), T::zero()),
            v_second: build(&|di| di * di * (-lambda * di).exp(), T::zero()),
            lambda,
            residuals: [T::zero(); 3],
            converged: true,
        }
    }
}
