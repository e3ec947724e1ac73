//! Distance estimates from a [`PdeBundle`], and gradient normalisation.
//!
//! With `v = e^{−λu}` the three estimators are
//!
//! * heat-log: `u = −log(v)/λ`,
//! * first-order extrapolation in `s = 1/λ`: `−v′/v`,
//! * second-order extrapolation: `−v′/v − (λ/2)[v″/v − (v′/v)²]`.
//!
//! All three coincide when `u` does not depend on `λ`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{self, BinaryMask, FaceField, NodeKind, ScalarField};
use crate::poisson::{assemble_operator, solve_to_field, PdeBundle, SolveOptions, SolvedField};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    HeatLog,
    Taylor1,
    Taylor2,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::HeatLog, EstimatorKind::Taylor1, EstimatorKind::Taylor2];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::HeatLog => "heat",
            EstimatorKind::Taylor1 => "taylor1",
            EstimatorKind::Taylor2 => "taylor2",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" | "heat_log" => Ok(EstimatorKind::HeatLog),
            "taylor1" | "dist1" => Ok(EstimatorKind::Taylor1),
            "taylor2" | "dist2" => Ok(EstimatorKind::Taylor2),
            other => Err(Error::Parse(format!("unknown estimator `{other}`"))),
        }
    }
}

/// An estimated distance field; `clamped` counts inside nodes where `v` had to be
/// raised to the positivity floor before dividing or taking a logarithm.
#[derive(Debug, Clone)]
pub struct Estimate<T> {
    pub field: ScalarField<T>,
    pub clamped: usize,
}

/// Smallest `v` admitted into a logarithm or a division.
pub fn positivity_floor<T: Real>() -> T {
    let floor = T::lit(1e-300);
    if floor > T::zero() {
        floor
    } else {
        T::min_positive_value()
    }
}

fn pointwise<T: Real>(bundle: &PdeBundle<T>, f: impl Fn(T, T, T, T) -> T) -> Estimate<T> {
    let floor = positivity_floor::<T>();
    let mask = bundle.v.mask();
    let mut clamped = 0;
    let mut values = Vec::with_capacity(mask.inside_count());
    for &i in mask.inside_nodes() {
        let mut v = bundle.v.at(i);
        if !(v >= floor) {
            v = floor;
            clamped += 1;
        }
        values.push(f(v, bundle.v_prime.at(i), bundle.v_second.at(i), bundle.lambda));
    }
    Estimate {
        field: ScalarField::from_unknowns(mask, &values, T::zero()),
        clamped,
    }
}

/// `−log(v)/λ`.
pub fn heat_log<T: Real>(bundle: &PdeBundle<T>) -> Estimate<T> {
    pointwise(bundle, |v, _, _, lambda| -v.ln() / lambda)
}

/// `−v′/v`.
pub fn taylor1<T: Real>(bundle: &PdeBundle<T>) -> Estimate<T> {
    pointwise(bundle, |v, dv, _, _| -dv / v)
}

/// `−v′/v − (λ/2)[v″/v − (v′/v)²]`.
pub fn taylor2<T: Real>(bundle: &PdeBundle<T>) -> Estimate<T> {
    let half = T::lit(0.5);
    pointwise(bundle, |v, dv, d2v, lambda| {
        let q = dv / v;
        -q - half * lambda * (d2v / v - q * q)
    })
}

pub fn estimate<T: Real>(bundle: &PdeBundle<T>, kind: EstimatorKind) -> Estimate<T> {
    match kind {
        EstimatorKind::HeatLog => heat_log(bundle),
        EstimatorKind::Taylor1 => taylor1(bundle),
        EstimatorKind::Taylor2 => taylor2(bundle),
    }
}

/// Gradient magnitudes below this are treated as critical points (`g = 0`).
pub const GRADIENT_EPSILON: f64 = 1e-12;

/// Where the unit gradient field lives before its divergence is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizationScheme {
    /// Unit vectors on cell faces (forward-difference normal component, averaged
    /// central tangential component) with the matching backward divergence, so the
    /// Poisson step is exactly the discrete least-squares gradient fit.
    #[default]
    Staggered,
    /// Unit vectors at nodes from central differences, central divergence.
    Central,
}

/// Replaces `∇w` by `g = ∇w/|∇w|` and solves `−Δ_h w_n = −div_h g`, `w_n = 0` on `∂Ω`.
pub fn normalize_gradient<T: Real>(w: &ScalarField<T>, opts: &SolveOptions<T>) -> Result<SolvedField<T>> {
    normalize_gradient_with(w, NormalizationScheme::default(), opts)
}

pub fn normalize_gradient_with<T: Real>(
    w: &ScalarField<T>,
    scheme: NormalizationScheme,
    opts: &SolveOptions<T>,
) -> Result<SolvedField<T>> {
    opts.validate()?;
    let div = match scheme {
        NormalizationScheme::Staggered => grid::face_divergence(&unit_face_gradient(w)),
        NormalizationScheme::Central => grid::divergence(&unit_node_gradient(w)),
    };
    let mask = w.mask();
    let rhs: Vec<T> = div.unknowns().into_iter().map(|d| -d).collect();
    let op = assemble_operator(mask, T::zero());
    solve_to_field(&op, &rhs, opts, T::zero())
}

fn unit<T: Real>(a: T, b: T) -> (T, T) {
    let m = a.hypot(b);
    if m < T::lit(GRADIENT_EPSILON) {
        (T::zero(), T::zero())
    } else {
        (a / m, b / m)
    }
}

fn unit_node_gradient<T: Real>(w: &ScalarField<T>) -> grid::VectorField<T> {
    let mut g = grid::gradient(w);
    for &i in w.mask().inside_nodes() {
        let (gx, gy) = unit(g.x[i], g.y[i]);
        g.x[i] = gx;
        g.y[i] = gy;
    }
    g
}

/// Unit gradient on the faces touching `Ω`.
fn unit_face_gradient<T: Real>(w: &ScalarField<T>) -> FaceField<T> {
    let mask: &BinaryMask = w.mask();
    let inv_h = T::lit(mask.spacing()).recip();
    let central = grid::gradient(w);
    let half = T::lit(0.5);
    // tangential component: mean of the central derivatives at the inside endpoints
    let tangential = |a: usize, b: usize, comp: &[T]| {
        match (mask.kind(a) == NodeKind::Inside, mask.kind(b) == NodeKind::Inside) {
            (true, true) => (comp[a] + comp[b]) * half,
            (true, false) => comp[a],
            (false, true) => comp[b],
            (false, false) => T::zero(),
        }
    };
    let mut g = FaceField::zeros(mask);
    FaceField::<T>::for_each_face(mask, |a, b, is_x| {
        let normal = (w.at(b) - w.at(a)) * inv_h;
        if is_x {
            let (n, _) = unit(normal, tangential(a, b, &central.y));
            g.x[a] = n;
        } else {
            let (n, _) = unit(normal, tangential(a, b, &central.x));
            g.y[a] = n;
        }
    });
    g
}
