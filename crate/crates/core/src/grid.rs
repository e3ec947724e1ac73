//! Grid containers, boundary extraction and finite-difference stencils.
//!
//! Nodes are addressed row-major: `index = y * width + x`, with `y` growing
//! with the row index. Every field carries a handle to the mask it lives on.
//! Values at nodes outside `Ω ∪ ∂Ω` are stored as NaN and never read by the
//! stencils (the one-pixel margin guarantees an inside node only ever sees
//! inside or boundary neighbours).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Classification of a grid node relative to the shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// Background node with no inside 4-neighbour.
    Outside,
    /// Background node 4-adjacent to at least one inside node (the discrete `∂Ω`).
    Boundary,
    /// Node of `Ω`; these are exactly the unknowns of every linear solve.
    Inside,
}

#[derive(PartialEq)]
struct MaskData {
    width: usize,
    height: usize,
    spacing: f64,
    inside: Vec<bool>,
    kind: Vec<NodeKind>,
    inside_nodes: Vec<usize>,
    boundary_nodes: Vec<usize>,
    unknown_of: Vec<usize>,
}

/// Validated binary shape on a rectangular grid.
///
/// Cheap to clone: the node tables are shared behind an [`Arc`].
#[derive(Clone)]
pub struct BinaryMask(Arc<MaskData>);

const NOT_INSIDE: usize = usize::MAX;

/// Checks the mask invariants on raw row-major data.
pub fn validate_mask(width: usize, height: usize, inside: &[bool]) -> Result<()> {
    if width < 3 || height < 3 {
        return Err(Error::TooSmall { width, height });
    }
    if inside.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            got: inside.len(),
        });
    }
    for y in 0..height {
        for x in 0..width {
            let on_border = x == 0 || y == 0 || x == width - 1 || y == height - 1;
            if on_border && inside[y * width + x] {
                return Err(Error::MaskTouchesBorder { x, y });
            }
        }
    }
    if !inside.iter().any(|&b| b) {
        return Err(Error::EmptyMask);
    }
    Ok(())
}

impl BinaryMask {
    /// Builds a mask with unit spacing.
    pub fn new(width: usize, height: usize, inside: Vec<bool>) -> Result<Self> {
        Self::with_spacing(width, height, inside, 1.0)
    }

    pub fn with_spacing(width: usize, height: usize, inside: Vec<bool>, spacing: f64) -> Result<Self> {
        validate_mask(width, height, &inside)?;
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::BadConfig(format!("grid spacing must be positive, got {spacing}")));
        }
        let n = width * height;
        let mut kind = vec![NodeKind::Outside; n];
        let mut unknown_of = vec![NOT_INSIDE; n];
        let mut inside_nodes = Vec::new();
        for (i, &b) in inside.iter().enumerate() {
            if b {
                kind[i] = NodeKind::Inside;
                unknown_of[i] = inside_nodes.len();
                inside_nodes.push(i);
            }
        }
        for &i in &inside_nodes {
            for j in [i - 1, i + 1, i - width, i + width] {
                if !inside[j] {
                    kind[j] = NodeKind::Boundary;
                }
            }
        }
        let boundary_nodes = (0..n).filter(|&i| kind[i] == NodeKind::Boundary).collect();
        Ok(BinaryMask(Arc::new(MaskData {
            width,
            height,
            spacing,
            inside,
            kind,
            inside_nodes,
            boundary_nodes,
            unknown_of,
        })))
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let inside = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, inside)
    }

    /// Same shape, different grid spacing.
    pub fn rescaled(&self, spacing: f64) -> Result<Self> {
        Self::with_spacing(self.width(), self.height(), self.0.inside.clone(), spacing)
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn spacing(&self) -> f64 {
        self.0.spacing
    }

    /// Total node count, `width * height`.
    pub fn len(&self) -> usize {
        self.0.width * self.0.height
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.0.width + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.0.width, index / self.0.width)
    }

    #[inline]
    pub fn kind(&self, index: usize) -> NodeKind {
        self.0.kind[index]
    }

    #[inline]
    pub fn is_inside(&self, x: usize, y: usize) -> bool {
        self.0.inside[self.index(x, y)]
    }

    pub fn inside(&self) -> &[bool] {
        &self.0.inside
    }

    /// Row-major indices of the inside nodes. Position in this list is the unknown number.
    pub fn inside_nodes(&self) -> &[usize] {
        &self.0.inside_nodes
    }

    /// Row-major indices of the boundary nodes.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.0.boundary_nodes
    }

    pub fn inside_count(&self) -> usize {
        self.0.inside_nodes.len()
    }

    /// Unknown number of an inside node, `None` for any other node.
    #[inline]
    pub fn unknown_index(&self, index: usize) -> Option<usize> {
        match self.0.unknown_of[index] {
            NOT_INSIDE => None,
            u => Some(u),
        }
    }

    /// The four neighbours `[west, east, north, south]` of a node that is not on the border.
    #[inline]
    pub fn neighbours(&self, index: usize) -> [usize; 4] {
        let w = self.0.width;
        [index - 1, index + 1, index - w, index + w]
    }

    pub fn same_as(&self, other: &BinaryMask) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl PartialEq for BinaryMask {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width())
            .field("height", &self.height())
            .field("spacing", &self.spacing())
            .field("inside", &self.inside_count())
            .field("boundary", &self.boundary_nodes().len())
            .finish()
    }
}

/// Discrete samples of `∂Ω` with their quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySet<T> {
    /// Node coordinates `(x, y)`, row-major order.
    pub points: Vec<(usize, usize)>,
    pub weights: Vec<T>,
}

impl<T> BoundarySet<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Background nodes 4-adjacent to an inside node, each weighted by the grid spacing.
pub fn extract_boundary<T: Real>(mask: &BinaryMask) -> BoundarySet<T> {
    let h = T::lit(mask.spacing());
    let points: Vec<_> = mask.boundary_nodes().iter().map(|&i| mask.coords(i)).collect();
    let weights = vec![h; points.len()];
    BoundarySet { points, weights }
}

/// One real value per node. Outside nodes hold NaN.
#[derive(Debug, Clone)]
pub struct ScalarField<T> {
    mask: BinaryMask,
    values: Vec<T>,
}

/// NaN compares equal to NaN so undefined nodes do not break equality.
impl<T: Real> PartialEq for ScalarField<T> {
    fn eq(&self, other: &Self) -> bool {
        self.mask == other.mask
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a == b || (a.is_nan() && b.is_nan()))
    }
}

impl<T: Real> ScalarField<T> {
    /// `inside` on `Ω`, `boundary` on `∂Ω`, NaN elsewhere.
    pub fn filled(mask: &BinaryMask, inside: T, boundary: T) -> Self {
        Self::from_fn(mask, |_, _, kind| match kind {
            NodeKind::Inside => inside,
            _ => boundary,
        })
    }

    /// Evaluates `f(x, y, kind)` on `Ω ∪ ∂Ω`.
    pub fn from_fn(mask: &BinaryMask, f: impl Fn(usize, usize, NodeKind) -> T) -> Self {
        let values = (0..mask.len())
            .map(|i| match mask.kind(i) {
                NodeKind::Outside => T::nan(),
                kind => {
                    let (x, y) = mask.coords(i);
                    f(x, y, kind)
                }
            })
            .collect();
        ScalarField { mask: mask.clone(), values }
    }

    /// Scatters a vector of unknowns (one per inside node) and sets `boundary` on `∂Ω`.
    pub fn from_unknowns(mask: &BinaryMask, unknowns: &[T], boundary: T) -> Self {
        assert_eq!(unknowns.len(), mask.inside_count(), "unknown vector length");
        let mut field = Self::filled(mask, T::zero(), boundary);
        for (&i, &u) in mask.inside_nodes().iter().zip(unknowns) {
            field.values[i] = u;
        }
        field
    }

    /// Wraps raw row-major values. Outside nodes are overwritten with NaN.
    pub fn from_values(mask: &BinaryMask, mut values: Vec<T>) -> Result<Self> {
        if values.len() != mask.len() {
            return Err(Error::DimensionMismatch {
                expected: mask.len(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter_mut().enumerate() {
            if mask.kind(i) == NodeKind::Outside {
                *v = T::nan();
            }
        }
        Ok(ScalarField { mask: mask.clone(), values })
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn width(&self) -> usize {
        self.mask.width()
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[self.mask.index(x, y)]
    }

    #[inline]
    pub fn at(&self, index: usize) -> T {
        self.values[index]
    }

    /// Values at the inside nodes, in unknown order.
    pub fn unknowns(&self) -> Vec<T> {
        self.mask.inside_nodes().iter().map(|&i| self.values[i]).collect()
    }

    /// Applies `f` node-wise on `Ω`, keeping boundary values.
    pub fn map_inside(&self, f: impl Fn(T) -> T) -> Self {
        let mut out = self.clone();
        for &i in self.mask.inside_nodes() {
            out.values[i] = f(self.values[i]);
        }
        out
    }

    /// Node-wise combination of two fields on the same mask over `Ω ∪ ∂Ω`.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.ensure_same_mask(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| if a.is_nan() && b.is_nan() { a } else { f(a, b) })
            .collect();
        Ok(ScalarField { mask: self.mask.clone(), values })
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = *v * factor);
        out
    }

    pub fn ensure_same_mask(&self, other: &Self) -> Result<()> {
        if self.mask.same_as(&other.mask) {
            Ok(())
        } else {
            Err(Error::MaskMismatch)
        }
    }

    /// Largest value over the inside nodes.
    pub fn max_inside(&self) -> T {
        self.mask
            .inside_nodes()
            .iter()
            .map(|&i| self.values[i])
            .fold(T::neg_infinity(), T::max)
    }

    pub fn min_inside(&self) -> T {
        self.mask
            .inside_nodes()
            .iter()
            .map(|&i| self.values[i])
            .fold(T::infinity(), T::min)
    }
}

/// Node-centred vector field; non-zero only on inside nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    mask: BinaryMask,
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Real> VectorField<T> {
    pub fn zeros(mask: &BinaryMask) -> Self {
        VectorField {
            mask: mask.clone(),
            x: vec![T::zero(); mask.len()],
            y: vec![T::zero(); mask.len()],
        }
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    #[inline]
    pub fn norm_at(&self, index: usize) -> T {
        self.x[index].hypot(self.y[index])
    }
}

/// Central-difference gradient at the inside nodes.
///
/// Boundary neighbours contribute the value the field stores there
/// (0 for distances, 1 for the screened-Poisson solution).
pub fn gradient<T: Real>(w: &ScalarField<T>) -> VectorField<T> {
    let mask = w.mask();
    let inv_2h = T::one() / (T::lit(2.0) * T::lit(mask.spacing()));
    let mut g = VectorField::zeros(mask);
    for &i in mask.inside_nodes() {
        let [west, east, north, south] = mask.neighbours(i);
        g.x[i] = (w.at(east) - w.at(west)) * inv_2h;
        g.y[i] = (w.at(south) - w.at(north)) * inv_2h;
    }
    g
}

/// Central-difference divergence at the inside nodes, components taken as 0 off `Ω`.
/// The result is 0 on boundary nodes.
pub fn divergence<T: Real>(g: &VectorField<T>) -> ScalarField<T> {
    let mask = g.mask();
    let inv_2h = T::one() / (T::lit(2.0) * T::lit(mask.spacing()));
    let mut out = ScalarField::filled(mask, T::zero(), T::zero());
    for &i in mask.inside_nodes() {
        let [west, east, north, south] = mask.neighbours(i);
        out.values[i] = (g.x[east] - g.x[west] + g.y[south] - g.y[north]) * inv_2h;
    }
    out
}

/// 5-point Laplacian `(f_E + f_W + f_N + f_S - 4 f) / h²` at the inside nodes, 0 on `∂Ω`.
pub fn laplacian<T: Real>(w: &ScalarField<T>) -> ScalarField<T> {
    let mask = w.mask();
    let h = T::lit(mask.spacing());
    let inv_h2 = T::one() / (h * h);
    let mut out = ScalarField::filled(mask, T::zero(), T::zero());
    for &i in mask.inside_nodes() {
        let s: T = mask.neighbours(i).iter().map(|&j| w.at(j)).sum();
        out.values[i] = (s - T::lit(4.0) * w.at(i)) * inv_h2;
    }
    out
}

/// Vector field sampled on cell faces (the staggered grid).
///
/// `x[i]` lives on the face between node `i` and its east neighbour,
/// `y[i]` on the face between node `i` and its south neighbour.
/// Only faces touching an inside node carry data; all others are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField<T> {
    mask: BinaryMask,
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Real> FaceField<T> {
    pub fn zeros(mask: &BinaryMask) -> Self {
        FaceField {
            mask: mask.clone(),
            x: vec![T::zero(); mask.len()],
            y: vec![T::zero(); mask.len()],
        }
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    /// Visits every active face as `(tail, head, is_x_face)`.
    pub fn for_each_face(mask: &BinaryMask, mut f: impl FnMut(usize, usize, bool)) {
        let w = mask.width();
        for i in 0..mask.len() {
            let (x, y) = mask.coords(i);
            if x + 1 < w && touches_inside(mask, i, i + 1) {
                f(i, i + 1, true);
            }
            if y + 1 < mask.height() && touches_inside(mask, i, i + w) {
                f(i, i + w, false);
            }
        }
    }
}

#[inline]
fn touches_inside(mask: &BinaryMask, a: usize, b: usize) -> bool {
    mask.kind(a) == NodeKind::Inside || mask.kind(b) == NodeKind::Inside
}

/// Forward-difference gradient on the faces adjacent to `Ω`.
pub fn face_gradient<T: Real>(w: &ScalarField<T>) -> FaceField<T> {
    let mask = w.mask();
    let inv_h = T::one() / T::lit(mask.spacing());
    let mut g = FaceField::zeros(mask);
    FaceField::<T>::for_each_face(mask, |a, b, is_x| {
        let d = (w.at(b) - w.at(a)) * inv_h;
        if is_x {
            g.x[a] = d;
        } else {
            g.y[a] = d;
        }
    });
    g
}

/// Backward-difference divergence of a face field at the inside nodes, 0 on `∂Ω`.
///
/// Paired with [`face_gradient`], `face_divergence(face_gradient(w))` is exactly the
/// 5-point [`laplacian`], and `-face_divergence` is the adjoint of `face_gradient` for
/// fields vanishing on `∂Ω`.
pub fn face_divergence<T: Real>(g: &FaceField<T>) -> ScalarField<T> {
    let mask = g.mask();
    let inv_h = T::one() / T::lit(mask.spacing());
    let mut out = ScalarField::filled(mask, T::zero(), T::zero());
    for &i in mask.inside_nodes() {
        let [west, _, north, _] = mask.neighbours(i);
        out.values[i] = (g.x[i] - g.x[west] + g.y[i] - g.y[north]) * inv_h;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn block(size: usize, lo: usize, hi: usize) -> BinaryMask {
        BinaryMask::from_fn(size, size, |x, y| (lo..=hi).contains(&x) && (lo..=hi).contains(&y)).unwrap()
    }

    #[test]
    fn validate_minimal_mask() {
        let mut inside = vec![false; 9];
        inside[4] = true;
        assert!(validate_mask(3, 3, &inside).is_ok());
    }

    #[test]
    fn validate_rejects_border_and_empty_and_small() {
        let mut inside = vec![false; 9];
        inside[0] = true;
        assert_eq!(validate_mask(3, 3, &inside), Err(Error::MaskTouchesBorder { x: 0, y: 0 }));
        assert_eq!(validate_mask(5, 5, &[false; 25]), Err(Error::EmptyMask));
        assert_eq!(
            validate_mask(2, 5, &[false; 10]),
            Err(Error::TooSmall { width: 2, height: 5 })
        );
    }

    #[test]
    fn boundary_of_single_node_is_cross() {
        let m = block(3, 1, 1);
        let b = extract_boundary::<f64>(&m);
        assert_eq!(b.points, vec![(1, 0), (0, 1), (2, 1), (1, 2)]);
        assert!(b.weights.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn boundary_of_block_excludes_corners() {
        let m = block(5, 1, 3);
        let b = extract_boundary::<f64>(&m);
        assert_eq!(b.len(), 12);
        assert!(!b.points.contains(&(0, 0)));
        assert!(!b.points.contains(&(4, 4)));
    }

    #[test]
    fn boundary_nodes_touch_inside() {
        let m = BinaryMask::from_fn(64, 64, |x, y| {
            let (dx, dy) = (x as f64 - 31.5, y as f64 - 31.5);
            dx * dx + dy * dy <= 400.0
        })
        .unwrap();
        let b = extract_boundary::<f64>(&m);
        assert!(!b.is_empty());
        for &(x, y) in &b.points {
            assert!(!m.is_inside(x, y));
            let i = m.index(x, y);
            assert!(m.neighbours(i).iter().any(|&j| m.inside()[j]));
        }
        assert_eq!(extract_boundary::<f64>(&m), b);
    }

    #[test]
    fn gradient_of_constant_and_linear() {
        let m = block(11, 1, 9);
        let c = ScalarField::filled(&m, 3.0, 3.0);
        let g = gradient(&c);
        assert!(m.inside_nodes().iter().all(|&i| g.x[i] == 0.0 && g.y[i] == 0.0));

        let m = m.rescaled(0.5).unwrap();
        let lin = ScalarField::from_fn(&m, |x, _, _| x as f64 * 0.5);
        let g = gradient(&lin);
        for &i in m.inside_nodes() {
            assert!((g.x[i] - 1.0).abs() < 1e-14);
            assert_eq!(g.y[i], 0.0);
        }
    }

    #[test]
    fn gradient_of_strip_distance_is_unit() {
        // 31 inside rows, boundary rows at y = 2 and y = 34
        let m = BinaryMask::from_fn(60, 37, |x, y| (3..=33).contains(&y) && (1..=58).contains(&x)).unwrap();
        let d = ScalarField::from_fn(&m, |_, y, kind| match kind {
            NodeKind::Inside => (y as f64 - 2.0).min(34.0 - y as f64),
            _ => 0.0,
        });
        let g = gradient(&d);
        for y in 5..=31 {
            if (y as i64 - 18).abs() < 2 {
                continue;
            }
            let i = m.index(30, y);
            assert!((g.norm_at(i) - 1.0).abs() < 1e-14, "row {y}");
        }
    }

    #[test]
    fn divergence_of_zero_and_linear() {
        let m = block(11, 1, 9);
        let g = VectorField::<f64>::zeros(&m);
        let d = divergence(&g);
        assert!(m.inside_nodes().iter().all(|&i| d.at(i) == 0.0));

        let mut g = VectorField::zeros(&m);
        for &i in m.inside_nodes() {
            g.x[i] = m.coords(i).0 as f64;
        }
        let d = divergence(&g);
        for y in 2..=8 {
            for x in 2..=8 {
                assert!((d.get(x, y) - 1.0).abs() < 1e-14);
            }
        }
    }

    fn random_field(m: &BinaryMask, rng: &mut ChaCha8Rng) -> ScalarField<f64> {
        let vals: Vec<f64> = (0..m.inside_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_unknowns(m, &vals, 0.0)
    }

    fn random_mask(size: usize, rng: &mut ChaCha8Rng) -> BinaryMask {
        loop {
            let inside: Vec<bool> = (0..size * size)
                .map(|i| {
                    let (x, y) = (i % size, i / size);
                    x > 0 && y > 0 && x + 1 < size && y + 1 < size && rng.gen_bool(0.6)
                })
                .collect();
            if let Ok(m) = BinaryMask::new(size, size, inside) {
                return m;
            }
        }
    }

    #[test]
    fn central_divergence_is_negative_adjoint_of_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_mask(16, &mut rng);
            let w = random_field(&m, &mut rng);
            let mut g = VectorField::zeros(&m);
            for &i in m.inside_nodes() {
                g.x[i] = rng.gen_range(-1.0..1.0);
                g.y[i] = rng.gen_range(-1.0..1.0);
            }
            let gw = gradient(&w);
            let dg = divergence(&g);
            let lhs: f64 = m.inside_nodes().iter().map(|&i| dg.at(i) * w.at(i)).sum();
            let rhs: f64 = m.inside_nodes().iter().map(|&i| g.x[i] * gw.x[i] + g.y[i] * gw.y[i]).sum();
            assert!((lhs + rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn face_divergence_of_face_gradient_is_five_point_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_mask(16, &mut rng);
            let w = random_field(&m, &mut rng);
            let lap = laplacian(&w);
            let dg = face_divergence(&face_gradient(&w));
            for &i in m.inside_nodes() {
                assert!((lap.at(i) - dg.at(i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn face_divergence_is_negative_adjoint_of_face_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_mask(16, &mut rng);
        let w = random_field(&m, &mut rng);
        let mut g = FaceField::zeros(&m);
        FaceField::<f64>::for_each_face(&m, |a, _, is_x| {
            let v = rng.gen_range(-1.0..1.0);
            if is_x {
                g.x[a] = v;
            } else {
                g.y[a] = v;
            }
        });
        let dg = face_divergence(&g);
        let gw = face_gradient(&w);
        let lhs: f64 = m.inside_nodes().iter().map(|&i| dg.at(i) * w.at(i)).sum();
        let rhs: f64 = (0..m.len()).map(|i| g.x[i] * gw.x[i] + g.y[i] * gw.y[i]).sum();
        assert!((lhs + rhs).abs() < 1e-12);
    }

    #[test]
    fn from_values_masks_outside() {
        let m = block(5, 2, 2);
        let f = ScalarField::from_values(&m, vec![1.0f64; 25]).unwrap();
        assert!(f.get(0, 0).is_nan());
        assert_eq!(f.get(2, 1), 1.0);
        assert!(ScalarField::<f64>::from_values(&m, vec![1.0; 3]).is_err());
    }
}
