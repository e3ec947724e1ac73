//! Exact Euclidean distance to the discrete boundary.
//!
//! Both routes work on integer squared distances between node centres and
//! take a single square root at the end, so they agree bit for bit.

use rayon::prelude::*;

use crate::grid::{BinaryMask, BoundarySet, NodeKind, ScalarField};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdtMethod {
    BruteForce,
    #[default]
    TwoPass,
}

/// Sentinel for "no seed reachable"; larger than any squared distance on a real grid.
const FAR: u64 = u64::MAX / 4;

/// Squared distance (in node units) from every node to the nearest boundary sample.
pub fn squared_distances_bruteforce<T>(mask: &BinaryMask, boundary: &BoundarySet<T>) -> Vec<u64> {
    let points = &boundary.points[..];
    (0..mask.len())
        .into_par_iter()
        .map(|i| {
            let (x, y) = mask.coords(i);
            points
                .iter()
                .map(|&(bx, by)| {
                    let dx = x.abs_diff(bx) as u64;
                    let dy = y.abs_diff(by) as u64;
                    dx * dx + dy * dy
                })
                .min()
                .unwrap_or(FAR)
        })
        .collect()
}

/// Same result as [`squared_distances_bruteforce`] via the separable lower-envelope
/// algorithm: a column pass for 1-D distances, then a row pass taking the lower
/// envelope of the parabolas `f(q) + (x - q)²`.
pub fn squared_distances_two_pass<T>(mask: &BinaryMask, boundary: &BoundarySet<T>) -> Vec<u64> {
    let (w, h) = (mask.width(), mask.height());
    let mut seed = vec![false; w * h];
    for &(x, y) in &boundary.points {
        seed[y * w + x] = true;
    }

    // column pass: vertical distance to the nearest seed in the same column
    let mut col = vec![FAR; w * h];
    for x in 0..w {
        let mut last: Option<usize> = None;
        for y in 0..h {
            if seed[y * w + x] {
                last = Some(y);
            }
            if let Some(s) = last {
                col[y * w + x] = ((y - s) as u64).pow(2);
            }
        }
        let mut next: Option<usize> = None;
        for y in (0..h).rev() {
            if seed[y * w + x] {
                next = Some(y);
            }
            if let Some(s) = next {
                let d = ((s - y) as u64).pow(2);
                let cell = &mut col[y * w + x];
                *cell = (*cell).min(d);
            }
        }
    }

    let mut out = vec![FAR; w * h];
    out.par_chunks_mut(w)
        .zip(col.par_chunks(w))
        .for_each(|(row_out, row_in)| lower_envelope(row_in, row_out));
    out
}

/// 1-D squared distance transform of a sampled function (Felzenszwalb–Huttenlocher).
/// Entries equal to `FAR` are treated as absent.
fn lower_envelope(f: &[u64], out: &mut [u64]) {
    let n = f.len();
    let mut vertices: Vec<usize> = Vec::with_capacity(n);
    // left end of each parabola's reign; intersections kept as exact rationals num/den
    let mut starts: Vec<(i128, i128)> = Vec::with_capacity(n);

    let intersect = |p: usize, q: usize| -> (i128, i128) {
        let (fp, fq) = (f[p] as i128, f[q] as i128);
        let (p, q) = (p as i128, q as i128);
        (fq + q * q - fp - p * p, 2 * (q - p))
    };
    // a/b <= c/d with b, d > 0
    let le = |a: (i128, i128), c: (i128, i128)| a.0 * c.1 <= c.0 * a.1;

    for q in 0..n {
        if f[q] >= FAR {
            continue;
        }
        loop {
            match vertices.last() {
                None => {
                    vertices.push(q);
                    starts.push((-(1i128 << 64), 1));
                    break;
                }
                Some(&v) => {
                    let s = intersect(v, q);
                    if le(s, *starts.last().unwrap()) {
                        vertices.pop();
                        starts.pop();
                    } else {
                        vertices.push(q);
                        starts.push(s);
                        break;
                    }
                }
            }
        }
    }
    if vertices.is_empty() {
        return;
    }
    let mut k = 0;
    for (x, slot) in out.iter_mut().enumerate() {
        while k + 1 < vertices.len() && le(starts[k + 1], (x as i128, 1)) {
            k += 1;
        }
        let v = vertices[k];
        let dx = x.abs_diff(v) as u64;
        *slot = f[v] + dx * dx;
    }
}

/// Distance field from squared node distances: `sqrt(d²)·h` on `Ω`, 0 on `∂Ω`.
pub fn field_from_squared<T: Real>(mask: &BinaryMask, squared: &[u64]) -> ScalarField<T> {
    let h = mask.spacing();
    ScalarField::from_fn(mask, |x, y, kind| match kind {
        NodeKind::Inside => T::lit((squared[mask.index(x, y)] as f64).sqrt() * h),
        _ => T::zero(),
    })
}

pub fn edt_bruteforce<T: Real>(mask: &BinaryMask, boundary: &BoundarySet<T>) -> ScalarField<T> {
    field_from_squared(mask, &squared_distances_bruteforce(mask, boundary))
}

pub fn edt_fast<T: Real>(mask: &BinaryMask, boundary: &BoundarySet<T>) -> ScalarField<T> {
    field_from_squared(mask, &squared_distances_two_pass(mask, boundary))
}

pub fn edt<T: Real>(mask: &BinaryMask, boundary: &BoundarySet<T>, method: EdtMethod) -> ScalarField<T> {
    match method {
        EdtMethod::BruteForce => edt_bruteforce(mask, boundary),
        EdtMethod::TwoPass => edt_fast(mask, boundary),
    }
}
