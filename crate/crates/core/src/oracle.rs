//! Test-only reference solutions built without the 2-D operator or CG.

/// Grid-aligned strip reduced to one column: `(2 + λ²) u_j − u_{j−1} − u_{j+1} = f_j`
/// for `n` unknowns with `u_0 = u_{n+1} = edge`. Thomas algorithm.
fn tridiagonal(n: usize, lambda: f64, edge: f64, rhs: &[f64]) -> Vec<f64> {
    let diag = 2.0 + lambda * lambda;
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut f = rhs[j];
        if j == 0 {
            f += edge;
        }
        if j == n - 1 {
            f += edge;
        }
        let denom = if j == 0 { diag } else { diag + c[j - 1] };
        c[j] = -1.0 / denom;
        d[j] = if j == 0 { f / denom } else { (f + d[j - 1]) / denom };
    }
    let mut u = vec![0.0; n];
    u[n - 1] = d[n - 1];
    for j in (0..n - 1).rev() {
        u[j] = d[j] - c[j] * u[j + 1];
    }
    u
}

/// `(v, v′, v″)` across a strip of `rows` inside rows at unit spacing.
pub fn strip_profile(rows: usize, lambda: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let v = tridiagonal(rows, lambda, 1.0, &vec![0.0; rows]);
    let rhs1: Vec<f64> = v.iter().map(|&a| -2.0 * lambda * a).collect();
    let v1 = tridiagonal(rows, lambda, 0.0, &rhs1);
    let rhs2: Vec<f64> = v.iter().zip(&v1).map(|(&a, &b)| -2.0 * a - 4.0 * lambda * b).collect();
    let v2 = tridiagonal(rows, lambda, 0.0, &rhs2);
    (v, v1, v2)
}

#[test]
fn profile_matches_discrete_cosh() {
    // discrete decay rate μ with 2(cosh μ − 1) = λ²
    let lambda: f64 = 0.5;
    let mu = (1.0 + lambda * lambda / 2.0).acosh();
    let (v, _, _) = strip_profile(31, lambda);
    for (j, &u) in v.iter().enumerate() {
        let y = j as f64 + 1.0 - 16.0;
        assert!((u - (mu * y).cosh() / (mu * 16.0).cosh()).abs() < 1e-12 * u.max(1e-3));
    }
}
