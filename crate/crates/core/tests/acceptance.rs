//! Acceptance suite: one line per criterion, non-zero exit status if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use distkit::conv::{logconv_parts, softmin_parts};
use distkit::edt::{squared_distances_bruteforce, squared_distances_two_pass};
use distkit::estimators::{estimate, normalize_gradient};
use distkit::metrics::{error_l2, error_linf};
use distkit::pipeline::{evaluate, parameter_grid};
use distkit::poisson::{solve_v, solve_vprime, solve_vsecond};
use distkit::{
    conv_estimates, edt, extract_boundary, make_shape, solve_bundle, BinaryMask, ConvOptions, EstimatorKind, Method,
    PdeBundle, RunParams, ScalarField, ShapeKind, SolveOptions, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Field = ScalarField<f64>;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

fn shape(kind: ShapeKind, w: usize, h: usize) -> BinaryMask {
    make_shape(kind, w, h).expect("built-in shape")
}

fn disk128() -> BinaryMask {
    shape(ShapeKind::Disk { radius: 60.0 }, 128, 128)
}

fn exact(mask: &BinaryMask) -> Field {
    edt::edt_fast(mask, &extract_boundary(mask))
}

fn within_time(elapsed: Duration, limit: Duration) -> (bool, String) {
    (elapsed <= limit, format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs()))
}

fn edt_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    let mut mismatches = 0;
    while checked < 200 {
        let p: f64 = rng.gen_range(0.2..0.9);
        let bits: Vec<bool> = (0..16 * 16).map(|_| rng.gen_bool(p)).collect();
        let Ok(m) = BinaryMask::from_fn(16, 16, |x, y| x > 0 && y > 0 && x < 15 && y < 15 && bits[y * 16 + x]) else {
            continue;
        };
        let b = extract_boundary::<f64>(&m);
        mismatches += usize::from(squared_distances_two_pass(&m, &b) != squared_distances_bruteforce(&m, &b));
        checked += 1;
    }
    let big = [
        shape(ShapeKind::Disk { radius: 60.0 }, 128, 128),
        shape(ShapeKind::Strip { width: 31 }, 128, 128),
        shape(ShapeKind::Annulus { r_in: 20.0, r_out: 60.0 }, 128, 128),
    ];
    for m in &big {
        let b = extract_boundary::<f64>(m);
        mismatches += usize::from(squared_distances_two_pass(m, &b) != squared_distances_bruteforce(m, &b));
    }
    let (fast, time) = within_time(start.elapsed(), Duration::from_secs(10));
    Verdict::new(mismatches == 0 && fast, format!("{mismatches} mismatches over 203 masks, {time}"))
}

fn min_bracketing() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    let mut not_strict = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=50);
        let phi: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let w = vec![1.0; n];
        let lambda = rng.gen_range(1.0..=20.0);
        let min = phi.iter().cloned().fold(f64::INFINITY, f64::min);
        let (lmin, deficit) = logconv_parts(&phi, &w, lambda, 1.0, None);
        let (smin, excess) = softmin_parts(&phi, &w, lambda, None).expect("non-degenerate");
        if lmin - deficit > min || smin + excess < min || lmin != min || smin != min || deficit < 0.0 || excess < 0.0 {
            violations += 1;
        }
        let mut sorted = phi.clone();
        sorted.sort_by(f64::total_cmp);
        let distinct = sorted.windows(2).all(|p| p[0] < p[1]);
        if distinct && n > 1 && !(deficit > 0.0 && excess > 0.0) {
            not_strict += 1;
        }
    }
    Verdict::new(
        violations == 0 && not_strict == 0,
        format!("{violations} bracketing violations, {not_strict} non-strict distinct sets"),
    )
}

fn blend_improvement() -> Verdict {
    let start = Instant::now();
    let m = disk128();
    let d = exact(&m);
    let opts = ConvOptions::new(10.0);
    let est = conv_estimates(&m, &extract_boundary(&m), &opts, 0.1).expect("conv estimates");
    let l2 = |f: &Field| error_l2(f, &d).unwrap();
    let (b, s, l) = (l2(&est.blend), l2(&est.softmin), l2(&est.logconv));
    let (fast, time) = within_time(start.elapsed(), Duration::from_secs(30));
    Verdict::new(
        b < s && b < l && fast,
        format!("L2 blend {b:.4}, softmin {s:.4}, logconv {l:.4}, {time}"),
    )
}

/// Strip column reduced to 1-D: `(2 + λ²) u_j − u_{j−1} − u_{j+1} = 0`, `u = 1` at both ends.
fn discrete_strip_centre(rows: usize, lambda: f64) -> f64 {
    let diag = 2.0 + lambda * lambda;
    let (mut c, mut d) = (vec![0.0; rows], vec![0.0; rows]);
    for j in 0..rows {
        let f = if j == 0 || j == rows - 1 { 1.0 } else { 0.0 };
        let denom = if j == 0 { diag } else { diag + c[j - 1] };
        c[j] = -1.0 / denom;
        d[j] = if j == 0 { f / denom } else { (f + d[j - 1]) / denom };
    }
    let mut u = d[rows - 1];
    for j in (rows / 2..rows - 1).rev() {
        u = d[j] - c[j] * u;
    }
    u
}

fn strip_oracle() -> Verdict {
    let m = shape(ShapeKind::Strip { width: 31 }, 200, 40);
    let b = solve_bundle(&m, &SolverConfig::from_lambda(0.5).unwrap()).expect("strip bundle");
    let at = |kind| estimate(&b, kind).field.get(100, 19);
    let (h, t1, t2) = (at(EstimatorKind::HeatLog), at(EstimatorKind::Taylor1), at(EstimatorKind::Taylor2));
    let rel = |x: f64, target: f64| (x - target).abs() / target;
    let checks = [
        rel(h, 14.613706) <= 0.02,
        rel(t1, 15.999996) <= 0.02,
        rel(t2, 16.000025) <= 0.02,
        (h - 16.0).abs() >= 50.0 * (t1 - 16.0).abs(),
    ];
    let v_discrete = discrete_strip_centre(31, 0.5);
    Verdict::new(
        checks.iter().all(|&c| c),
        format!(
            "heat {h:.4} ({:+.2}%), taylor1 {t1:.4} ({:+.2}%), taylor2 {t2:.4} ({:+.2}%), error ratio {:.1}; \
             v centre {:.4e} vs 1-D grid solution {v_discrete:.4e} and 1/cosh(8) = {:.4e}",
            100.0 * (h / 14.613706 - 1.0),
            100.0 * (t1 / 15.999996 - 1.0),
            100.0 * (t2 / 16.000025 - 1.0),
            (h - 16.0).abs() / (t1 - 16.0).abs(),
            b.v.get(100, 19),
            1.0 / 8f64.cosh(),
        ),
    )
}

fn sup_rel(a: &Field, b: &Field) -> f64 {
    let mask = a.mask();
    let scale = mask.inside_nodes().iter().map(|&i| b.at(i).abs()).fold(0.0, f64::max);
    mask.inside_nodes().iter().map(|&i| (a.at(i) - b.at(i)).abs()).fold(0.0, f64::max) / scale
}

fn lambda_derivatives() -> Verdict {
    let m = shape(ShapeKind::Disk { radius: 28.0 }, 64, 64);
    let lambda = 1.0 / 5f64.sqrt();
    let tight = SolveOptions::with_tol(1e-13);
    let cfg = |l: f64| SolverConfig::from_lambda(l).unwrap().with_solve(tight);
    let v = |l: f64| solve_v(&m, &cfg(l)).expect("solve v");
    let v0 = v(lambda);
    let dv = solve_vprime(&m, &cfg(lambda), &v0).expect("solve v'");
    let d2v = solve_vsecond(&m, &cfg(lambda), &v0, &dv).expect("solve v''");

    let errors = |delta: f64| {
        let (up, down) = (v(lambda + delta), v(lambda - delta));
        let first = up.zip_with(&down, |a, b| (a - b) / (2.0 * delta)).unwrap();
        let second = up
            .zip_with(&down, |a, b| a + b)
            .unwrap()
            .zip_with(&v0, |s, c| (s - 2.0 * c) / (delta * delta))
            .unwrap();
        (sup_rel(&first, &dv), sup_rel(&second, &d2v))
    };
    let (e1, e2) = errors(1e-3);
    let (a1, a2) = errors(0.02);
    let (b1, b2) = errors(0.01);
    let (c1, c2) = errors(0.005);
    let ratios = [a1 / b1, b1 / c1, a2 / b2, b2 / c2];
    let order_ok = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    Verdict::new(
        e1 <= 1e-4 && e2 <= 1e-4 && order_ok,
        format!(
            "delta 1e-3: v' {e1:.2e}, v'' {e2:.2e}; halving ratios v' {:.3} {:.3}, v'' {:.3} {:.3}",
            ratios[0], ratios[1], ratios[2], ratios[3]
        ),
    )
}

fn exact_bundle_identity() -> Verdict {
    let mut worst: f64 = 0.0;
    for m in [disk128(), shape(ShapeKind::LShape { size: 120, thickness: 50 }, 128, 128)] {
        let d = exact(&m);
        for lambda in [0.1, 0.5, 2.0] {
            let b = PdeBundle::from_distance(&d, lambda);
            for kind in EstimatorKind::ALL {
                worst = worst.max(error_linf(&estimate(&b, kind).field, &d).unwrap());
            }
        }
    }
    Verdict::new(worst <= 1e-12, format!("max deviation {worst:.2e}"))
}

fn shape_ordering() -> Verdict {
    let start = Instant::now();
    let shapes = [
        ("disk", ShapeKind::Disk { radius: 60.0 }),
        ("annulus", ShapeKind::Annulus { r_in: 20.0, r_out: 60.0 }),
        ("L-shape", ShapeKind::LShape { size: 120, thickness: 50 }),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, kind) in shapes {
        let m = shape(kind, 128, 128);
        let d = exact(&m);
        let t2 = evaluate(&m, &d, Method::Pde(EstimatorKind::Taylor2), &RunParams::from_t(5.0).unwrap());
        let h = evaluate(&m, &d, Method::Pde(EstimatorKind::HeatLog), &RunParams::from_t(1.0).unwrap());
        pass &= t2.l2 < h.l2 && t2.flags.is_clean() && h.flags.is_clean();
        parts.push(format!("{name} {:.4} < {:.4}", t2.l2, h.l2));
    }
    let (fast, time) = within_time(start.elapsed(), Duration::from_secs(120));
    Verdict::new(pass && fast, format!("{}, {time}", parts.join(", ")))
}

struct Curve {
    ts: Vec<f64>,
    l2: Vec<f64>,
}

impl Curve {
    fn best(&self) -> (f64, f64) {
        self.ts
            .iter()
            .zip(&self.l2)
            .map(|(&t, &l)| (t, l))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
    }
}

fn disk_curves() -> Vec<(EstimatorKind, bool, Curve)> {
    let m = disk128();
    let d = exact(&m);
    let ts = parameter_grid(0.2, 10.0, 25, true).unwrap();
    let mut out = Vec::new();
    for kind in EstimatorKind::ALL {
        for normalize in [true, false] {
            let l2 = ts
                .iter()
                .map(|&t| {
                    let p = RunParams { normalize, ..RunParams::from_t(t).unwrap() };
                    let r = evaluate(&m, &d, Method::Pde(kind), &p);
                    assert!(r.flags.failure.is_none(), "{kind} t={t}: {}", r.flags);
                    r.l2
                })
                .collect();
            out.push((kind, normalize, Curve { ts: ts.clone(), l2 }));
        }
    }
    out
}

fn curve(curves: &[(EstimatorKind, bool, Curve)], kind: EstimatorKind, normalized: bool) -> &Curve {
    &curves.iter().find(|c| c.0 == kind && c.1 == normalized).unwrap().2
}

fn disk_orderings(curves: &[(EstimatorKind, bool, Curve)]) -> Verdict {
    use EstimatorKind::*;
    let best = |k, n| curve(curves, k, n).best();
    let (h, t1, t2) = (best(HeatLog, true), best(Taylor1, true), best(Taylor2, true));
    let ordering = t2.1 < t1.1 && t1.1 < h.1;
    let mut improvements = Vec::new();
    let mut improved = true;
    for kind in EstimatorKind::ALL {
        let (raw, norm) = (best(kind, false), best(kind, true));
        improved &= norm.1 < raw.1;
        improvements.push(format!("{kind} raw {:.4}@{:.2} -> {:.4}@{:.2}", raw.1, raw.0, norm.1, norm.0));
    }
    Verdict::new(
        ordering && improved,
        format!(
            "normalized best L2 taylor2 {:.4}@{:.2}, taylor1 {:.4}@{:.2}, heat {:.4}@{:.2} (ordering {}); {}",
            t2.1,
            t2.0,
            t1.1,
            t1.0,
            h.1,
            h.0,
            if ordering { "holds" } else { "broken" },
            improvements.join(", ")
        ),
    )
}

fn flat_minimum(curves: &[(EstimatorKind, bool, Curve)]) -> Verdict {
    let c = curve(curves, EstimatorKind::Taylor2, true);
    let window: Vec<f64> = c.ts.iter().zip(&c.l2).filter(|(&t, _)| (2.0..=10.0).contains(&t)).map(|(_, &l)| l).collect();
    let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = window.iter().cloned().fold(0.0, f64::max);
    Verdict::new(hi <= 2.0 * lo, format!("max/min over {} points = {:.3}", window.len(), hi / lo))
}

fn normalization_invariances() -> Verdict {
    let opts = SolveOptions::default();
    let m = disk128();
    let b = solve_bundle(&m, &SolverConfig::from_t(5.0).unwrap()).unwrap();
    let mut worst_scale: f64 = 0.0;
    for w in [exact(&m), estimate(&b, EstimatorKind::Taylor2).field] {
        let base = normalize_gradient(&w, &opts).unwrap().field;
        for alpha in [0.5, 2.0, 10.0] {
            let scaled = normalize_gradient(&w.map_inside(|x| alpha * x), &opts).unwrap().field;
            worst_scale = worst_scale.max(error_linf(&scaled, &base).unwrap());
        }
    }
    let strip = shape(ShapeKind::Strip { width: 31 }, 200, 40);
    let d = exact(&strip);
    let n = normalize_gradient(&d, &opts).unwrap().field;
    let off_axis = strip
        .inside_nodes()
        .iter()
        .filter(|&&i| strip.coords(i).1 != 19)
        .map(|&i| (n.at(i) - d.at(i)).abs())
        .fold(0.0, f64::max);
    Verdict::new(
        worst_scale <= 1e-9 && off_axis <= 0.5,
        format!("scale deviation {worst_scale:.2e}, strip off-axis Linf {off_axis:.4}"),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, run: &dyn Fn() -> Verdict| {
        let start = Instant::now();
        let v = run();
        let status = if v.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!v.pass);
        println!("criterion {n:>2} {status} {name}: {} [{:.1}s]", v.detail, start.elapsed().as_secs_f64());
    };
    report(1, "two-pass EDT equals brute force", &edt_equivalence);
    report(2, "soft minima bracket the minimum", &min_bracketing);
    report(3, "blend beats softmin and logconv", &blend_improvement);
    report(4, "strip closed-form values", &strip_oracle);
    report(5, "lambda derivatives match finite differences", &lambda_derivatives);
    report(6, "exact bundle reproduces the distance", &exact_bundle_identity);
    report(7, "taylor2 at t=5 beats heat at t=1", &shape_ordering);
    let curves = disk_curves();
    report(8, "best-t orderings on the disk", &|| disk_orderings(&curves));
    report(9, "flat taylor2 minimum", &|| flat_minimum(&curves));
    report(10, "normalization invariances", &normalization_invariances);
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
