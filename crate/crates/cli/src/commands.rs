use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use distkit::io::{self, format_value};
use distkit::metrics::{error_map, slice_extract};
use distkit::pipeline::{evaluate, parameter_grid, run_method};
use distkit::{edt, extract_boundary, BinaryMask, ErrorReport, Method, RunParams, ScalarField};
use rayon::prelude::*;

use crate::{CompareArgs, ComputeArgs, ConvFlags, Outcome, Scale, SliceArgs, Source, SweepArgs};

type Field = ScalarField<f64>;

fn load_mask(input: Option<&Path>, shape: Option<&distkit::ShapeSpec>) -> Result<BinaryMask> {
    match (input, shape) {
        (Some(path), _) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            io::read_mask_pgm(&bytes).with_context(|| format!("loading mask from {}", path.display()))
        }
        (None, Some(spec)) => spec.build().with_context(|| format!("building shape {spec}")),
        (None, None) => bail!("either --input or --shape is required"),
    }
}

fn source_mask(source: &Source) -> Result<BinaryMask> {
    load_mask(source.input.as_deref(), source.shape.as_ref())
}

fn params(scale: Scale, conv: ConvFlags, normalize: bool) -> Result<RunParams> {
    let base = match (scale.t, scale.lambda) {
        (Some(t), _) => RunParams::from_t(t),
        (None, Some(lambda)) => RunParams::from_lambda(lambda),
        (None, None) => bail!("either --t or --lambda is required"),
    }
    .context("parsing parameters")?;
    Ok(RunParams {
        k: conv.k,
        boundary_dim: conv.d,
        normalize,
        prefactor: !conv.no_prefactor,
        ..base
    })
}

fn exact_distance(mask: &BinaryMask) -> Field {
    edt::edt_fast(mask, &extract_boundary(mask))
}

fn write(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn report_row(out: &mut String, r: &ErrorReport, with_normalized: bool) {
    out.push_str(&r.method);
    if with_normalized {
        write!(out, ",{}", r.normalized).unwrap();
    }
    writeln!(out, ",{},{},{},{}", format_value(r.t), format_value(r.l2), format_value(r.linf), r.flags).unwrap();
}

fn outcome<'a>(reports: impl IntoIterator<Item = &'a ErrorReport>) -> Outcome {
    if reports.into_iter().all(|r| r.flags.is_clean()) {
        Outcome::Clean
    } else {
        Outcome::Flagged
    }
}

/// `distance.csv`, `error.csv`, `error.ppm` and a one-row `report.csv`.
pub fn compute(args: &ComputeArgs) -> Result<Outcome> {
    let mask = source_mask(&args.source)?;
    let params = params(args.scale, args.conv, !args.no_normalize)?;
    let exact = exact_distance(&mask);
    let run = run_method::<f64>(&mask, args.method, &params).with_context(|| format!("running {}", args.method))?;
    let mut report = ErrorReport::new(args.method.name(), run.normalized, params.t(), &run.field, &exact)
        .context("scoring against the exact distance")?;
    report.flags = run.flags;
    let errors = error_map(&run.field, &exact).context("building the error map")?;

    create_dir(&args.out)?;
    write(&args.out, "distance.csv", io::write_field_csv(&run.field))?;
    write(&args.out, "error.csv", io::write_field_csv(&errors))?;
    write(&args.out, "error.ppm", io::write_heatmap_ppm(&errors, None))?;
    let mut csv = String::from("method,t,l2,linf,flags\n");
    report_row(&mut csv, &report, false);
    write(&args.out, "report.csv", csv)?;
    Ok(outcome([&report]))
}

/// `sweep.csv` with one row per (method, normalization, t) cell, in that nesting order.
pub fn sweep(args: &SweepArgs) -> Result<Outcome> {
    if args.methods.is_empty() {
        bail!("--methods is empty");
    }
    let ts = parameter_grid(args.t_min, args.t_max, args.t_steps, args.log_grid).context("building the t grid")?;
    let mask = source_mask(&args.source)?;
    let exact = exact_distance(&mask);

    let mut cells = Vec::new();
    for &method in &args.methods {
        let variants: &[bool] = match (method.is_differential(), args.both, args.no_normalize) {
            (true, true, _) => &[true, false],
            (true, false, no) => if no { &[false] } else { &[true] },
            (false, ..) => &[false],
        };
        for &normalize in variants {
            for &t in &ts {
                cells.push((method, normalize, t));
            }
        }
    }
    let reports: Vec<ErrorReport> = cells
        .par_iter()
        .map(|&(method, normalize, t)| match params(Scale { t: Some(t), lambda: None }, args.conv, normalize) {
            Ok(p) => evaluate(&mask, &exact, method, &p),
            Err(e) => ErrorReport::failed(method.name(), normalize, t, format!("{e:#}")),
        })
        .collect();

    create_dir(&args.out)?;
    let mut csv = String::from("method,normalized,t,l2,linf,flags\n");
    for r in &reports {
        report_row(&mut csv, r, true);
    }
    write(&args.out, "sweep.csv", csv)?;
    Ok(outcome(&reports))
}

/// Slice, error curve, summary and SoftMin/blend error heatmaps on a shared scale.
pub fn compare_conv(args: &CompareArgs) -> Result<Outcome> {
    let mask = source_mask(&args.source)?;
    let params = params(args.scale, args.conv, false)?;
    let row = args.row.unwrap_or(mask.height() / 2);
    let exact = exact_distance(&mask);

    let mut fields = Vec::new();
    let mut reports = Vec::new();
    for method in [Method::LogConv, Method::SoftMin, Method::Blend] {
        let run = run_method::<f64>(&mask, method, &params).with_context(|| format!("running {method}"))?;
        let mut report = ErrorReport::new(method.name(), false, params.t(), &run.field, &exact)?;
        report.flags = run.flags;
        reports.push(report);
        fields.push(run.field);
    }
    let [logc, soft, blend] = &fields[..] else { unreachable!() };
    let columns = slice_extract(&exact, row).context("slicing the exact distance")?;

    let mut slice = String::from("column,exact,logconv,softmin,blend\n");
    let mut curve = String::from("column,logconv,softmin,blend\n");
    for &(x, d) in &columns {
        let (l, s, b) = (logc.get(x, row), soft.get(x, row), blend.get(x, row));
        writeln!(slice, "{x},{},{},{},{}", format_value(d), format_value(l), format_value(s), format_value(b)).unwrap();
        writeln!(
            curve,
            "{x},{},{},{}",
            format_value((l - d).abs()),
            format_value((s - d).abs()),
            format_value((b - d).abs())
        )
        .unwrap();
    }
    let mut summary = String::from("method,t,l2,linf,flags\n");
    for r in &reports {
        report_row(&mut summary, r, false);
    }
    let soft_err = error_map(soft, &exact)?;
    let blend_err = error_map(blend, &exact)?;
    let scale = soft_err.max_inside().max(blend_err.max_inside());

    create_dir(&args.out)?;
    write(&args.out, "slice.csv", slice)?;
    write(&args.out, "error_curve.csv", curve)?;
    write(&args.out, "report.csv", summary)?;
    write(&args.out, "softmin_error.ppm", io::write_heatmap_ppm(&soft_err, Some(scale)))?;
    write(&args.out, "blend_error.ppm", io::write_heatmap_ppm(&blend_err, Some(scale)))?;
    Ok(outcome(&reports))
}

/// Defined nodes whose four neighbours are defined.
fn interior_of_defined(grid: &io::FieldGrid) -> Result<BinaryMask> {
    let (w, h) = (grid.width, grid.height);
    let defined = |x: usize, y: usize| !grid.get(x, y).is_nan();
    BinaryMask::from_fn(w, h, |x, y| {
        x > 0 && y > 0 && x + 1 < w && y + 1 < h
            && defined(x, y)
            && defined(x - 1, y)
            && defined(x + 1, y)
            && defined(x, y - 1)
            && defined(x, y + 1)
    })
    .context("recovering the mask from the field")
}

/// `column,value` for the inside nodes of one row.
pub fn slice(args: &SliceArgs) -> Result<Outcome> {
    let path = &args.field;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let grid = io::read_field_csv(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mask = if args.input.is_some() || args.shape.is_some() {
        load_mask(args.input.as_deref(), args.shape.as_ref())?
    } else {
        interior_of_defined(&grid)?
    };
    let field: Field = grid.into_field(&mask).context("attaching the field to the mask")?;
    let series = slice_extract(&field, args.row).context("slicing")?;
    let mut csv = String::from("column,value\n");
    for (x, v) in series {
        writeln!(csv, "{x},{}", format_value(v)).unwrap();
    }
    match &args.out {
        Some(out) => fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?,
        None => print!("{csv}"),
    }
    Ok(Outcome::Clean)
}
