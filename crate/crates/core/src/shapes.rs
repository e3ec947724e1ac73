//! Analytic test shapes rasterised at node centres.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeKind {
    Disk { radius: f64 },
    /// Horizontal band of `width` full rows (one-pixel margin left and right).
    Strip { width: usize },
    Rectangle { width: usize, height: usize },
    Annulus { r_in: f64, r_out: f64 },
    /// Union of a vertical and a horizontal bar of `thickness` inside a `size` square.
    LShape { size: usize, thickness: usize },
}

/// A shape together with the canvas it is drawn on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub width: usize,
    pub height: usize,
}

/// Offset that centres an extent of `n` nodes in `total`.
fn centred(total: usize, n: usize, what: &str) -> Result<usize> {
    if n == 0 || n + 2 > total {
        return Err(Error::DoesNotFit(format!("{what} of {n} nodes in {total}")));
    }
    Ok((total - n) / 2)
}

pub fn make_shape(kind: ShapeKind, width: usize, height: usize) -> Result<BinaryMask> {
    if width < 3 || height < 3 {
        return Err(Error::TooSmall { width, height });
    }
    let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    let r2 = move |x: usize, y: usize| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        dx * dx + dy * dy
    };
    let inside: Box<dyn Fn(usize, usize) -> bool> = match kind {
        ShapeKind::Disk { radius } => Box::new(move |x, y| r2(x, y) <= radius * radius),
        ShapeKind::Annulus { r_in, r_out } => {
            if !(r_in < r_out) {
                return Err(Error::BadConfig(format!("annulus radii {r_in} >= {r_out}")));
            }
            Box::new(move |x, y| (r_in * r_in..=r_out * r_out).contains(&r2(x, y)))
        }
        ShapeKind::Strip { width: rows } => {
            let y0 = centred(height, rows, "strip")?;
            Box::new(move |x, y| x > 0 && x + 1 < width && (y0..y0 + rows).contains(&y))
        }
        ShapeKind::Rectangle { width: w, height: h } => {
            let (x0, y0) = (centred(width, w, "rectangle")?, centred(height, h, "rectangle")?);
            Box::new(move |x, y| (x0..x0 + w).contains(&x) && (y0..y0 + h).contains(&y))
        }
        ShapeKind::LShape { size, thickness } => {
            if thickness == 0 || thickness > size {
                return Err(Error::BadConfig(format!("L-shape thickness {thickness} vs size {size}")));
            }
            let (x0, y0) = (centred(width, size, "L-shape")?, centred(height, size, "L-shape")?);
            Box::new(move |x, y| {
                let in_box = (x0..x0 + size).contains(&x) && (y0..y0 + size).contains(&y);
                in_box && (x < x0 + thickness || y >= y0 + size - thickness)
            })
        }
    };
    let touches_border = (0..width).any(|x| inside(x, 0) || inside(x, height - 1))
        || (0..height).any(|y| inside(0, y) || inside(width - 1, y));
    if touches_border {
        return Err(Error::DoesNotFit(format!("{kind:?} on a {width}x{height} canvas")));
    }
    BinaryMask::from_fn(width, height, inside)
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, width: usize, height: usize) -> Self {
        ShapeSpec { kind, width, height }
    }

    pub fn build(&self) -> Result<BinaryMask> {
        make_shape(self.kind, self.width, self.height)
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ShapeKind::Disk { radius } => write!(f, "disk:r={radius}")?,
            ShapeKind::Strip { width } => write!(f, "strip:w={width}")?,
            ShapeKind::Rectangle { width, height } => write!(f, "rect:w={width},h={height}")?,
            ShapeKind::Annulus { r_in, r_out } => write!(f, "annulus:r_in={r_in},r_out={r_out}")?,
            ShapeKind::LShape { size, thickness } => write!(f, "lshape:size={size},thickness={thickness}")?,
        }
        write!(f, ",canvas={}x{}", self.width, self.height)
    }
}

/// Parses `kind:key=value,...,canvas=N` or `canvas=WxH`, e.g. `disk:r=20,canvas=64`.
impl FromStr for ShapeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse(format!("shape `{s}`: {msg}"));
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params: std::collections::BTreeMap<&str, &str> = std::collections::BTreeMap::new();
        for kv in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("expected key=value, got `{kv}`")))?;
            params.insert(k.trim(), v.trim());
        }
        let canvas = params.remove("canvas").unwrap_or("64");
        let (width, height) = match canvas.split_once(['x', 'X']) {
            Some((w, h)) => (w.parse(), h.parse()),
            None => (canvas.parse(), canvas.parse()),
        };
        let (width, height) = (
            width.map_err(|_| bad(format!("bad canvas `{canvas}`")))?,
            height.map_err(|_| bad(format!("bad canvas `{canvas}`")))?,
        );
        let mut num = |keys: &[&'static str]| -> Result<f64> {
            for &k in keys {
                if let Some(v) = params.remove(k) {
                    return v.parse().map_err(|_| bad(format!("bad value for `{k}`")));
                }
            }
            Err(bad(format!("missing `{}`", keys[0])))
        };
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(bad(format!("expected a whole number, got {v}")))
            }
        };
        let kind = match name {
            "disk" => ShapeKind::Disk { radius: num(&["r", "radius"])? },
            "strip" => ShapeKind::Strip { width: count(num(&["w", "width"])?)? },
            "rect" | "rectangle" => ShapeKind::Rectangle {
                width: count(num(&["w", "width"])?)?,
                height: count(num(&["h", "height"])?)?,
            },
            "annulus" => ShapeKind::Annulus {
                r_in: num(&["r_in", "rin"])?,
                r_out: num(&["r_out", "rout"])?,
            },
            "lshape" | "L" => ShapeKind::LShape {
                size: count(num(&["size"])?)?,
                thickness: count(num(&["thickness", "t"])?)?,
            },
            other => return Err(bad(format!("unknown shape `{other}`"))),
        };
        if let Some(k) = params.keys().next() {
            return Err(bad(format!("unexpected parameter `{k}`")));
        }
        Ok(ShapeSpec { kind, width, height })
    }
}
