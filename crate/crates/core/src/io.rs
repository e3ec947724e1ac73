//! Netpbm masks in, CSV grids / 16-bit PGM fields / PPM heatmaps out.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, ScalarField};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldFileFormat {
    CsvGrid,
    Pgm16,
}

struct Header {
    binary: bool,
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first raster byte.
    data_start: usize,
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Reads the magic number and the three header integers, skipping `#` comments.
fn read_header(bytes: &[u8]) -> Result<Header> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(parse_err("not a PGM file (expected P2 or P5)")),
    };
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(parse_err("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(parse_err("malformed header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| parse_err("header value out of range"))?;
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(parse_err(format!("maxval {maxval} outside 1..=65535")));
    }
    if width == 0 || height == 0 {
        return Err(parse_err("zero image dimension"));
    }
    // exactly one whitespace byte separates the header from a binary raster
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        None if !binary => {}
        _ => return Err(parse_err("missing whitespace after header")),
    }
    Ok(Header {
        binary,
        width: width as usize,
        height: height as usize,
        maxval: maxval as u32,
        data_start: pos,
    })
}

fn read_pixels(bytes: &[u8], h: &Header) -> Result<Vec<u32>> {
    let n = h.width * h.height;
    let body = &bytes[h.data_start.min(bytes.len())..];
    let pixels: Vec<u32> = if h.binary {
        let depth = if h.maxval < 256 { 1 } else { 2 };
        if body.len() < n * depth {
            return Err(parse_err(format!("truncated raster: {} of {} bytes", body.len(), n * depth)));
        }
        if depth == 1 {
            body[..n].iter().map(|&b| b as u32).collect()
        } else {
            body[..2 * n]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
                .collect()
        }
    } else {
        let text = std::str::from_utf8(body).map_err(|_| parse_err("non-ASCII raster"))?;
        let values = text
            .split_ascii_whitespace()
            .take(n)
            .map(|t| t.parse::<u32>().map_err(|_| parse_err(format!("bad pixel `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() < n {
            return Err(parse_err(format!("truncated raster: {} of {n} pixels", values.len())));
        }
        values
    };
    if let Some(&p) = pixels.iter().find(|&&p| p > h.maxval) {
        return Err(parse_err(format!("pixel {p} exceeds maxval {}", h.maxval)));
    }
    Ok(pixels)
}

/// Reads a P2 or P5 image; a pixel is inside when `value ≥ (maxval + 1) / 2`.
pub fn read_mask_pgm(bytes: &[u8]) -> Result<BinaryMask> {
    let h = read_header(bytes)?;
    let pixels = read_pixels(bytes, &h)?;
    let inside = pixels.iter().map(|&p| 2 * p >= h.maxval + 1).collect();
    BinaryMask::new(h.width, h.height, inside)
}

/// Writes a mask as P5 (`binary`) or P2 with maxval 255; inside pixels are 255.
pub fn write_mask_pgm(mask: &BinaryMask, binary: bool) -> Vec<u8> {
    let (w, h) = (mask.width(), mask.height());
    let mut out = format!("{}\n{w} {h}\n255\n", if binary { "P5" } else { "P2" }).into_bytes();
    if binary {
        out.extend(mask.inside().iter().map(|&b| if b { 255u8 } else { 0 }));
    } else {
        for row in mask.inside().chunks(w) {
            let line: Vec<&str> = row.iter().map(|&b| if b { "255" } else { "0" }).collect();
            out.extend(line.join(" ").into_bytes());
            out.push(b'\n');
        }
    }
    out
}

/// Decimal with at most nine significant digits, trailing zeros removed.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    // round to nine significant digits first so the exponent is the rounded one
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, sci.parse::<f64>().unwrap());
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `"width height"` then one comma-separated line per row; undefined nodes as `nan`.
pub fn write_field_csv<T: Real>(field: &ScalarField<T>) -> String {
    let (w, h) = (field.width(), field.height());
    let mut out = String::with_capacity(w * h * 10);
    writeln!(out, "{w} {h}").unwrap();
    for row in field.values().chunks(w) {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&format_value(v.to_f64_lossy()));
        }
        out.push('\n');
    }
    out
}

/// Raw grid read back from a CSV field dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl FieldGrid {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Attaches the grid to a mask of the same dimensions.
    pub fn into_field<T: Real>(self, mask: &BinaryMask) -> Result<ScalarField<T>> {
        if (self.width, self.height) != (mask.width(), mask.height()) {
            return Err(Error::DimensionMismatch {
                expected: mask.len(),
                got: self.values.len(),
            });
        }
        ScalarField::from_values(mask, self.values.into_iter().map(T::lit).collect())
    }
}

pub fn read_field_csv(text: &str) -> Result<FieldGrid> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err("empty field file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(format!("bad dimension `{t}`"))))
        .collect::<Result<_>>()?;
    let [width, height] = dims[..] else {
        return Err(parse_err("header must be `width height`"));
    };
    let mut values = Vec::with_capacity(width * height);
    for (y, line) in lines.take(height).enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| parse_err(format!("bad value `{t}` in row {y}"))))
            .collect::<Result<_>>()?;
        if row.len() != width {
            return Err(parse_err(format!("row {y} has {} values, expected {width}", row.len())));
        }
        values.extend(row);
    }
    if values.len() != width * height {
        return Err(parse_err(format!("expected {height} rows")));
    }
    Ok(FieldGrid { width, height, values })
}

fn auto_scale<T: Real>(field: &ScalarField<T>, scale_max: Option<T>) -> T {
    let s = scale_max.unwrap_or_else(|| field.max_inside());
    if s > T::zero() && s.is_finite() {
        s
    } else {
        T::one()
    }
}

/// 16-bit P5 image: `0 ↦ 0`, `scale_max ↦ 65535`, clamped; undefined nodes are 0.
pub fn write_field_pgm16<T: Real>(field: &ScalarField<T>, scale_max: Option<T>) -> Vec<u8> {
    let scale = auto_scale(field, scale_max).to_f64_lossy();
    let mut out = format!("P5\n{} {}\n65535\n", field.width(), field.height()).into_bytes();
    for v in field.values() {
        let v = v.to_f64_lossy();
        let q = if v.is_nan() { 0 } else { (v / scale * 65535.0).round().clamp(0.0, 65535.0) as u16 };
        out.extend(q.to_be_bytes());
    }
    out
}

/// Inverse of [`write_field_pgm16`] up to quantisation (undefined nodes come back as 0).
pub fn read_field_pgm16(bytes: &[u8], scale_max: f64) -> Result<FieldGrid> {
    let h = read_header(bytes)?;
    let pixels = read_pixels(bytes, &h)?;
    let values = pixels.iter().map(|&p| p as f64 / h.maxval as f64 * scale_max).collect();
    Ok(FieldGrid { width: h.width, height: h.height, values })
}

pub fn write_field<T: Real>(field: &ScalarField<T>, format: FieldFileFormat) -> Vec<u8> {
    match format {
        FieldFileFormat::CsvGrid => write_field_csv(field).into_bytes(),
        FieldFileFormat::Pgm16 => write_field_pgm16(field, None),
    }
}

/// Blue → green → red ramp; `s` is clamped to `[0, 1]`.
pub fn heat_color(s: f64) -> [u8; 3] {
    let s = if s.is_nan() { 0.0 } else { s.clamp(0.0, 1.0) };
    let c = |x: f64| (255.0 * x).round() as u8;
    if s <= 0.5 {
        [0, c(2.0 * s), c(1.0 - 2.0 * s)]
    } else {
        [c(2.0 * s - 1.0), c(2.0 - 2.0 * s), 0]
    }
}

/// P6 heatmap of `field / scale_max` (auto: the inside maximum). Undefined nodes are black.
pub fn write_heatmap_ppm<T: Real>(field: &ScalarField<T>, scale_max: Option<T>) -> Vec<u8> {
    let scale = auto_scale(field, scale_max).to_f64_lossy();
    let mut out = format!("P6\n{} {}\n255\n", field.width(), field.height()).into_bytes();
    for v in field.values() {
        let v = v.to_f64_lossy();
        if v.is_nan() {
            out.extend([0, 0, 0]);
        } else {
            out.extend(heat_color(v / scale));
        }
    }
    out
}
