//! Plain-text serialization of a decoded polygon field.
//!
//! Layout:
//!
//! ```text
//! PPF1 <image_h> <image_w> <patch_side> <k>
//! <gate> <x0> <y0> ... <x(k-1)> <y(k-1)>     one line per patch, row-major
//! ```
//!
//! Values are decoded (post tanh/sigmoid) and written with ten significant
//! digits, so a round trip preserves at least nine.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{DecodedField, LowResMap};
use crate::geometry::{PatchPolygon, Vertex};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, offset: usize, msg: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), offset, msg: msg.into() }
}

pub fn write_field(path: &Path, field: &DecodedField) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "PPF1 {} {} {} {}",
        field.grid_h * field.patch_side,
        field.grid_w * field.patch_side,
        field.patch_side,
        field.k
    )
    .expect("in-memory write");
    for gi in 0..field.grid_h {
        for gj in 0..field.grid_w {
            write!(out, "{:.9e}", field.gates.get(gi, gj)).expect("in-memory write");
            let poly = &field.polygons[gi * field.grid_w + gj];
            for v in poly.vertices() {
                write!(out, " {:.9e} {:.9e}", v.x, v.y).expect("in-memory write");
            }
            out.push('\n');
        }
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn read_field(path: &Path) -> Result<DecodedField> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut offset = 0usize;
    let mut lines = Vec::new(); // (byte offset, line)
    for line in text.split_inclusive('\n') {
        lines.push((offset, line.trim_end_matches(['\n', '\r'])));
        offset += line.len();
    }
    let eof = text.len();

    let (header_at, header) = *lines
        .first()
        .ok_or_else(|| format_err(path, 0, "empty field file"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("PPF1") {
        return Err(format_err(path, header_at, "expected magic 'PPF1'"));
    }
    let mut dim = |what: &str| -> Result<usize> {
        parts
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| format_err(path, header_at, format!("bad or missing {what} in header")))
    };
    let image_h = dim("image height")?;
    let image_w = dim("image width")?;
    let patch_side = dim("patch side")?;
    let k = dim("vertex count")?;
    if patch_side == 0 || k < 3 {
        return Err(format_err(path, header_at, "header needs patch side >= 1 and k >= 3"));
    }
    if image_h == 0 || image_w == 0 || image_h % patch_side != 0 || image_w % patch_side != 0 {
        return Err(format_err(
            path,
            header_at,
            format!("image size {image_h}x{image_w} is not a multiple of patch side {patch_side}"),
        ));
    }
    let grid_h = image_h / patch_side;
    let grid_w = image_w / patch_side;
    let expected = grid_h * grid_w;

    let mut gates = Vec::with_capacity(expected);
    let mut polygons = Vec::with_capacity(expected);
    let mut records = 0usize;
    for &(at, line) in &lines[1..] {
        if line.trim().is_empty() {
            continue;
        }
        if records == expected {
            return Err(format_err(path, at, format!("more than {expected} records")));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 * k + 1 {
            return Err(format_err(
                path,
                at,
                format!("record has {} fields, expected {}", fields.len(), 2 * k + 1),
            ));
        }
        let parse_real = |t: &str, what: &str, lo: f64, hi: f64| -> Result<f64> {
            let v = t
                .parse::<f64>()
                .map_err(|_| format_err(path, at, format!("bad {what} '{t}'")))?;
            if !v.is_finite() || v < lo || v > hi {
                return Err(format_err(path, at, format!("{what} {v} outside [{lo}, {hi}]")));
            }
            Ok(v)
        };
        gates.push(parse_real(fields[0], "gate probability", 0.0, 1.0)?);
        let mut verts = Vec::with_capacity(k);
        for v in 0..k {
            let x = parse_real(fields[1 + 2 * v], "vertex coordinate", -1.0, 1.0)?;
            let y = parse_real(fields[2 + 2 * v], "vertex coordinate", -1.0, 1.0)?;
            verts.push(Vertex::new(x, y));
        }
        polygons.push(PatchPolygon::new(verts)?);
        records += 1;
    }
    if records != expected {
        return Err(format_err(
            path,
            eof,
            format!("expected {expected} records, found {records}"),
        ));
    }
    Ok(DecodedField {
        grid_h,
        grid_w,
        k,
        patch_side,
        polygons,
        gates: LowResMap::from_values(grid_h, grid_w, gates)?,
    })
}
