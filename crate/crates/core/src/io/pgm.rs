//! PGM mask files: binary P5 and ASCII P2, maxval 255.
//!
//! Soft masks store round(255 * v) per pixel and read back as v / 255.
//! Ground-truth masks binarize on read: values above 127 map to 1.
//! Parse errors carry the byte offset of the offending input.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::RasterMask;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, offset: usize, msg: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), offset, msg: msg.into() }
}

/// Write a mask as binary P5 with maxval 255, rounding each value to the
/// nearest level.
pub fn write_mask(path: &Path, mask: &RasterMask) -> Result<()> {
    let mut out = Vec::with_capacity(mask.values().len() + 32);
    write!(out, "P5\n{} {}\n255\n", mask.w(), mask.h()).expect("in-memory write");
    for &v in mask.values() {
        out.push((255.0 * v).round().clamp(0.0, 255.0) as u8);
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn skip_separators(&mut self) {
        loop {
            match self.data.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(b) = self.data.get(self.pos) {
                        self.pos += 1;
                        if *b == b'\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn read_number(&mut self, what: &str) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(format_err(self.path, start, format!("expected {what}")));
        }
        let text = std::str::from_utf8(&self.data[start..self.pos]).expect("ascii digits");
        text.parse::<usize>()
            .map_err(|_| format_err(self.path, start, format!("{what} overflows")))
    }
}

fn parse(path: &Path) -> Result<RasterMask> {
    let data = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let mut cur = Cursor { data: &data, pos: 0, path };

    cur.skip_separators();
    let magic_at = cur.pos;
    let binary = match data.get(magic_at..magic_at + 2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(format_err(path, magic_at, "expected magic 'P5' or 'P2'")),
    };
    cur.pos += 2;

    let w = cur.read_number("width")?;
    let h = cur.read_number("height")?;
    if w == 0 || h == 0 {
        return Err(format_err(path, cur.pos, "dimensions must be positive"));
    }
    let maxval_at = {
        cur.skip_separators();
        cur.pos
    };
    let maxval = cur.read_number("maxval")?;
    if maxval != 255 {
        return Err(format_err(path, maxval_at, format!("unsupported maxval {maxval}, expected 255")));
    }
    let count = w
        .checked_mul(h)
        .ok_or_else(|| format_err(path, cur.pos, "dimension overflow"))?;

    let mut values = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        match data.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(format_err(path, cur.pos, "expected whitespace before raster data")),
        }
        if data.len() < cur.pos + count {
            return Err(format_err(
                path,
                data.len(),
                format!("truncated raster: expected {count} bytes, found {}", data.len() - cur.pos),
            ));
        }
        values.extend(data[cur.pos..cur.pos + count].iter().map(|&b| b as f64 / 255.0));
    } else {
        for _ in 0..count {
            let at = {
                cur.skip_separators();
                cur.pos
            };
            let v = cur.read_number("pixel value")?;
            if v > 255 {
                return Err(format_err(path, at, format!("pixel value {v} exceeds maxval 255")));
            }
            values.push(v as f64 / 255.0);
        }
    }
    RasterMask::from_values(h, w, values)
}

/// Read a soft mask: every pixel value divided by 255.
pub fn read_mask(path: &Path) -> Result<RasterMask> {
    parse(path)
}

/// Read a ground-truth mask: pixel values above 127 map to 1, the rest to 0.
pub fn read_mask_binary(path: &Path) -> Result<RasterMask> {
    let soft = parse(path)?;
    let values = soft
        .values()
        .iter()
        .map(|&v| if v * 255.0 > 127.0 { 1.0 } else { 0.0 })
        .collect();
    RasterMask::from_values(soft.h(), soft.w(), values)
}
