//! Binary PGM (P5, maxval 255) encoding.

use std::path::Path;

use thiserror::Error;

use crate::bitmap::{BitmapError, GrayBitmap};

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("not a binary PGM file: {0}")]
    BadHeader(String),
    #[error("unsupported maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),
    #[error("pixel data truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error(transparent)]
    Bitmap(#[from] BitmapError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn encode(img: &GrayBitmap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn decode(data: &[u8]) -> Result<GrayBitmap, PgmError> {
    let mut pos = 0usize;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // whitespace and comments between header tokens
        while pos < data.len() {
            match data[pos] {
                b'#' => {
                    while pos < data.len() && data[pos] != b'\n' {
                        pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(PgmError::BadHeader("header ended early".into()));
        }
        fields.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(PgmError::BadHeader(format!("magic {:?}", fields[0])));
    }
    let parse = |s: &str| {
        s.parse::<u32>()
            .map_err(|_| PgmError::BadHeader(format!("bad number {s:?}")))
    };
    let width = parse(&fields[1])? as usize;
    let height = parse(&fields[2])? as usize;
    let maxval = parse(&fields[3])?;
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let expected = width * height;
    let raster = data.get(pos..).unwrap_or(&[]);
    if raster.len() < expected {
        return Err(PgmError::Truncated {
            expected,
            actual: raster.len(),
        });
    }
    Ok(GrayBitmap::new(width, height, raster[..expected].to_vec())?)
}

pub fn write(path: &Path, img: &GrayBitmap) -> Result<(), PgmError> {
    std::fs::write(path, encode(img))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<GrayBitmap, PgmError> {
    decode(&std::fs::read(path)?)
}
