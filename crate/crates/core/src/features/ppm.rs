use std::io::Read;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    /// Interleaved RGB, row-major.
    pub pixels: Vec<u8>,
}

/// Minimal binary PPM (`P6`) reader with maxval 255.
pub fn read_ppm<R: Read>(mut r: R) -> Result<RgbImage> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut pos = 0;
    let mut header = Vec::with_capacity(4);
    while header.len() < 4 {
        // skip whitespace and comments
        while pos < data.len() {
            if data[pos].is_ascii_whitespace() {
                pos += 1;
            } else if data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() && data[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("truncated PPM header".into()));
        }
        header.push(std::str::from_utf8(&data[start..pos]).unwrap_or("").to_owned());
    }
    if header[0] != "P6" {
        return Err(Error::Parse(format!("unsupported PPM magic {:?}", header[0])));
    }
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad PPM header field {s:?}")))
    };
    let (width, height, maxval) = (num(&header[1])?, num(&header[2])?, num(&header[3])?);
    if maxval != 255 {
        return Err(Error::Parse(format!("unsupported PPM maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let len = width * height * 3;
    let pixels = data
        .get(pos..pos + len)
        .ok_or_else(|| Error::Parse("truncated PPM raster".into()))?
        .to_vec();
    Ok(RgbImage {
        width,
        height,
        pixels,
    })
}
