//! Netpbm codecs: PGM (P2/P5) input, PGM (P5) and PBM (P4) output.
//!
//! Only 8-bit grayscale is supported (`maxval <= 255`). Header comments
//! (`#` to end of line) are accepted anywhere whitespace is allowed.

use crate::image::{BinaryImage, GrayImage, ImageError};
use thiserror::Error;

/// Errors from decoding a PGM stream.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PnmError {
    #[error("not a PGM file: expected magic P2 or P5")]
    BadMagic,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("maxval {0} out of range: only maxval in 1..=255 is supported")]
    UnsupportedMaxval(u32),
    #[error("truncated pixel data: expected {expected} samples, found {got}")]
    Truncated { expected: usize, got: usize },
    #[error("sample value {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: u32, maxval: u32 },
    #[error(transparent)]
    Image(#[from] ImageError),
}

struct HeaderScanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderScanner<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    /// Advances past whitespace and `#` comments.
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    /// Reads one unsigned decimal token.
    fn read_number(&mut self, what: &str) -> Result<u32, PnmError> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(PnmError::MalformedHeader(format!(
                "expected unsigned integer for {what}"
            )));
        }
        let token = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        token
            .parse::<u32>()
            .map_err(|_| PnmError::MalformedHeader(format!("{what} value too large: {token}")))
    }
}

/// Decodes a binary (`P5`) or ASCII (`P2`) PGM byte stream.
///
/// Pixel `(i, j)` of the file maps to row `i`, column `j` of the result.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    if bytes.len() < 2 {
        return Err(PnmError::BadMagic);
    }
    let ascii = match &bytes[..2] {
        b"P5" => false,
        b"P2" => true,
        _ => return Err(PnmError::BadMagic),
    };

    let mut scanner = HeaderScanner::new(&bytes[2..]);
    let width = scanner.read_number("width")? as usize;
    let height = scanner.read_number("height")? as usize;
    let maxval = scanner.read_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PnmError::MalformedHeader(format!(
            "zero dimension: {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 255 {
        return Err(PnmError::UnsupportedMaxval(maxval));
    }
    let expected = height
        .checked_mul(width)
        .ok_or_else(|| PnmError::MalformedHeader("dimensions overflow".into()))?;

    let pixels = if ascii {
        let mut pixels = Vec::with_capacity(expected);
        while pixels.len() < expected {
            scanner.skip_separators();
            if scanner.pos >= scanner.bytes.len() {
                return Err(PnmError::Truncated {
                    expected,
                    got: pixels.len(),
                });
            }
            let value = scanner.read_number("sample")?;
            if value > maxval {
                return Err(PnmError::SampleOutOfRange { value, maxval });
            }
            pixels.push(value as u8);
        }
        pixels
    } else {
        // Exactly one whitespace byte separates the maxval from the raster.
        let after_header = 2 + scanner.pos;
        if after_header >= bytes.len() || !bytes[after_header].is_ascii_whitespace() {
            return Err(PnmError::MalformedHeader(
                "missing whitespace before raster data".into(),
            ));
        }
        let data = &bytes[after_header + 1..];
        if data.len() < expected {
            return Err(PnmError::Truncated {
                expected,
                got: data.len(),
            });
        }
        data[..expected].to_vec()
    };

    Ok(GrayImage::new(height, width, pixels)?)
}

/// Encodes a grayscale image as binary PGM (`P5`, maxval 255).
///
/// This is the symmetric encoder for [`read_pgm`]:
/// `read_pgm(&write_pgm(img)) == img` for every valid image.
pub fn write_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + image.pixels().len());
    out.extend_from_slice(format!("P5\n{} {}\n255\n", image.width(), image.height()).as_bytes());
    out.extend_from_slice(image.pixels());
    out
}

/// Encodes a binary image as binary PBM (`P4`).
///
/// Foreground pixels are written as set bits (black ink), background as
/// clear bits. Bits are packed most-significant first and each row is
/// padded to a byte boundary.
pub fn write_pbm(image: &BinaryImage) -> Vec<u8> {
    let width = image.width();
    let height = image.height();
    let row_bytes = width.div_ceil(8);
    let mut out = Vec::with_capacity(32 + row_bytes * height);
    out.extend_from_slice(format!("P4\n{} {}\n", width, height).as_bytes());
    for i in 0..height {
        for byte_index in 0..row_bytes {
            let mut byte = 0u8;
            for bit in 0..8 {
                let j = byte_index * 8 + bit;
                if j < width && image.get(i, j).is_foreground() {
                    byte |= 0x80 >> bit;
                }
            }
            out.push(byte);
        }
    }
    out
}
