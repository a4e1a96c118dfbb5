//! Grayscale and binary image containers.
//!
//! Both containers are immutable once constructed (all mutation happens
//! through constructors or builders), so they can be shared freely across
//! threads by reference.

use thiserror::Error;

/// Errors from image construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {height}x{width}")]
    EmptyDimensions { height: usize, width: usize },
    #[error("pixel buffer length {got} does not match {height}x{width} = {expected}")]
    LengthMismatch {
        height: usize,
        width: usize,
        expected: usize,
        got: usize,
    },
}

/// An `H x W` grid of 8-bit gray levels, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    /// Builds an image from a row-major pixel buffer of length `height * width`.
    pub fn new(height: usize, width: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if height == 0 || width == 0 {
            return Err(ImageError::EmptyDimensions { height, width });
        }
        let expected = height
            .checked_mul(width)
            .ok_or(ImageError::LengthMismatch {
                height,
                width,
                expected: usize::MAX,
                got: pixels.len(),
            })?;
        if pixels.len() != expected {
            return Err(ImageError::LengthMismatch {
                height,
                width,
                expected,
                got: pixels.len(),
            });
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    /// An image where every pixel is `level`.
    pub fn filled(height: usize, width: usize, level: u8) -> Result<Self, ImageError> {
        let len = height
            .checked_mul(width)
            .filter(|_| height > 0 && width > 0)
            .ok_or(ImageError::EmptyDimensions { height, width })?;
        Self::new(height, width, vec![level; len])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Gray level at row `i`, column `j`. Panics if out of bounds.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        debug_assert!(i < self.height && j < self.width);
        self.pixels[i * self.width + j]
    }

    /// Row `i` as a slice of `width` gray levels.
    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.pixels[i * self.width..(i + 1) * self.width]
    }

    /// The full row-major pixel buffer.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// The transposed image (rows and columns exchanged).
    pub fn transposed(&self) -> GrayImage {
        let mut out = vec![0u8; self.pixels.len()];
        for i in 0..self.height {
            for j in 0..self.width {
                out[j * self.height + i] = self.get(i, j);
            }
        }
        GrayImage {
            height: self.width,
            width: self.height,
            pixels: out,
        }
    }
}

/// A pixel class produced by binarization.
///
/// Foreground is the ink/text class. It is encoded as 0 internally and as a
/// set bit (black) in PBM output; background is 1 internally, clear in PBM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Label {
    Foreground = 0,
    Background = 1,
}

impl Label {
    #[inline]
    pub fn is_foreground(self) -> bool {
        matches!(self, Label::Foreground)
    }
}

/// An `H x W` grid of foreground/background labels, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    height: usize,
    width: usize,
    labels: Vec<Label>,
}

impl BinaryImage {
    /// An all-background image, to be filled in by an engine.
    pub fn background(height: usize, width: usize) -> Result<Self, ImageError> {
        if height == 0 || width == 0 {
            return Err(ImageError::EmptyDimensions { height, width });
        }
        let len = height
            .checked_mul(width)
            .ok_or(ImageError::EmptyDimensions { height, width })?;
        Ok(Self {
            height,
            width,
            labels: vec![Label::Background; len],
        })
    }

    pub fn from_labels(height: usize, width: usize, labels: Vec<Label>) -> Result<Self, ImageError> {
        if height == 0 || width == 0 {
            return Err(ImageError::EmptyDimensions { height, width });
        }
        let expected = height
            .checked_mul(width)
            .ok_or(ImageError::EmptyDimensions { height, width })?;
        if labels.len() != expected {
            return Err(ImageError::LengthMismatch {
                height,
                width,
                expected,
                got: labels.len(),
            });
        }
        Ok(Self {
            height,
            width,
            labels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Label {
        debug_assert!(i < self.height && j < self.width);
        self.labels[i * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, label: Label) {
        debug_assert!(i < self.height && j < self.width);
        self.labels[i * self.width + j] = label;
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Number of pixels where `self` and `other` disagree.
    pub fn count_mismatches(&self, other: &BinaryImage) -> usize {
        assert_eq!(self.height, other.height);
        assert_eq!(self.width, other.width);
        self.labels
            .iter()
            .zip(&other.labels)
            .filter(|(a, b)| a != b)
            .count()
    }
}
