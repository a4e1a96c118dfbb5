//! Window parameterization shared by every engine.
//!
//! A window of height `h` and width `w` anchored at pixel `(i, j)` covers
//! rows `(i - o, i + u]` and columns `(j - l, j + r]` before clamping to the
//! image bounds, where the four offsets are derived by floor division. Even
//! side lengths are legal and deliberately asymmetric (`w = 4` gives
//! `l = 2, r = 2`; `w = 5` gives `l = 3, r = 2`); the asymmetry is fixed and
//! never re-centered.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("window sides must be at least 1, got {height}x{width}")]
    ZeroSide { height: usize, width: usize },
}

/// Window dimensions and the derived left/right/over/under offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    h: usize,
    w: usize,
    l: usize,
    r: usize,
    o: usize,
    u: usize,
}

impl WindowSpec {
    /// A window of `height x width` pixels. Sides larger than the image are
    /// legal; clamping degenerates the window toward the whole image.
    pub fn new(height: usize, width: usize) -> Result<Self, WindowError> {
        if height == 0 || width == 0 {
            return Err(WindowError::ZeroSide { height, width });
        }
        Ok(Self {
            h: height,
            w: width,
            l: width.div_ceil(2),
            r: width / 2,
            o: height.div_ceil(2),
            u: height / 2,
        })
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn width(&self) -> usize {
        self.w
    }

    /// Columns to the left of the anchor, exclusive bound.
    pub fn left(&self) -> usize {
        self.l
    }

    /// Columns to the right of the anchor, inclusive bound.
    pub fn right(&self) -> usize {
        self.r
    }

    /// Rows above the anchor, exclusive bound.
    pub fn over(&self) -> usize {
        self.o
    }

    /// Rows below the anchor, inclusive bound.
    pub fn under(&self) -> usize {
        self.u
    }

    /// Window area before clamping.
    pub fn area(&self) -> usize {
        self.h * self.w
    }

    /// The same window with height and width exchanged.
    pub fn transposed(&self) -> WindowSpec {
        WindowSpec::new(self.w, self.h).expect("sides already validated")
    }

    /// Number of in-bounds pixels of the window anchored at `(i, j)` in an
    /// `image_height x image_width` image. Always in `1..=h*w`.
    #[inline]
    pub fn effective_count(
        &self,
        i: usize,
        j: usize,
        image_height: usize,
        image_width: usize,
    ) -> u32 {
        debug_assert!(i < image_height && j < image_width);
        let i = i as i64;
        let j = j as i64;
        let height = image_height as i64;
        let width = image_width as i64;
        let cols = (j + self.r as i64).min(width - 1) - (j - self.l as i64).max(-1);
        let rows = (i + self.u as i64).min(height - 1) - (i - self.o as i64).max(-1);
        (cols * rows) as u32
    }
}
