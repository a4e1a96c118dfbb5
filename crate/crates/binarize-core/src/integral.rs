//! Integral images (summed-area tables), the baseline the sliding
//! accumulators replace.
//!
//! `J[i,j]` holds the sum of `f(I)` over all pixels with row <= i and
//! column <= j. Any rectangle sum then costs four lookups. Cells are 64-bit
//! unconditionally: a large scan's sum of squared levels overflows 32 bits
//! long before the image stops fitting in memory.

use thiserror::Error;

use crate::image::GrayImage;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntegralError {
    #[error(
        "window rows ({alpha0}, {alpha1}] x cols ({beta0}, {beta1}] out of range \
         for {height}x{width} (bounds start at -1, ends exclusive at the dimension)"
    )]
    RangeOutOfBounds {
        alpha0: i64,
        alpha1: i64,
        beta0: i64,
        beta1: i64,
        height: usize,
        width: usize,
    },
}

/// Pixel transform accumulated by the integral image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelMap {
    Identity,
    Square,
}

impl PixelMap {
    #[inline]
    fn apply(self, g: u8) -> i64 {
        match self {
            PixelMap::Identity => g as i64,
            PixelMap::Square => g as i64 * g as i64,
        }
    }
}

/// Cumulative-sum grid of one pixel transform over one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralImage {
    height: usize,
    width: usize,
    cells: Vec<i64>,
}

impl IntegralImage {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of auxiliary numeric slots this table occupies.
    pub fn slots(&self) -> usize {
        self.cells.len()
    }

    /// `J[i,j]`, with the virtual zero row/column at index −1.
    #[inline]
    pub fn at(&self, i: i64, j: i64) -> i64 {
        if i < 0 || j < 0 {
            return 0;
        }
        debug_assert!((i as usize) < self.height && (j as usize) < self.width);
        self.cells[i as usize * self.width + j as usize]
    }

    /// Sum of `f(I)` over rows `(alpha0, alpha1]` and columns
    /// `(beta0, beta1]`, by the four-corner identity.
    pub fn window_sum(
        &self,
        alpha0: i64,
        alpha1: i64,
        beta0: i64,
        beta1: i64,
    ) -> Result<i64, IntegralError> {
        let row_ok = -1 <= alpha0 && alpha0 <= alpha1 && alpha1 < self.height as i64;
        let col_ok = -1 <= beta0 && beta0 <= beta1 && beta1 < self.width as i64;
        if !(row_ok && col_ok) {
            return Err(IntegralError::RangeOutOfBounds {
                alpha0,
                alpha1,
                beta0,
                beta1,
                height: self.height,
                width: self.width,
            });
        }
        Ok(self.window_sum_unchecked(alpha0, alpha1, beta0, beta1))
    }

    #[inline]
    pub(crate) fn window_sum_unchecked(
        &self,
        alpha0: i64,
        alpha1: i64,
        beta0: i64,
        beta1: i64,
    ) -> i64 {
        self.at(alpha1, beta1) - self.at(alpha0, beta1) - self.at(alpha1, beta0)
            + self.at(alpha0, beta0)
    }
}

/// Build the integral image of `f` over `image` with the usual in-place
/// recurrence `J[i,j] = J[i-1,j] + J[i,j-1] + f(I[i,j]) - J[i-1,j-1]`.
pub fn build_integral(image: &GrayImage, f: PixelMap) -> IntegralImage {
    let height = image.height();
    let width = image.width();
    let mut cells = vec![0i64; height * width];
    for i in 0..height {
        for j in 0..width {
            let above = if i > 0 { cells[(i - 1) * width + j] } else { 0 };
            let left = if j > 0 { cells[i * width + j - 1] } else { 0 };
            let diag = if i > 0 && j > 0 {
                cells[(i - 1) * width + j - 1]
            } else {
                0
            };
            cells[i * width + j] = above + left + f.apply(image.get(i, j)) - diag;
        }
    }
    IntegralImage {
        height,
        width,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng, height: usize, width: usize) -> GrayImage {
        let pixels = (0..height * width).map(|_| rng.gen::<u8>()).collect();
        GrayImage::new(height, width, pixels).unwrap()
    }

    /// Definitional double sum over the prefix rectangle.
    fn prefix_sum_oracle(image: &GrayImage, f: PixelMap, i: usize, j: usize) -> i64 {
        let mut total = 0;
        for a in 0..=i {
            for b in 0..=j {
                total += f.apply(image.get(a, b));
            }
        }
        total
    }

    #[test]
    fn all_ones_has_product_form() {
        let img = GrayImage::filled(3, 3, 1).unwrap();
        let integral = build_integral(&img, PixelMap::Identity);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(integral.at(i as i64, j as i64), ((i + 1) * (j + 1)) as i64);
            }
        }
    }

    #[test]
    fn single_pixel_square() {
        let img = GrayImage::new(1, 1, vec![5]).unwrap();
        let integral = build_integral(&img, PixelMap::Square);
        assert_eq!(integral.at(0, 0), 25);
    }

    #[test]
    fn cells_match_double_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for f in [PixelMap::Identity, PixelMap::Square] {
            let img = random_image(&mut rng, 8, 8);
            let integral = build_integral(&img, f);
            for i in 0..8 {
                for j in 0..8 {
                    assert_eq!(
                        integral.at(i as i64, j as i64),
                        prefix_sum_oracle(&img, f, i, j),
                        "f={f:?} at ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn cells_are_monotone_along_rows_and_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let img = random_image(&mut rng, 9, 7);
        let integral = build_integral(&img, PixelMap::Identity);
        for i in 0..9i64 {
            for j in 0..7i64 {
                assert!(integral.at(i, j) >= integral.at(i - 1, j));
                assert!(integral.at(i, j) >= integral.at(i, j - 1));
            }
        }
    }

    #[test]
    fn full_image_query_is_total_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let img = random_image(&mut rng, 6, 11);
        let integral = build_integral(&img, PixelMap::Identity);
        let total: i64 = img.pixels().iter().map(|&p| p as i64).sum();
        assert_eq!(integral.window_sum(-1, 5, -1, 10).unwrap(), total);
    }

    #[test]
    fn empty_range_sums_to_zero() {
        let img = GrayImage::filled(4, 4, 200).unwrap();
        let integral = build_integral(&img, PixelMap::Identity);
        assert_eq!(integral.window_sum(2, 2, -1, 3).unwrap(), 0);
        assert_eq!(integral.window_sum(-1, 3, 1, 1).unwrap(), 0);
    }

    #[test]
    fn random_rectangles_match_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let img = random_image(&mut rng, 10, 13);
        let integral = build_integral(&img, PixelMap::Square);
        for _ in 0..200 {
            let a0 = rng.gen_range(-1i64..10);
            let a1 = rng.gen_range(a0..10);
            let b0 = rng.gen_range(-1i64..13);
            let b1 = rng.gen_range(b0..13);
            let mut direct = 0i64;
            for a in (a0 + 1)..=a1 {
                for b in (b0 + 1)..=b1 {
                    let g = img.get(a as usize, b as usize) as i64;
                    direct += g * g;
                }
            }
            assert_eq!(integral.window_sum(a0, a1, b0, b1).unwrap(), direct);
        }
    }

    #[test]
    fn out_of_range_queries_are_rejected() {
        let img = GrayImage::filled(4, 4, 0).unwrap();
        let integral = build_integral(&img, PixelMap::Identity);
        assert!(integral.window_sum(-2, 3, -1, 3).is_err());
        assert!(integral.window_sum(-1, 4, -1, 3).is_err());
        assert!(integral.window_sum(2, 1, -1, 3).is_err());
        assert!(integral.window_sum(-1, 3, 0, 4).is_err());
    }
}
