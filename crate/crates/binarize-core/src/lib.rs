//! Local adaptive binarization built on constant-space sliding-window statistics.
//!
//! The crate binarizes 8-bit grayscale images with per-pixel thresholds derived
//! from local window statistics (mean, standard deviation, extrema, quantiles).
//! Three interchangeable engines compute those statistics:
//!
//! 1. [`engines::binarize_naive`] recomputes every window from scratch,
//!    `Θ(HWhw)` time. Slow, but definitional: it is the correctness oracle.
//! 2. [`engines::binarize_integral`] uses classic summed-area tables, `Θ(HW)`
//!    time but `Θ(HW)` auxiliary memory for the two integral images.
//! 3. [`engines::binarize_sliding`] keeps per-column running sums updated one
//!    row at a time, `Θ(HW)` time *and* `Θ(min{H,W})` auxiliary memory.
//!
//! All engines share one rule-evaluation path ([`rules`]), so for the
//! mean/variance rule family their outputs are bit-identical, not merely
//! close. The sliding engine additionally supports extrema rules (Bernsen)
//! via monotone deques and quantile rules (median) via column histograms.
//!
//! # Example
//!
//! ```
//! use binarize_core::image::GrayImage;
//! use binarize_core::window::WindowSpec;
//! use binarize_core::rules::{Rule, RuleParams};
//! use binarize_core::stats::SlidingConfig;
//! use binarize_core::engines::binarize_sliding;
//!
//! let img = GrayImage::new(4, 4, vec![200; 16]).unwrap();
//! let spec = WindowSpec::new(3, 3).unwrap();
//! let out = binarize_sliding(&img, &spec, Rule::Sauvola, &RuleParams::default(),
//!                            &SlidingConfig::default()).unwrap();
//! assert_eq!(out.image.width(), 4);
//! ```

pub mod engines;
pub mod image;
pub mod integral;
pub mod netpbm;
pub mod rules;
pub mod stats;
pub mod window;

pub use engines::{binarize_integral, binarize_naive, binarize_otsu, binarize_sliding};
pub use image::{BinaryImage, GrayImage, Label};
pub use rules::{Rule, RuleParams};
pub use stats::{Axis, SlidingConfig};
pub use window::WindowSpec;
