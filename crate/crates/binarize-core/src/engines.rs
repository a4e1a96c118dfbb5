//! The binarization engines.
//!
//! Three engines with different cost profiles compute the same per-pixel
//! statistics: `naive` re-iterates every clamped window (the definitional
//! oracle), `integral` queries two summed-area tables, and `sliding` runs
//! the single-pass column accumulators. All of them feed exact integer sums
//! through one shared rule-evaluation path, so for a given rule their
//! outputs are bit-identical, not merely close. `otsu` is the global
//! baseline with no window at all.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::image::{BinaryImage, GrayImage, Label};
use crate::integral::{build_integral, PixelMap};
use crate::rules::{
    compute_global_stats, otsu_threshold, GlobalStats, Rule, RuleError, RuleEval, RuleParams,
    StatsKind,
};
use crate::stats::{
    self, moments_from_sums, sweep_extrema, sweep_mean_variance, sweep_quantile, SlidingConfig,
    StatsError, SweepReport,
};
use crate::window::WindowSpec;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("engine `{engine}` does not support rule `{rule}`")]
    UnsupportedRule { engine: Engine, rule: Rule },
    #[error("unknown engine name `{0}`")]
    UnknownEngine(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// A named engine, as selected on the command line and reported in CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Naive,
    Integral,
    Sliding,
    Otsu,
}

impl Engine {
    pub const ALL: [Engine; 4] = [Engine::Naive, Engine::Integral, Engine::Sliding, Engine::Otsu];

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Naive => "naive",
            Engine::Integral => "integral",
            Engine::Sliding => "sliding",
            Engine::Otsu => "otsu",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Engine::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| EngineError::UnknownEngine(s.to_owned()))
    }
}

/// A binarization result plus what the statistics machinery allocated.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineOutput {
    pub image: BinaryImage,
    /// Auxiliary numeric slots allocated for statistics (input and output
    /// buffers excluded).
    pub aux_slots: usize,
    /// Sweep details when the sliding engine ran.
    pub sweep: Option<SweepReport>,
}

/// Fraction used for the median rule.
const MEDIAN_Q: f64 = 0.5;

fn global_for(rule: Rule, image: &GrayImage) -> Option<GlobalStats> {
    rule.needs_global().then(|| compute_global_stats(image))
}

/// Wolf's and Feng's original formulations normalize by the image-wide
/// maximum of the window standard deviation rather than a constant.
fn wants_adaptive_r(rule: Rule, params: &RuleParams) -> bool {
    params.adaptive_r && matches!(rule, Rule::Wolf | Rule::Feng)
}

fn adaptive_r_from_max_variance(max_variance: f64, fallback: f64) -> f64 {
    let s = max_variance.sqrt();
    if s > 0.0 {
        s
    } else {
        fallback
    }
}

/// Definitional engine: every window re-scanned in full. This is the oracle
/// the others are measured against, and the Θ(HWhw) cost the single-pass
/// engines exist to avoid.
pub fn binarize_naive(
    image: &GrayImage,
    spec: &WindowSpec,
    rule: Rule,
    params: &RuleParams,
) -> Result<EngineOutput, EngineError> {
    if rule.stats_kind() == StatsKind::Global {
        return Err(EngineError::UnsupportedRule {
            engine: Engine::Naive,
            rule,
        });
    }
    let global = global_for(rule, image);
    let mut params = *params;
    if wants_adaptive_r(rule, &params) {
        let mut max_v: f64 = 0.0;
        for_each_window_moments(image, spec, |_, _, n, c, d| {
            let (_, v) = moments_from_sums(n, c, d);
            max_v = max_v.max(v);
        });
        params.r = adaptive_r_from_max_variance(max_v, params.r);
    }
    let eval = RuleEval::new(rule, spec, &params, global.as_ref())?;

    let mut out = BinaryImage::background(image.height(), image.width())
        .expect("dimensions come from a valid image");
    let mut aux_slots = 0;
    match rule.stats_kind() {
        StatsKind::MeanVariance => {
            for_each_window_moments(image, spec, |i, j, n, c, d| {
                let label = eval.decide_from_moments(image.get(i, j), n, c, d);
                out.set(i, j, label);
            });
        }
        StatsKind::Extrema => {
            for i in 0..image.height() {
                for j in 0..image.width() {
                    let (n, min, max) = window_extrema(image, spec, i, j);
                    let label = eval.decide_from_extrema(image.get(i, j), n, min, max);
                    out.set(i, j, label);
                }
            }
        }
        StatsKind::Quantile => {
            // One 256-bin histogram, rebuilt per window.
            aux_slots = 256;
            let mut hist = [0u32; 256];
            for i in 0..image.height() {
                for j in 0..image.width() {
                    hist.fill(0);
                    let mut n = 0u32;
                    for_each_window_pixel(image, spec, i, j, |g| {
                        hist[g as usize] += 1;
                        n += 1;
                    });
                    let median = stats::level_at_rank(&hist, stats::rank_for(MEDIAN_Q, n));
                    let label = eval.decide_from_median(image.get(i, j), n, median);
                    out.set(i, j, label);
                }
            }
        }
        StatsKind::Global => unreachable!("rejected above"),
    }
    Ok(EngineOutput {
        image: out,
        aux_slots,
        sweep: None,
    })
}

/// Integral-image engine: two summed-area tables, then four lookups per
/// window sum. Supports the mean/variance rules only.
pub fn binarize_integral(
    image: &GrayImage,
    spec: &WindowSpec,
    rule: Rule,
    params: &RuleParams,
) -> Result<EngineOutput, EngineError> {
    if rule.stats_kind() != StatsKind::MeanVariance {
        return Err(EngineError::UnsupportedRule {
            engine: Engine::Integral,
            rule,
        });
    }
    let global = global_for(rule, image);
    let sums = build_integral(image, PixelMap::Identity);
    let squares = build_integral(image, PixelMap::Square);
    let aux_slots = sums.slots() + squares.slots();

    let height = image.height();
    let width = image.width();
    let (l, r) = (spec.left() as i64, spec.right() as i64);
    let (o, u) = (spec.over() as i64, spec.under() as i64);

    let window_moments = |i: usize, j: usize| -> (u32, i64, i64) {
        let alpha0 = (i as i64 - o).max(-1);
        let alpha1 = (i as i64 + u).min(height as i64 - 1);
        let beta0 = (j as i64 - l).max(-1);
        let beta1 = (j as i64 + r).min(width as i64 - 1);
        let n = spec.effective_count(i, j, height, width);
        let c = sums.window_sum_unchecked(alpha0, alpha1, beta0, beta1);
        let d = squares.window_sum_unchecked(alpha0, alpha1, beta0, beta1);
        (n, c, d)
    };

    let mut params = *params;
    if wants_adaptive_r(rule, &params) {
        let mut max_v: f64 = 0.0;
        for i in 0..height {
            for j in 0..width {
                let (n, c, d) = window_moments(i, j);
                let (_, v) = moments_from_sums(n, c, d);
                max_v = max_v.max(v);
            }
        }
        params.r = adaptive_r_from_max_variance(max_v, params.r);
    }
    let eval = RuleEval::new(rule, spec, &params, global.as_ref())?;

    let mut out = BinaryImage::background(height, width)
        .expect("dimensions come from a valid image");
    for i in 0..height {
        for j in 0..width {
            let (n, c, d) = window_moments(i, j);
            let label = eval.decide_from_moments(image.get(i, j), n, c, d);
            out.set(i, j, label);
        }
    }
    Ok(EngineOutput {
        image: out,
        aux_slots,
        sweep: None,
    })
}

/// Single-pass engine built on the sliding column accumulators.
pub fn binarize_sliding(
    image: &GrayImage,
    spec: &WindowSpec,
    rule: Rule,
    params: &RuleParams,
    config: &SlidingConfig,
) -> Result<EngineOutput, EngineError> {
    if rule.stats_kind() == StatsKind::Global {
        return Err(EngineError::UnsupportedRule {
            engine: Engine::Sliding,
            rule,
        });
    }
    let global = global_for(rule, image);
    let mut params = *params;
    if wants_adaptive_r(rule, &params) {
        let mut max_v: f64 = 0.0;
        sweep_mean_variance(image, spec, config, |_, _, _, _, v| {
            max_v = max_v.max(v);
        })?;
        params.r = adaptive_r_from_max_variance(max_v, params.r);
    }
    let eval = RuleEval::new(rule, spec, &params, global.as_ref())?;

    let height = image.height();
    let width = image.width();
    let mut out = BinaryImage::background(height, width)
        .expect("dimensions come from a valid image");
    let report = match rule.stats_kind() {
        StatsKind::MeanVariance => sweep_mean_variance(image, spec, config, |i, j, n, m, v| {
            let label = eval.decide_mean_variance(image.get(i, j), n, m, v);
            out.set(i, j, label);
        })?,
        StatsKind::Extrema => sweep_extrema(image, spec, config, |i, j, min, max| {
            let n = spec.effective_count(i, j, height, width);
            let label = eval.decide_from_extrema(image.get(i, j), n, min, max);
            out.set(i, j, label);
        })?,
        StatsKind::Quantile => sweep_quantile(image, spec, MEDIAN_Q, config, |i, j, median| {
            let n = spec.effective_count(i, j, height, width);
            let label = eval.decide_from_median(image.get(i, j), n, median);
            out.set(i, j, label);
        })?,
        StatsKind::Global => unreachable!("rejected above"),
    };
    Ok(EngineOutput {
        image: out,
        aux_slots: report.aux_slots,
        sweep: Some(report),
    })
}

/// Global Otsu thresholding; windows play no part.
pub fn binarize_otsu(image: &GrayImage) -> EngineOutput {
    let t = otsu_threshold(image);
    let mut out = BinaryImage::background(image.height(), image.width())
        .expect("dimensions come from a valid image");
    for i in 0..image.height() {
        for j in 0..image.width() {
            if image.get(i, j) <= t {
                out.set(i, j, Label::Foreground);
            }
        }
    }
    EngineOutput {
        image: out,
        // The 256-bin histogram.
        aux_slots: 256,
        sweep: None,
    }
}

/// Visit every pixel of the clamped window of (i, j).
#[inline]
fn for_each_window_pixel(
    image: &GrayImage,
    spec: &WindowSpec,
    i: usize,
    j: usize,
    mut visit: impl FnMut(u8),
) {
    let lo_row = (i as i64 - spec.over() as i64 + 1).max(0) as usize;
    let hi_row = (i + spec.under()).min(image.height() - 1);
    let lo_col = (j as i64 - spec.left() as i64 + 1).max(0) as usize;
    let hi_col = (j + spec.right()).min(image.width() - 1);
    for a in lo_row..=hi_row {
        for b in lo_col..=hi_col {
            visit(image.get(a, b));
        }
    }
}

/// Window count and integer moment sums at every pixel, each window
/// re-scanned in full.
fn for_each_window_moments(
    image: &GrayImage,
    spec: &WindowSpec,
    mut visit: impl FnMut(usize, usize, u32, i64, i64),
) {
    for i in 0..image.height() {
        for j in 0..image.width() {
            let mut n = 0u32;
            let mut c = 0i64;
            let mut d = 0i64;
            for_each_window_pixel(image, spec, i, j, |g| {
                n += 1;
                c += g as i64;
                d += g as i64 * g as i64;
            });
            debug_assert_eq!(n, spec.effective_count(i, j, image.height(), image.width()));
            visit(i, j, n, c, d);
        }
    }
}

fn window_extrema(image: &GrayImage, spec: &WindowSpec, i: usize, j: usize) -> (u32, u8, u8) {
    let mut n = 0u32;
    let mut min = u8::MAX;
    let mut max = u8::MIN;
    for_each_window_pixel(image, spec, i, j, |g| {
        n += 1;
        min = min.min(g);
        max = max.max(g);
    });
    (n, min, max)
}
