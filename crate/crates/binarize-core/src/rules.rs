//! Threshold rules mapping per-pixel window statistics to foreground
//! decisions.
//!
//! Every rule follows one decision convention: a pixel with gray level `I`
//! is foreground iff `I <= t`, where `t` is the rule's threshold value.
//! Thresholds are evaluated in double precision from integer-exact
//! statistics; engines that agree on the statistics therefore agree on the
//! output bit for bit.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::image::{GrayImage, Label};
use crate::stats::moments_from_sums;
use crate::window::WindowSpec;

/// Conventional dynamic range of the standard deviation for 8-bit images
/// (half of 255, the Popoviciu bound).
pub const DEFAULT_R: f64 = 128.0;

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("unknown rule name `{0}`")]
    UnknownRule(String),
    #[error("rule `{rule}` needs {stat}, which the caller did not supply")]
    MissingStat { rule: Rule, stat: &'static str },
    #[error("rule `{0}` is a global rule with no per-pixel threshold")]
    GlobalRule(Rule),
    #[error("dynamic range R must be positive, got {0}")]
    NonPositiveR(f64),
    #[error("sauvola needs k >= 0 for the square-root-free decision, got {0}")]
    NegativeSauvolaK(f64),
}

/// Which family of window statistics a rule consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsKind {
    /// Window mean and variance (the Niblack family).
    MeanVariance,
    /// Window minimum and maximum.
    Extrema,
    /// Window median.
    Quantile,
    /// Whole-image histogram; no window at all.
    Global,
}

/// A named binarization rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Niblack,
    Sauvola,
    Wolf,
    Feng,
    Rais,
    Khurshid,
    Phansalkar,
    Bernsen,
    /// Bernsen midrange with a low-contrast cutoff: windows whose gray-level
    /// range falls below `contrast` are classified background outright.
    BernsenContrast,
    Median,
    Otsu,
}

impl Rule {
    pub const ALL: [Rule; 11] = [
        Rule::Niblack,
        Rule::Sauvola,
        Rule::Wolf,
        Rule::Feng,
        Rule::Rais,
        Rule::Khurshid,
        Rule::Phansalkar,
        Rule::Bernsen,
        Rule::BernsenContrast,
        Rule::Median,
        Rule::Otsu,
    ];

    /// Stable identifier used by the CLI and in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Niblack => "niblack",
            Rule::Sauvola => "sauvola",
            Rule::Wolf => "wolf",
            Rule::Feng => "feng",
            Rule::Rais => "rais",
            Rule::Khurshid => "khurshid",
            Rule::Phansalkar => "phansalkar",
            Rule::Bernsen => "bernsen",
            Rule::BernsenContrast => "bernsen-contrast",
            Rule::Median => "median",
            Rule::Otsu => "otsu",
        }
    }

    pub fn stats_kind(&self) -> StatsKind {
        match self {
            Rule::Niblack
            | Rule::Sauvola
            | Rule::Wolf
            | Rule::Feng
            | Rule::Rais
            | Rule::Khurshid
            | Rule::Phansalkar => StatsKind::MeanVariance,
            Rule::Bernsen | Rule::BernsenContrast => StatsKind::Extrema,
            Rule::Median => StatsKind::Quantile,
            Rule::Otsu => StatsKind::Global,
        }
    }

    /// Whether the threshold formula reads image-wide statistics.
    pub fn needs_global(&self) -> bool {
        matches!(self, Rule::Wolf | Rule::Feng | Rule::Rais)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| RuleError::UnknownRule(s.to_owned()))
    }
}

/// Tunable coefficients shared by all rules. Each rule reads only the
/// fields it names; the rest are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleParams {
    /// Weight on the deviation term (Niblack, Sauvola, Wolf, Khurshid,
    /// Phansalkar). Sign and useful range are rule-specific.
    pub k: f64,
    /// Dynamic range of the standard deviation.
    pub r: f64,
    /// Phansalkar exponential coefficients. No standard values exist for
    /// 8-bit gray levels; the defaults (p=2, q=10) are the ones commonly
    /// quoted for normalized images and mostly vanish at 8-bit scale.
    pub p: f64,
    pub q: f64,
    /// Feng coefficients; defaults are midpoints of the ranges the method's
    /// authors recommend.
    pub alpha1: f64,
    pub k1: f64,
    pub k2: f64,
    pub gamma: f64,
    /// Low-contrast cutoff for `bernsen-contrast`, in gray levels.
    pub contrast: f64,
    /// When true, Khurshid's correction uses the full window area h·w as in
    /// the formula's literal statement; when false, the border-clamped
    /// in-bounds count n.
    pub hw_effective: bool,
    /// Replace R for Wolf/Feng with the image-wide maximum of the window
    /// standard deviation, computed by an extra pass (their original
    /// formulations). Falls back to `r` when the image has zero variance
    /// everywhere.
    pub adaptive_r: bool,
}

impl Default for RuleParams {
    fn default() -> Self {
        Self {
            k: 0.5,
            r: DEFAULT_R,
            p: 2.0,
            q: 10.0,
            alpha1: 0.12,
            k1: 0.25,
            k2: 0.04,
            gamma: 2.0,
            contrast: 15.0,
            hw_effective: true,
            adaptive_r: false,
        }
    }
}

/// Image-wide statistics needed by Wolf, Feng, and Rais.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalStats {
    /// Minimum gray level.
    pub min: u8,
    /// Mean gray level.
    pub mean: f64,
    /// Standard deviation of gray levels.
    pub stddev: f64,
}

/// Exact-integer pass over the image: min, mean, standard deviation.
pub fn compute_global_stats(image: &GrayImage) -> GlobalStats {
    let mut min = u8::MAX;
    let mut sum: u64 = 0;
    let mut sq_sum: u64 = 0;
    for &px in image.pixels() {
        min = min.min(px);
        sum += px as u64;
        sq_sum += (px as u64) * (px as u64);
    }
    let count = image.pixels().len() as f64;
    let mean = sum as f64 / count;
    let variance = (sq_sum as f64 / count - mean * mean).max(0.0);
    GlobalStats {
        min,
        mean,
        stddev: variance.sqrt(),
    }
}

/// Per-pixel statistics of one clamped window. Extrema and median are
/// present only when an engine computed them; mean and variance are NaN in
/// that case so that misuse cannot silently pass as a real value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalStats {
    /// In-bounds pixel count of the clamped window.
    pub n: u32,
    /// Unclamped window area h·w.
    pub window_area: u32,
    pub mean: f64,
    /// Variance, clamped to be non-negative.
    pub variance: f64,
    pub min: Option<u8>,
    pub max: Option<u8>,
    pub median: Option<u8>,
}

impl LocalStats {
    /// Stats from the integer window sums, via the engine-shared
    /// [`moments_from_sums`] expression.
    #[inline]
    pub fn from_moments(n: u32, window_area: u32, sum: i64, sq_sum: i64) -> Self {
        let (mean, variance) = moments_from_sums(n, sum, sq_sum);
        Self {
            n,
            window_area,
            mean,
            variance,
            min: None,
            max: None,
            median: None,
        }
    }

    /// Stats from already-derived moments (used by the sliding sweep, whose
    /// visitor hands out mean and variance directly).
    #[inline]
    pub fn from_mean_variance(n: u32, window_area: u32, mean: f64, variance: f64) -> Self {
        Self {
            n,
            window_area,
            mean,
            variance,
            min: None,
            max: None,
            median: None,
        }
    }

    #[inline]
    pub fn from_extrema(n: u32, window_area: u32, min: u8, max: u8) -> Self {
        Self {
            n,
            window_area,
            mean: f64::NAN,
            variance: f64::NAN,
            min: Some(min),
            max: Some(max),
            median: None,
        }
    }

    #[inline]
    pub fn from_median(n: u32, window_area: u32, median: u8) -> Self {
        Self {
            n,
            window_area,
            mean: f64::NAN,
            variance: f64::NAN,
            min: None,
            max: None,
            median: Some(median),
        }
    }

    pub fn stddev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Square-root-free Sauvola decision.
///
/// Foreground iff `I + m(k-1) <= 0` or `(I + m(k-1))^2 <= k^2 m^2 v / R^2`,
/// which for `k >= 0` is equivalent to the textbook comparison
/// `I <= m(1 + k(s/R - 1))` with `s = sqrt(v)`.
#[inline]
pub fn sauvola_decide(gray: u8, mean: f64, variance: f64, params: &RuleParams) -> Label {
    debug_assert!(params.k >= 0.0);
    debug_assert!(variance >= 0.0);
    let lhs = gray as f64 + mean * (params.k - 1.0);
    if lhs <= 0.0 {
        return Label::Foreground;
    }
    let rhs = params.k * params.k * mean * mean * variance / (params.r * params.r);
    if lhs * lhs <= rhs {
        Label::Foreground
    } else {
        Label::Background
    }
}

fn require_global(
    rule: Rule,
    global: Option<&GlobalStats>,
) -> Result<&GlobalStats, RuleError> {
    global.ok_or(RuleError::MissingStat {
        rule,
        stat: "global image statistics",
    })
}

/// Threshold value of `rule` for one window.
///
/// `global` may be `None` for rules that never read image-wide statistics.
/// For `bernsen-contrast` below the cutoff the returned threshold is
/// negative infinity, which no 8-bit gray level satisfies.
pub fn threshold_value(
    rule: Rule,
    stats: &LocalStats,
    global: Option<&GlobalStats>,
    params: &RuleParams,
) -> Result<f64, RuleError> {
    let mean_variance = |stat: &'static str| -> Result<(f64, f64), RuleError> {
        if stats.mean.is_finite() && stats.variance.is_finite() {
            Ok((stats.mean, stats.variance))
        } else {
            Err(RuleError::MissingStat { rule, stat })
        }
    };
    let checked_r = || -> Result<f64, RuleError> {
        if params.r > 0.0 {
            Ok(params.r)
        } else {
            Err(RuleError::NonPositiveR(params.r))
        }
    };

    match rule {
        Rule::Niblack => {
            let (m, v) = mean_variance("window mean/variance")?;
            Ok(m + params.k * v.sqrt())
        }
        Rule::Sauvola => {
            let (m, v) = mean_variance("window mean/variance")?;
            let r = checked_r()?;
            if params.k < 0.0 {
                return Err(RuleError::NegativeSauvolaK(params.k));
            }
            Ok(m * (1.0 + params.k * (v.sqrt() / r - 1.0)))
        }
        Rule::Wolf => {
            let (m, v) = mean_variance("window mean/variance")?;
            let r = checked_r()?;
            let l = require_global(rule, global)?.min as f64;
            Ok(m - params.k * (m - l) * (1.0 - v.sqrt() / r))
        }
        Rule::Feng => {
            let (m, v) = mean_variance("window mean/variance")?;
            let r = checked_r()?;
            let l = require_global(rule, global)?.min as f64;
            let ratio = v.sqrt() / r;
            Ok(params.alpha1 * m
                + params.k1 * ratio.powf(1.0 + params.gamma) * (m - l)
                + params.k2 * ratio.powf(params.gamma) * l)
        }
        Rule::Rais => {
            let (m, v) = mean_variance("window mean/variance")?;
            let s = v.sqrt();
            let g = require_global(rule, global)?;
            let local = m * s;
            let whole = g.mean * g.stddev;
            if local == whole {
                // Covers the 0/0 case too; the correction term vanishes.
                return Ok(m);
            }
            Ok(m + 0.3 * ((local - whole) / local.max(whole)) * s)
        }
        Rule::Khurshid => {
            let (m, v) = mean_variance("window mean/variance")?;
            let n = if params.hw_effective {
                stats.window_area
            } else {
                stats.n
            } as f64;
            Ok(m + params.k * (v + m * m * ((n - 1.0) / n)).sqrt())
        }
        Rule::Phansalkar => {
            let (m, v) = mean_variance("window mean/variance")?;
            let r = checked_r()?;
            Ok(m * (1.0 + params.p * (-params.q * m).exp() + params.k * (v.sqrt() / r - 1.0)))
        }
        Rule::Bernsen | Rule::BernsenContrast => {
            let (min, max) = match (stats.min, stats.max) {
                (Some(min), Some(max)) => (min as f64, max as f64),
                _ => {
                    return Err(RuleError::MissingStat {
                        rule,
                        stat: "window extrema",
                    })
                }
            };
            if rule == Rule::BernsenContrast && max - min < params.contrast {
                return Ok(f64::NEG_INFINITY);
            }
            Ok((min + max) / 2.0)
        }
        Rule::Median => match stats.median {
            Some(median) => Ok(median as f64),
            None => Err(RuleError::MissingStat {
                rule,
                stat: "window median",
            }),
        },
        Rule::Otsu => Err(RuleError::GlobalRule(rule)),
    }
}

/// A rule plus parameters validated once, exposing the per-pixel decision
/// paths the engines share. Constructing it up front keeps the hot loops
/// free of fallible calls.
#[derive(Debug, Clone)]
pub struct RuleEval {
    rule: Rule,
    params: RuleParams,
    global: Option<GlobalStats>,
    window_area: u32,
}

impl RuleEval {
    pub fn new(
        rule: Rule,
        spec: &WindowSpec,
        params: &RuleParams,
        global: Option<&GlobalStats>,
    ) -> Result<Self, RuleError> {
        match rule {
            Rule::Otsu => return Err(RuleError::GlobalRule(rule)),
            Rule::Sauvola if params.k < 0.0 => {
                return Err(RuleError::NegativeSauvolaK(params.k));
            }
            _ => {}
        }
        let uses_r = matches!(
            rule,
            Rule::Sauvola | Rule::Wolf | Rule::Feng | Rule::Phansalkar
        );
        if uses_r && params.r <= 0.0 {
            return Err(RuleError::NonPositiveR(params.r));
        }
        if rule.needs_global() && global.is_none() {
            return Err(RuleError::MissingStat {
                rule,
                stat: "global image statistics",
            });
        }
        Ok(Self {
            rule,
            params: *params,
            global: global.copied(),
            window_area: spec.area() as u32,
        })
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    /// Decision from the integer window sums (mean/variance rules).
    #[inline]
    pub fn decide_from_moments(&self, gray: u8, n: u32, sum: i64, sq_sum: i64) -> Label {
        let stats = LocalStats::from_moments(n, self.window_area, sum, sq_sum);
        self.decide_mean_variance(gray, stats.n, stats.mean, stats.variance)
    }

    /// Decision from already-derived mean and variance (the sliding sweep's
    /// visitor signature).
    #[inline]
    pub fn decide_mean_variance(&self, gray: u8, n: u32, mean: f64, variance: f64) -> Label {
        if self.rule == Rule::Sauvola {
            return sauvola_decide(gray, mean, variance, &self.params);
        }
        let stats = LocalStats::from_mean_variance(n, self.window_area, mean, variance);
        self.decide(gray, &stats)
    }

    /// Decision from window extrema (bernsen, bernsen-contrast).
    #[inline]
    pub fn decide_from_extrema(&self, gray: u8, n: u32, min: u8, max: u8) -> Label {
        let stats = LocalStats::from_extrema(n, self.window_area, min, max);
        self.decide(gray, &stats)
    }

    /// Decision from the window median.
    #[inline]
    pub fn decide_from_median(&self, gray: u8, n: u32, median: u8) -> Label {
        let stats = LocalStats::from_median(n, self.window_area, median);
        self.decide(gray, &stats)
    }

    /// The uniform foreground test `I <= t` against fully assembled stats.
    #[inline]
    pub fn decide(&self, gray: u8, stats: &LocalStats) -> Label {
        let t = threshold_value(self.rule, stats, self.global.as_ref(), &self.params)
            .expect("parameters validated at construction");
        if (gray as f64) <= t {
            Label::Foreground
        } else {
            Label::Background
        }
    }
}

/// Global threshold maximizing the between-class variance of the histogram
/// split `{<= t}` vs `{> t}`; ties break toward the smallest t.
pub fn otsu_threshold(image: &GrayImage) -> u8 {
    let mut hist = [0u64; 256];
    for &px in image.pixels() {
        hist[px as usize] += 1;
    }
    let total: u64 = image.pixels().len() as u64;
    let total_sum: u64 = hist
        .iter()
        .enumerate()
        .map(|(g, &c)| g as u64 * c)
        .sum();

    let mut best_t = 0u8;
    let mut best_var = f64::NEG_INFINITY;
    let mut n0: u64 = 0;
    let mut sum0: u64 = 0;
    for t in 0..=255u8 {
        n0 += hist[t as usize];
        sum0 += t as u64 * hist[t as usize];
        let var = between_class_variance(n0, total - n0, sum0, total_sum - sum0);
        if var > best_var {
            best_var = var;
            best_t = t;
        }
    }
    best_t
}

/// Shared variance expression: `n0·n1·(μ0−μ1)²`, a positive rescaling of
/// the textbook weighted form with the same maximizer. Classes with zero
/// count contribute zero.
#[inline]
fn between_class_variance(n0: u64, n1: u64, sum0: u64, sum1: u64) -> f64 {
    if n0 == 0 || n1 == 0 {
        return 0.0;
    }
    let mu0 = sum0 as f64 / n0 as f64;
    let mu1 = sum1 as f64 / n1 as f64;
    let diff = mu0 - mu1;
    n0 as f64 * n1 as f64 * diff * diff
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn moment_stats(n: u32, mean: f64, stddev: f64) -> LocalStats {
        LocalStats {
            n,
            window_area: n,
            mean,
            variance: stddev * stddev,
            min: None,
            max: None,
            median: None,
        }
    }

    fn random_image(rng: &mut ChaCha8Rng, height: usize, width: usize) -> GrayImage {
        let pixels = (0..height * width).map(|_| rng.gen::<u8>()).collect();
        GrayImage::new(height, width, pixels).unwrap()
    }

    #[test]
    fn rule_names_round_trip() {
        for rule in Rule::ALL {
            assert_eq!(rule.name().parse::<Rule>().unwrap(), rule);
        }
        assert!(matches!(
            "sauvlo".parse::<Rule>(),
            Err(RuleError::UnknownRule(_))
        ));
    }

    #[test]
    fn global_stats_constant_image() {
        let img = GrayImage::filled(4, 4, 100).unwrap();
        let g = compute_global_stats(&img);
        assert_eq!(g.min, 100);
        assert_eq!(g.mean, 100.0);
        assert_eq!(g.stddev, 0.0);
    }

    #[test]
    fn global_stats_two_point_distribution() {
        let img = GrayImage::new(1, 2, vec![0, 255]).unwrap();
        let g = compute_global_stats(&img);
        assert_eq!(g.min, 0);
        assert_eq!(g.mean, 127.5);
        assert_eq!(g.stddev, 127.5);
    }

    #[test]
    fn global_stats_match_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let img = random_image(&mut rng, 32, 32);
        let g = compute_global_stats(&img);

        let levels: Vec<f64> = img.pixels().iter().map(|&p| p as f64).collect();
        let mean = levels.iter().sum::<f64>() / levels.len() as f64;
        let var = levels.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / levels.len() as f64;
        assert!((g.mean - mean).abs() < 1e-9);
        assert!((g.stddev - var.sqrt()).abs() < 1e-9);
        assert_eq!(g.min, *img.pixels().iter().min().unwrap());
    }

    #[test]
    fn niblack_linear_example() {
        let stats = moment_stats(9, 100.0, 20.0);
        let params = RuleParams {
            k: -0.2,
            ..RuleParams::default()
        };
        let t = threshold_value(Rule::Niblack, &stats, None, &params).unwrap();
        assert_eq!(t, 96.0);
    }

    #[test]
    fn wolf_hand_example() {
        // m=100, s=64, L=0, k=0.5, R=128: t = 100 - 0.5*100*(1 - 0.5) = 75.
        let stats = moment_stats(9, 100.0, 64.0);
        let global = GlobalStats {
            min: 0,
            mean: 120.0,
            stddev: 30.0,
        };
        let t = threshold_value(Rule::Wolf, &stats, Some(&global), &RuleParams::default()).unwrap();
        assert_eq!(t, 75.0);
    }

    #[test]
    fn feng_hand_example() {
        // alpha1=0.12, k1=0.25, k2=0.04, gamma=2, m=100, s=64, L=10, R=128:
        // ratio = 0.5; t = 12 + 0.25*0.125*90 + 0.04*0.25*10 = 14.9125.
        let stats = moment_stats(9, 100.0, 64.0);
        let global = GlobalStats {
            min: 10,
            mean: 120.0,
            stddev: 30.0,
        };
        let t = threshold_value(Rule::Feng, &stats, Some(&global), &RuleParams::default()).unwrap();
        assert!((t - 14.9125).abs() < 1e-12);
    }

    #[test]
    fn rais_correction_vanishes_when_products_match() {
        let stats = moment_stats(9, 100.0, 2.0);
        let global = GlobalStats {
            min: 0,
            mean: 100.0,
            stddev: 2.0,
        };
        let t = threshold_value(Rule::Rais, &stats, Some(&global), &RuleParams::default()).unwrap();
        assert_eq!(t, 100.0);

        // Degenerate 0/0 case: constant image means both products are zero.
        let stats = moment_stats(9, 100.0, 0.0);
        let global = GlobalStats {
            min: 100,
            mean: 100.0,
            stddev: 0.0,
        };
        let t = threshold_value(Rule::Rais, &stats, Some(&global), &RuleParams::default()).unwrap();
        assert_eq!(t, 100.0);
    }

    #[test]
    fn khurshid_flag_switches_count() {
        // Border window: n = 4 in-bounds pixels of a 3x3 window.
        let mut stats = moment_stats(4, 50.0, 10.0);
        stats.window_area = 9;
        let hw = threshold_value(Rule::Khurshid, &stats, None, &RuleParams::default()).unwrap();
        let clamped = threshold_value(
            Rule::Khurshid,
            &stats,
            None,
            &RuleParams {
                hw_effective: false,
                ..RuleParams::default()
            },
        )
        .unwrap();
        let expect = |nf: f64| 50.0 + 0.5 * (100.0f64 + 2500.0 * (nf - 1.0) / nf).sqrt();
        assert!((hw - expect(9.0)).abs() < 1e-12);
        assert!((clamped - expect(4.0)).abs() < 1e-12);
        assert!(hw != clamped);
    }

    #[test]
    fn phansalkar_reduces_to_sauvola_when_p_is_zero() {
        let stats = moment_stats(25, 80.0, 12.0);
        let params = RuleParams {
            p: 0.0,
            ..RuleParams::default()
        };
        let ph = threshold_value(Rule::Phansalkar, &stats, None, &params).unwrap();
        let sv = threshold_value(Rule::Sauvola, &stats, None, &params).unwrap();
        assert!((ph - sv).abs() < 1e-12);
    }

    #[test]
    fn phansalkar_dark_mean_example() {
        // m=0.2, v=0.16 (pixels {0,0,0,0,1}), p=2, q=10, k=0.5, R=128.
        let stats = LocalStats::from_moments(5, 5, 1, 1);
        assert!((stats.mean - 0.2).abs() < 1e-15);
        assert!((stats.variance - 0.16).abs() < 1e-15);
        let t =
            threshold_value(Rule::Phansalkar, &stats, None, &RuleParams::default()).unwrap();
        let expected = 0.2 * (1.0 + 2.0 * (-2.0f64).exp() + 0.5 * (0.4 / 128.0 - 1.0));
        assert!((t - expected).abs() < 1e-12);
    }

    #[test]
    fn bernsen_contrast_cutoff() {
        let low = LocalStats::from_extrema(9, 9, 100, 110);
        let params = RuleParams::default(); // contrast = 15
        let t = threshold_value(Rule::BernsenContrast, &low, None, &params).unwrap();
        assert_eq!(t, f64::NEG_INFINITY);

        let high = LocalStats::from_extrema(9, 9, 100, 120);
        let t = threshold_value(Rule::BernsenContrast, &high, None, &params).unwrap();
        assert_eq!(t, 110.0);

        // Plain bernsen has no cutoff.
        let t = threshold_value(Rule::Bernsen, &low, None, &params).unwrap();
        assert_eq!(t, 105.0);
    }

    #[test]
    fn missing_stats_are_reported() {
        let moments = LocalStats::from_moments(9, 9, 900, 90000);
        assert!(matches!(
            threshold_value(Rule::Bernsen, &moments, None, &RuleParams::default()),
            Err(RuleError::MissingStat { .. })
        ));
        let extrema = LocalStats::from_extrema(9, 9, 0, 255);
        assert!(matches!(
            threshold_value(Rule::Niblack, &extrema, None, &RuleParams::default()),
            Err(RuleError::MissingStat { .. })
        ));
        assert!(matches!(
            threshold_value(Rule::Wolf, &moments, None, &RuleParams::default()),
            Err(RuleError::MissingStat { .. })
        ));
        assert!(matches!(
            threshold_value(Rule::Median, &extrema, None, &RuleParams::default()),
            Err(RuleError::MissingStat { .. })
        ));
        assert!(matches!(
            threshold_value(Rule::Otsu, &moments, None, &RuleParams::default()),
            Err(RuleError::GlobalRule(Rule::Otsu))
        ));
    }

    #[test]
    fn sauvola_decide_zero_and_constant_cases() {
        let params = RuleParams::default();
        assert_eq!(sauvola_decide(0, 0.0, 0.0, &params), Label::Foreground);
        // Constant region at 200: t = 200*(1 + 0.5*(0 - 1)) = 100 < 200.
        assert_eq!(sauvola_decide(200, 200.0, 0.0, &params), Label::Background);
    }

    #[test]
    fn rule_eval_rejects_bad_params() {
        let spec = WindowSpec::new(3, 3).unwrap();
        let bad_k = RuleParams {
            k: -0.1,
            ..RuleParams::default()
        };
        assert!(matches!(
            RuleEval::new(Rule::Sauvola, &spec, &bad_k, None),
            Err(RuleError::NegativeSauvolaK(_))
        ));
        let bad_r = RuleParams {
            r: 0.0,
            ..RuleParams::default()
        };
        assert!(matches!(
            RuleEval::new(Rule::Sauvola, &spec, &bad_r, None),
            Err(RuleError::NonPositiveR(_))
        ));
        assert!(matches!(
            RuleEval::new(Rule::Wolf, &spec, &RuleParams::default(), None),
            Err(RuleError::MissingStat { .. })
        ));
        assert!(matches!(
            RuleEval::new(Rule::Otsu, &spec, &RuleParams::default(), None),
            Err(RuleError::GlobalRule(_))
        ));
        // Niblack's k may be negative.
        assert!(RuleEval::new(Rule::Niblack, &spec, &bad_k, None).is_ok());
    }

    #[test]
    fn otsu_constant_image_takes_smallest_threshold() {
        let img = GrayImage::filled(5, 5, 77).unwrap();
        assert_eq!(otsu_threshold(&img), 0);
    }

    #[test]
    fn otsu_bimodal_image_picks_lower_mode() {
        let mut pixels = vec![10u8; 32];
        pixels.extend(vec![200u8; 32]);
        let img = GrayImage::new(8, 8, pixels).unwrap();
        assert_eq!(otsu_threshold(&img), 10);
    }

    /// Exhaustive oracle with independent structure: recompute class sums
    /// from scratch for each candidate threshold.
    fn otsu_by_exhaustive_scan(image: &GrayImage) -> u8 {
        let mut hist = [0u64; 256];
        for &px in image.pixels() {
            hist[px as usize] += 1;
        }
        let mut best_t = 0u8;
        let mut best_var = f64::NEG_INFINITY;
        for t in 0..=255u8 {
            let mut n0 = 0u64;
            let mut n1 = 0u64;
            let mut sum0 = 0u64;
            let mut sum1 = 0u64;
            for g in 0..=255u8 {
                if g <= t {
                    n0 += hist[g as usize];
                    sum0 += g as u64 * hist[g as usize];
                } else {
                    n1 += hist[g as usize];
                    sum1 += g as u64 * hist[g as usize];
                }
            }
            let var = between_class_variance(n0, n1, sum0, sum1);
            if var > best_var {
                best_var = var;
                best_t = t;
            }
        }
        best_t
    }

    #[test]
    fn otsu_matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..40 {
            let height = rng.gen_range(1..=64);
            let width = rng.gen_range(1..=64);
            let img = random_image(&mut rng, height, width);
            assert_eq!(
                otsu_threshold(&img),
                otsu_by_exhaustive_scan(&img),
                "trial {trial}: {height}x{width}"
            );
        }
    }

    #[test]
    fn otsu_invariant_under_transposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let img = random_image(&mut rng, 17, 29);
            assert_eq!(otsu_threshold(&img), otsu_threshold(&img.transposed()));
        }
    }

    proptest! {
        #[test]
        fn sqrt_free_sauvola_matches_direct_formula(
            gray in 0u8..=255,
            mean in 0.0f64..255.0,
            variance in 0.0f64..16256.25,
            k in 0.0f64..1.5,
        ) {
            let params = RuleParams { k, ..RuleParams::default() };
            let fast = sauvola_decide(gray, mean, variance, &params);
            let t = mean * (1.0 + k * (variance.sqrt() / params.r - 1.0));
            let direct = if (gray as f64) <= t { Label::Foreground } else { Label::Background };
            prop_assert_eq!(fast, direct);
        }

        #[test]
        fn niblack_decision_monotone_in_gray(
            mean in 0.0f64..255.0,
            stddev in 0.0f64..127.5,
            k in -1.0f64..1.0,
            lo in 0u8..=255,
            hi in 0u8..=255,
        ) {
            prop_assume!(lo < hi);
            let stats = moment_stats(9, mean, stddev);
            let params = RuleParams { k, ..RuleParams::default() };
            let t = threshold_value(Rule::Niblack, &stats, None, &params).unwrap();
            let decide = |g: u8| (g as f64) <= t;
            // Raising the gray level never flips background to foreground.
            prop_assert!(!(decide(hi) && !decide(lo)));
        }

        #[test]
        fn bernsen_threshold_within_extrema(min in 0u8..=255, max in 0u8..=255) {
            prop_assume!(min <= max);
            let stats = LocalStats::from_extrema(9, 9, min, max);
            let t = threshold_value(Rule::Bernsen, &stats, None, &RuleParams::default()).unwrap();
            prop_assert!(min as f64 <= t && t <= max as f64);
        }
    }
}
