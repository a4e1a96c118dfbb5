//! Single-pass sliding-window statistics.
//!
//! The mean/variance sweep keeps one running sum and one running
//! sum-of-squares per column of the sweep axis, covering the current band of
//! `h` rows; a scalar pair then rolls the window sum along each row. Extrema
//! use per-column monotone deques combined by a per-row deque, and quantiles
//! use per-column 256-bin histograms merged into a window histogram. All
//! accumulation is integer-exact; floating point enters only in the final
//! mean/variance expression shared by every engine (see
//! [`moments_from_sums`]).
//!
//! The sweep walks the shorter image side so the per-column state needs
//! `min{H, W}` slots: row-major when `W <= H`, column-major otherwise,
//! realized by running the same core over a transposed view.

use thiserror::Error;

use crate::image::GrayImage;
use crate::window::WindowSpec;

/// Hard ceiling for [`SlidingConfig::max_window_side`]; beyond this the
/// window sums would outgrow the scalar accumulators.
pub const MAX_SUPPORTED_WINDOW_SIDE: usize = 65535;

/// Largest window side for which the narrow (16-bit sum / 32-bit
/// sum-of-squares) column accumulators cannot overflow: 255·257 = 65535.
const NARROW_SIDE_LIMIT: usize = 257;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("window side {side} exceeds the configured maximum {max}")]
    WindowTooLarge { side: usize, max: usize },
    #[error("max_window_side {0} exceeds the supported limit {MAX_SUPPORTED_WINDOW_SIDE}")]
    MaxSideTooLarge(usize),
    #[error("max_window_side must be at least 1")]
    ZeroMaxSide,
    #[error("quantile fraction must lie in (0, 1], got {0}")]
    QuantileOutOfRange(f64),
}

/// Direction of the sweep: which image dimension the per-column
/// accumulators span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Accumulators indexed by image column; rows processed top to bottom.
    RowMajor,
    /// Accumulators indexed by image row; columns processed left to right.
    ColumnMajor,
}

/// Axis giving the accumulators `min{H, W}` slots: row-major when `W <= H`
/// (ties go row-major, matching the storage order), column-major otherwise.
/// An explicit override wins.
pub fn choose_sweep_axis(height: usize, width: usize, override_axis: Option<Axis>) -> Axis {
    if let Some(axis) = override_axis {
        return axis;
    }
    if width <= height {
        Axis::RowMajor
    } else {
        Axis::ColumnMajor
    }
}

/// Options shared by the sliding sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlidingConfig {
    /// Largest window side the accumulators are sized for. Windows with a
    /// larger side are rejected at sweep start rather than silently widened.
    /// At the default 257 the column sums fit 16-bit and the column
    /// sums-of-squares 32-bit storage; beyond it 64-bit slots are used.
    pub max_window_side: usize,
    /// Sweep axis; `None` selects by image shape.
    pub axis: Option<Axis>,
    /// Track peak accumulator values (costs a few comparisons per pixel).
    pub audit: bool,
}

impl Default for SlidingConfig {
    fn default() -> Self {
        Self {
            max_window_side: NARROW_SIDE_LIMIT,
            axis: None,
            audit: false,
        }
    }
}

impl SlidingConfig {
    fn validate(&self, spec: &WindowSpec) -> Result<(), StatsError> {
        if self.max_window_side == 0 {
            return Err(StatsError::ZeroMaxSide);
        }
        if self.max_window_side > MAX_SUPPORTED_WINDOW_SIDE {
            return Err(StatsError::MaxSideTooLarge(self.max_window_side));
        }
        let side = spec.height().max(spec.width());
        if side > self.max_window_side {
            return Err(StatsError::WindowTooLarge {
                side,
                max: self.max_window_side,
            });
        }
        Ok(())
    }
}

/// Peak accumulator values observed during an audited sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccumPeaks {
    /// Largest per-column band sum of gray levels.
    pub column_sum: i64,
    /// Largest per-column band sum of squared gray levels.
    pub column_sq_sum: i64,
    /// Largest window sum of gray levels.
    pub window_sum: i64,
    /// Largest window sum of squared gray levels.
    pub window_sq_sum: i64,
}

/// What a sweep allocated and observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepReport {
    pub axis: Axis,
    /// Auxiliary numeric slots allocated: `2·(sweep width)` for
    /// mean/variance; deque and histogram capacities for the others.
    pub aux_slots: usize,
    /// Present when the sweep ran with `audit` set (mean/variance only).
    pub peaks: Option<AccumPeaks>,
}

/// The one floating-point expression deriving mean and variance from the
/// integer window sums. Every engine funnels through it, which is what makes
/// their outputs bit-identical rather than merely close. Variance is clamped
/// at zero because the subtraction can go microscopically negative.
#[inline]
pub fn moments_from_sums(n: u32, sum: i64, sq_sum: i64) -> (f64, f64) {
    debug_assert!(n >= 1);
    let nf = n as f64;
    let mean = sum as f64 / nf;
    let variance = (sq_sum as f64 / nf - mean * mean).max(0.0);
    (mean, variance)
}

/// Storage width for a column accumulator slot.
trait Slot: Copy {
    const ZERO: Self;
    fn from_i64(v: i64) -> Self;
    fn to_i64(self) -> i64;
}

macro_rules! impl_slot {
    ($($t:ty),*) => {$(
        impl Slot for $t {
            const ZERO: Self = 0;
            #[inline]
            fn from_i64(v: i64) -> Self {
                debug_assert!(
                    (0..=<$t>::MAX as i64).contains(&v),
                    "column accumulator overflow: {v}"
                );
                v as $t
            }
            #[inline]
            fn to_i64(self) -> i64 {
                self as i64
            }
        }
    )*};
}

impl_slot!(u16, u32, i64);

/// Read-only image view that the cores sweep; transposition is a stride
/// swap, so the column-major sweep reuses the row-major code unchanged.
struct View<'a> {
    pixels: &'a [u8],
    rows: usize,
    cols: usize,
    row_stride: usize,
    col_stride: usize,
}

impl<'a> View<'a> {
    fn new(image: &'a GrayImage, axis: Axis) -> Self {
        match axis {
            Axis::RowMajor => Self {
                pixels: image.pixels(),
                rows: image.height(),
                cols: image.width(),
                row_stride: image.width(),
                col_stride: 1,
            },
            Axis::ColumnMajor => Self {
                pixels: image.pixels(),
                rows: image.width(),
                cols: image.height(),
                row_stride: 1,
                col_stride: image.width(),
            },
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> u8 {
        self.pixels[i * self.row_stride + j * self.col_stride]
    }
}

/// Window spec in view coordinates: swapped for the column-major sweep.
fn view_spec(spec: &WindowSpec, axis: Axis) -> WindowSpec {
    match axis {
        Axis::RowMajor => *spec,
        Axis::ColumnMajor => spec.transposed(),
    }
}

/// Windowed mean and variance at every pixel in one pass.
///
/// `visit` receives `(i, j, n, mean, variance)` in image coordinates, where
/// `n` is the clamped in-bounds count dividing both moments. Visit order
/// follows the sweep axis.
pub fn sweep_mean_variance<F>(
    image: &GrayImage,
    spec: &WindowSpec,
    config: &SlidingConfig,
    mut visit: F,
) -> Result<SweepReport, StatsError>
where
    F: FnMut(usize, usize, u32, f64, f64),
{
    config.validate(spec)?;
    let axis = choose_sweep_axis(image.height(), image.width(), config.axis);
    let view = View::new(image, axis);
    let vspec = view_spec(spec, axis);
    let narrow = config.max_window_side <= NARROW_SIDE_LIMIT;

    let mut on_pixel = |i: usize, j: usize, n: u32, c: i64, d: i64| {
        let (mean, variance) = moments_from_sums(n, c, d);
        match axis {
            Axis::RowMajor => visit(i, j, n, mean, variance),
            Axis::ColumnMajor => visit(j, i, n, mean, variance),
        }
    };
    let (aux_slots, peaks) = if narrow {
        mean_variance_core::<u16, u32, _>(&view, &vspec, config.audit, &mut on_pixel)
    } else {
        mean_variance_core::<i64, i64, _>(&view, &vspec, config.audit, &mut on_pixel)
    };
    Ok(SweepReport {
        axis,
        aux_slots,
        peaks,
    })
}

fn mean_variance_core<CS, DS, F>(
    view: &View<'_>,
    spec: &WindowSpec,
    audit: bool,
    on_pixel: &mut F,
) -> (usize, Option<AccumPeaks>)
where
    CS: Slot,
    DS: Slot,
    F: FnMut(usize, usize, u32, i64, i64),
{
    let rows = view.rows;
    let cols = view.cols;
    let (l, r) = (spec.left() as i64, spec.right() as i64);
    let (o, u) = (spec.over(), spec.under());

    let mut col_sum = vec![CS::ZERO; cols];
    let mut col_sq = vec![DS::ZERO; cols];
    let aux_slots = col_sum.len() + col_sq.len();
    let mut peaks = AccumPeaks::default();

    // Bands start holding rows [0, u): the first row step then pushes row u.
    for i in 0..u.min(rows) {
        for j in 0..cols {
            let g = view.get(i, j) as i64;
            col_sum[j] = CS::from_i64(col_sum[j].to_i64() + g);
            col_sq[j] = DS::from_i64(col_sq[j].to_i64() + g * g);
        }
    }

    for i in 0..rows {
        // Band moves to rows (i-o, i+u]: push the incoming row, drop the
        // outgoing one. Out-of-bounds rows contribute zero.
        let push = i + u;
        let drop = i as i64 - o as i64;
        for j in 0..cols {
            let mut c = col_sum[j].to_i64();
            let mut d = col_sq[j].to_i64();
            if push < rows {
                let g = view.get(push, j) as i64;
                c += g;
                d += g * g;
            }
            if drop >= 0 {
                let g = view.get(drop as usize, j) as i64;
                c -= g;
                d -= g * g;
            }
            col_sum[j] = CS::from_i64(c);
            col_sq[j] = DS::from_i64(d);
            if audit {
                peaks.column_sum = peaks.column_sum.max(c);
                peaks.column_sq_sum = peaks.column_sq_sum.max(d);
            }
        }

        // Roll the scalars along the row, pre-seeded with columns [0, r) so
        // the first step lands on the window (−l, r].
        let mut c: i64 = 0;
        let mut d: i64 = 0;
        for j in 0..(r as usize).min(cols) {
            c += col_sum[j].to_i64();
            d += col_sq[j].to_i64();
        }
        for j in 0..cols {
            let jj = j as i64;
            if jj + r < cols as i64 {
                c += col_sum[(jj + r) as usize].to_i64();
                d += col_sq[(jj + r) as usize].to_i64();
            }
            if jj - l >= 0 {
                c -= col_sum[(jj - l) as usize].to_i64();
                d -= col_sq[(jj - l) as usize].to_i64();
            }
            if audit {
                peaks.window_sum = peaks.window_sum.max(c);
                peaks.window_sq_sum = peaks.window_sq_sum.max(d);
            }
            let n = spec.effective_count(i, j, rows, cols);
            on_pixel(i, j, n, c, d);
        }
    }
    (aux_slots, audit.then_some(peaks))
}

/// Windowed minimum and maximum at every pixel in one pass.
///
/// `visit` receives `(i, j, min, max)` in image coordinates.
pub fn sweep_extrema<F>(
    image: &GrayImage,
    spec: &WindowSpec,
    config: &SlidingConfig,
    mut visit: F,
) -> Result<SweepReport, StatsError>
where
    F: FnMut(usize, usize, u8, u8),
{
    config.validate(spec)?;
    let axis = choose_sweep_axis(image.height(), image.width(), config.axis);
    let view = View::new(image, axis);
    let vspec = view_spec(spec, axis);

    let aux_slots = extrema_core(&view, &vspec, &mut |i, j, min, max| match axis {
        Axis::RowMajor => visit(i, j, min, max),
        Axis::ColumnMajor => visit(j, i, min, max),
    });
    Ok(SweepReport {
        axis,
        aux_slots,
        peaks: None,
    })
}

/// One monotone deque: indices increase front to back, values strictly
/// improve toward the front (`keep(front, back)` holds). The front is the
/// current extremum.
struct MonotoneDeque<T> {
    items: std::collections::VecDeque<(usize, T)>,
}

impl<T: Copy> MonotoneDeque<T> {
    fn with_capacity(cap: usize) -> Self {
        Self {
            items: std::collections::VecDeque::with_capacity(cap),
        }
    }

    #[inline]
    fn push(&mut self, index: usize, value: T, keep: impl Fn(T, T) -> bool) {
        while let Some(&(_, back)) = self.items.back() {
            if keep(back, value) {
                break;
            }
            self.items.pop_back();
        }
        self.items.push_back((index, value));
    }

    /// Drop front entries whose index is `<= bound`.
    #[inline]
    fn expire(&mut self, bound: i64) {
        while let Some(&(idx, _)) = self.items.front() {
            if idx as i64 > bound {
                break;
            }
            self.items.pop_front();
        }
    }

    #[inline]
    fn front(&self) -> Option<T> {
        self.items.front().map(|&(_, v)| v)
    }
}

fn extrema_core<F>(view: &View<'_>, spec: &WindowSpec, on_pixel: &mut F) -> usize
where
    F: FnMut(usize, usize, u8, u8),
{
    let rows = view.rows;
    let cols = view.cols;
    let (l, r) = (spec.left() as i64, spec.right() as i64);
    let (o, u) = (spec.over(), spec.under());

    let col_cap = spec.height().min(rows);
    let row_cap = spec.width().min(cols);
    let mut col_min: Vec<MonotoneDeque<u8>> = (0..cols)
        .map(|_| MonotoneDeque::with_capacity(col_cap))
        .collect();
    let mut col_max: Vec<MonotoneDeque<u8>> = (0..cols)
        .map(|_| MonotoneDeque::with_capacity(col_cap))
        .collect();
    let mut row_min = MonotoneDeque::<u8>::with_capacity(row_cap);
    let mut row_max = MonotoneDeque::<u8>::with_capacity(row_cap);
    let aux_slots = 2 * cols * col_cap + 2 * row_cap;

    let keep_min = |back: u8, new: u8| back < new;
    let keep_max = |back: u8, new: u8| back > new;

    // Seed the column deques with rows [0, u).
    for i in 0..u.min(rows) {
        for j in 0..cols {
            let g = view.get(i, j);
            col_min[j].push(i, g, keep_min);
            col_max[j].push(i, g, keep_max);
        }
    }

    for i in 0..rows {
        let push = i + u;
        let expire_row = i as i64 - o as i64;
        for j in 0..cols {
            if push < rows {
                let g = view.get(push, j);
                col_min[j].push(push, g, keep_min);
                col_max[j].push(push, g, keep_max);
            }
            col_min[j].expire(expire_row);
            col_max[j].expire(expire_row);
        }

        // Second 1-D pass merges column extrema across the row window.
        row_min.items.clear();
        row_max.items.clear();
        for j in 0..(r as usize).min(cols) {
            row_min.push(j, col_min[j].front().expect("band non-empty"), keep_min);
            row_max.push(j, col_max[j].front().expect("band non-empty"), keep_max);
        }
        for j in 0..cols {
            let jj = j as i64;
            if jj + r < cols as i64 {
                let inc = (jj + r) as usize;
                row_min.push(inc, col_min[inc].front().expect("band non-empty"), keep_min);
                row_max.push(inc, col_max[inc].front().expect("band non-empty"), keep_max);
            }
            row_min.expire(jj - l);
            row_max.expire(jj - l);
            let min = row_min.front().expect("window non-empty");
            let max = row_max.front().expect("window non-empty");
            on_pixel(i, j, min, max);
        }
    }
    aux_slots
}

/// Windowed quantile at every pixel in one pass.
///
/// At each pixel `visit` receives `(i, j, g)` in image coordinates, where
/// `g` is the smallest gray level whose cumulative in-window count reaches
/// `ceil(q·n)`; `q = 0.5` is the (lower) median.
pub fn sweep_quantile<F>(
    image: &GrayImage,
    spec: &WindowSpec,
    q: f64,
    config: &SlidingConfig,
    mut visit: F,
) -> Result<SweepReport, StatsError>
where
    F: FnMut(usize, usize, u8),
{
    if !(q > 0.0 && q <= 1.0) {
        return Err(StatsError::QuantileOutOfRange(q));
    }
    config.validate(spec)?;
    let axis = choose_sweep_axis(image.height(), image.width(), config.axis);
    let view = View::new(image, axis);
    let vspec = view_spec(spec, axis);

    let aux_slots = quantile_core(&view, &vspec, q, &mut |i, j, g| match axis {
        Axis::RowMajor => visit(i, j, g),
        Axis::ColumnMajor => visit(j, i, g),
    });
    Ok(SweepReport {
        axis,
        aux_slots,
        peaks: None,
    })
}

fn quantile_core<F>(view: &View<'_>, spec: &WindowSpec, q: f64, on_pixel: &mut F) -> usize
where
    F: FnMut(usize, usize, u8),
{
    let rows = view.rows;
    let cols = view.cols;
    let (l, r) = (spec.left() as i64, spec.right() as i64);
    let (o, u) = (spec.over(), spec.under());

    let mut col_hist = vec![[0u32; 256]; cols];
    let mut win_hist = [0u32; 256];
    let aux_slots = 256 * cols + 256;

    for i in 0..u.min(rows) {
        for j in 0..cols {
            col_hist[j][view.get(i, j) as usize] += 1;
        }
    }

    for i in 0..rows {
        let push = i + u;
        let drop = i as i64 - o as i64;
        for j in 0..cols {
            if push < rows {
                col_hist[j][view.get(push, j) as usize] += 1;
            }
            if drop >= 0 {
                col_hist[j][view.get(drop as usize, j) as usize] -= 1;
            }
        }

        win_hist.fill(0);
        for hist in col_hist.iter().take((r as usize).min(cols)) {
            add_hist(&mut win_hist, hist);
        }
        for j in 0..cols {
            let jj = j as i64;
            if jj + r < cols as i64 {
                add_hist(&mut win_hist, &col_hist[(jj + r) as usize]);
            }
            if jj - l >= 0 {
                sub_hist(&mut win_hist, &col_hist[(jj - l) as usize]);
            }
            let n = spec.effective_count(i, j, rows, cols);
            on_pixel(i, j, level_at_rank(&win_hist, rank_for(q, n)));
        }
    }
    aux_slots
}

#[inline]
fn add_hist(acc: &mut [u32; 256], col: &[u32; 256]) {
    for (a, c) in acc.iter_mut().zip(col.iter()) {
        *a += c;
    }
}

#[inline]
fn sub_hist(acc: &mut [u32; 256], col: &[u32; 256]) {
    for (a, c) in acc.iter_mut().zip(col.iter()) {
        *a -= c;
    }
}

/// Count a quantile fraction translates to: `ceil(q·n)`.
#[inline]
pub(crate) fn rank_for(q: f64, n: u32) -> u32 {
    (q * n as f64).ceil() as u32
}

/// Smallest level whose cumulative count reaches `rank` (>= 1).
#[inline]
pub(crate) fn level_at_rank(hist: &[u32; 256], rank: u32) -> u8 {
    debug_assert!(rank >= 1);
    let mut cum = 0u32;
    for (g, &count) in hist.iter().enumerate() {
        cum += count;
        if cum >= rank {
            return g as u8;
        }
    }
    debug_assert!(false, "rank {rank} exceeds window population {cum}");
    255
}
