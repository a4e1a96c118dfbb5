//! Shared plumbing for the `binarize` and `binarize-bench` binaries: request
//! execution with the documented exit codes, and the benchmark harness that
//! times engines on seeded random images and emits CSV.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use binarize_core::engines::{
    binarize_integral, binarize_naive, binarize_otsu, binarize_sliding, Engine, EngineError,
    EngineOutput,
};
use binarize_core::image::GrayImage;
use binarize_core::netpbm::{read_pgm, write_pbm};
use binarize_core::rules::{Rule, RuleParams};
use binarize_core::stats::{Axis, SlidingConfig, StatsError};
use binarize_core::window::WindowSpec;

/// Failure categories, each with its own process exit code: usage errors
/// exit 1, I/O errors 2, unsupported engine/rule/window combinations 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Unsupported(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Unsupported(_) => 3,
        }
    }
}

fn engine_error(err: EngineError) -> CliError {
    match &err {
        EngineError::UnsupportedRule { .. } => CliError::Unsupported(err.to_string()),
        EngineError::UnknownEngine(_) | EngineError::Rule(_) => CliError::Usage(err.to_string()),
        EngineError::Stats(StatsError::QuantileOutOfRange(_)) => CliError::Usage(err.to_string()),
        EngineError::Stats(_) => CliError::Unsupported(err.to_string()),
    }
}

/// One `binarize` invocation, fully resolved.
#[derive(Debug, Clone)]
pub struct BinarizeRequest {
    pub input: PathBuf,
    pub output: PathBuf,
    pub engine: Engine,
    pub rule: Rule,
    pub params: RuleParams,
    /// Window height and width.
    pub window: (usize, usize),
    pub axis: Option<Axis>,
    pub max_window_side: usize,
}

/// Read the input PGM, binarize it, write the output PBM.
pub fn run_binarize(req: &BinarizeRequest) -> Result<(), CliError> {
    let bytes = fs::read(&req.input)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", req.input.display())))?;
    let image = read_pgm(&bytes)
        .map_err(|e| CliError::Io(format!("{}: {e}", req.input.display())))?;
    let out = binarize_image(
        req.engine,
        req.rule,
        &req.params,
        req.window,
        req.axis,
        req.max_window_side,
        &image,
    )?;
    fs::write(&req.output, write_pbm(&out.image))
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", req.output.display())))?;
    Ok(())
}

/// Route one image through the selected engine. The `otsu` rule is global:
/// it ignores the window and engine selection entirely.
pub fn binarize_image(
    engine: Engine,
    rule: Rule,
    params: &RuleParams,
    window: (usize, usize),
    axis: Option<Axis>,
    max_window_side: usize,
    image: &GrayImage,
) -> Result<EngineOutput, CliError> {
    if rule == Rule::Otsu {
        return Ok(binarize_otsu(image));
    }
    if engine == Engine::Otsu {
        return Err(CliError::Unsupported(format!(
            "engine `otsu` is global thresholding and only runs rule `otsu`, not `{rule}`"
        )));
    }
    let spec = WindowSpec::new(window.0, window.1)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    match engine {
        Engine::Naive => binarize_naive(image, &spec, rule, params),
        Engine::Integral => binarize_integral(image, &spec, rule, params),
        Engine::Sliding => {
            let config = SlidingConfig {
                max_window_side,
                axis,
                audit: false,
            };
            binarize_sliding(image, &spec, rule, params, &config)
        }
        Engine::Otsu => unreachable!("handled above"),
    }
    .map_err(engine_error)
}

/// Uniform-random image from a fixed seed; the benchmark's input generator.
pub fn seeded_image(seed: u64, height: usize, width: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = (0..height * width).map(|_| rng.gen::<u8>()).collect();
    GrayImage::new(height, width, pixels).expect("bench sizes are validated nonzero")
}

/// One benchmark invocation.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Image sizes as (H, W); image i uses seed `seed + i`.
    pub sizes: Vec<(usize, usize)>,
    /// Window sizes as (h, w). Ignored by the `otsu` engine.
    pub windows: Vec<(usize, usize)>,
    pub engines: Vec<Engine>,
    /// Local rules to time on each windowed engine. The global `otsu` rule
    /// is timed by listing the `otsu` engine instead.
    pub rules: Vec<Rule>,
    /// Timing repeats per combination; the median is reported. At least 3.
    pub repeats: usize,
    pub seed: u64,
    pub params: RuleParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![(2000, 2000)],
            windows: vec![(15, 15), (31, 31), (63, 63), (127, 127), (255, 255)],
            engines: vec![Engine::Sliding, Engine::Integral, Engine::Otsu],
            rules: vec![Rule::Sauvola],
            repeats: 3,
            seed: 42,
            params: RuleParams::default(),
        }
    }
}

/// Exact header of the emitted CSV.
pub const CSV_HEADER: &str = "engine,rule,H,W,h,w,wall_time_s,peak_aux_slots";

/// One timed engine x rule x window combination.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub engine: Engine,
    pub rule: Rule,
    pub height: usize,
    pub width: usize,
    /// Window dims; 0,0 on `otsu` rows, which have no window.
    pub window_h: usize,
    pub window_w: usize,
    /// Median wall time over the repeats, floored at 1 microsecond.
    pub wall_time_s: f64,
    pub peak_aux_slots: usize,
}

impl BenchRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6},{}",
            self.engine,
            self.rule,
            self.height,
            self.width,
            self.window_h,
            self.window_w,
            self.wall_time_s,
            self.peak_aux_slots
        )
    }
}

pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::with_capacity((records.len() + 1) * 48);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for record in records {
        out.push_str(&record.to_csv_row());
        out.push('\n');
    }
    out
}

/// Generate the seeded images and time every configured combination.
/// Row order: sizes, then engines, then windows, then rules; the `otsu`
/// engine emits a single row per size.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>, CliError> {
    validate_bench(config)?;
    let images: Vec<GrayImage> = config
        .sizes
        .iter()
        .enumerate()
        .map(|(i, &(h, w))| seeded_image(config.seed.wrapping_add(i as u64), h, w))
        .collect();
    run_bench_on(&images, config)
}

/// Same as [`run_bench`] but over caller-supplied images (the `--image`
/// path of the bench binary); `config.sizes` and `config.seed` are unused.
pub fn run_bench_on(
    images: &[GrayImage],
    config: &BenchConfig,
) -> Result<Vec<BenchRecord>, CliError> {
    validate_bench(config)?;
    let mut records = Vec::new();
    for image in images {
        for &engine in &config.engines {
            if engine == Engine::Otsu {
                records.push(time_combination(engine, Rule::Otsu, (0, 0), image, config)?);
                continue;
            }
            for &window in &config.windows {
                for &rule in &config.rules {
                    records.push(time_combination(engine, rule, window, image, config)?);
                }
            }
        }
    }
    Ok(records)
}

fn validate_bench(config: &BenchConfig) -> Result<(), CliError> {
    if config.repeats < 3 {
        return Err(CliError::Usage(format!(
            "--repeats must be at least 3, got {}",
            config.repeats
        )));
    }
    if config.sizes.iter().any(|&(h, w)| h == 0 || w == 0) {
        return Err(CliError::Usage("image sizes must be nonzero".into()));
    }
    if config.rules.contains(&Rule::Otsu) {
        return Err(CliError::Usage(
            "the global `otsu` rule is benchmarked by listing the `otsu` engine".into(),
        ));
    }
    let needs_windows = config.engines.iter().any(|&e| e != Engine::Otsu);
    if needs_windows && (config.windows.is_empty() || config.rules.is_empty()) {
        return Err(CliError::Usage(
            "windowed engines need at least one window size and one rule".into(),
        ));
    }
    Ok(())
}

fn time_combination(
    engine: Engine,
    rule: Rule,
    window: (usize, usize),
    image: &GrayImage,
    config: &BenchConfig,
) -> Result<BenchRecord, CliError> {
    let mut times = Vec::with_capacity(config.repeats);
    let mut peak_aux_slots = 0;
    for _ in 0..config.repeats {
        let start = Instant::now();
        let out = binarize_image(engine, rule, &config.params, window, None, 257, image)?;
        times.push(start.elapsed().as_secs_f64());
        peak_aux_slots = out.aux_slots;
    }
    times.sort_unstable_by(f64::total_cmp);
    let wall_time_s = times[times.len() / 2].max(1e-6);
    Ok(BenchRecord {
        engine,
        rule,
        height: image.height(),
        width: image.width(),
        window_h: window.0,
        window_w: window.1,
        wall_time_s,
        peak_aux_slots,
    })
}

/// Parse `HxW` into a pair.
pub fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (h, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected HxW, got `{s}`"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height in `{s}`"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width in `{s}`"))?;
    if h == 0 || w == 0 {
        return Err(format!("dimensions must be nonzero in `{s}`"));
    }
    Ok((h, w))
}

/// Parse a window size: `HxW`, or a single number as square shorthand.
pub fn parse_window(s: &str) -> Result<(usize, usize), String> {
    if s.contains(['x', 'X']) {
        return parse_size(s);
    }
    let side: usize = s
        .trim()
        .parse()
        .map_err(|_| format!("expected a window size like `31` or `2x5`, got `{s}`"))?;
    if side == 0 {
        return Err("window sides must be nonzero".into());
    }
    Ok((side, side))
}

/// Parse an axis override: `row`, `column`, or `auto`.
pub fn parse_axis(s: &str) -> Result<Option<Axis>, String> {
    match s {
        "row" => Ok(Some(Axis::RowMajor)),
        "column" | "col" => Ok(Some(Axis::ColumnMajor)),
        "auto" => Ok(None),
        other => Err(format!("expected row, column, or auto, got `{other}`")),
    }
}
