//! Binarize a PGM image to PBM with a selectable thresholding rule and
//! engine. `-h` selects the window height, so help lives on `--help` only.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgAction, Parser};

use binarize_cli::{parse_axis, run_binarize, BinarizeRequest, CliError};
use binarize_core::engines::Engine;
use binarize_core::rules::{Rule, RuleParams};

#[derive(Parser, Debug)]
#[command(
    name = "binarize",
    version,
    disable_help_flag = true,
    about = "Binarize a grayscale PGM image into a black-and-white PBM"
)]
struct Args {
    /// Input image, PGM (P5 or P2), max gray level 255.
    input: PathBuf,

    /// Output image, PBM (P4); foreground pixels are black.
    output: PathBuf,

    /// Thresholding rule: niblack, sauvola, wolf, feng, rais, khurshid,
    /// phansalkar, bernsen, bernsen-contrast, median, or otsu (global).
    #[arg(long, default_value = "sauvola")]
    rule: String,

    /// Engine: sliding, integral, naive, or otsu. Ignored when the rule is
    /// `otsu`, which is always global.
    #[arg(long, default_value = "sliding")]
    engine: String,

    /// Window height in pixels.
    #[arg(short = 'h', long = "window-height", default_value_t = 32)]
    window_height: usize,

    /// Window width in pixels.
    #[arg(short = 'w', long = "window-width", default_value_t = 32)]
    window_width: usize,

    /// Deviation weight k. Niblack usually wants a negative value.
    #[arg(short = 'k', long, default_value_t = 0.5, allow_negative_numbers = true)]
    k: f64,

    /// Dynamic range R of the standard deviation.
    #[arg(short = 'R', long = "dynamic-range", default_value_t = 128.0)]
    r: f64,

    /// Sweep axis for the sliding engine: row, column, or auto.
    #[arg(long, default_value = "auto")]
    axis: String,

    /// Largest window side the sliding engine accepts; sides up to 257 use
    /// the narrow 16/32-bit accumulators.
    #[arg(long, default_value_t = 257)]
    max_window_side: usize,

    /// Phansalkar exponential amplitude p.
    #[arg(long, default_value_t = 2.0)]
    p: f64,

    /// Phansalkar exponential decay q.
    #[arg(long, default_value_t = 10.0)]
    q: f64,

    /// Feng mean coefficient alpha1.
    #[arg(long, default_value_t = 0.12)]
    alpha1: f64,

    /// Feng coefficient k1.
    #[arg(long, default_value_t = 0.25)]
    k1: f64,

    /// Feng coefficient k2.
    #[arg(long, default_value_t = 0.04)]
    k2: f64,

    /// Feng exponent gamma.
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,

    /// Low-contrast cutoff for bernsen-contrast, in gray levels.
    #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
    contrast: f64,

    /// Use the border-clamped in-window pixel count for khurshid's
    /// correction instead of the full window area.
    #[arg(long, action = ArgAction::SetTrue)]
    khurshid_effective_n: bool,

    /// Derive R for wolf/feng from the image-wide maximum window standard
    /// deviation instead of the fixed -R value.
    #[arg(long, action = ArgAction::SetTrue)]
    adaptive_r: bool,

    /// Print help.
    #[arg(long, action = ArgAction::Help)]
    help: Option<bool>,
}

fn run(args: &Args) -> Result<(), CliError> {
    let rule: Rule = args
        .rule
        .parse()
        .map_err(|e: binarize_core::rules::RuleError| CliError::Usage(e.to_string()))?;
    let engine: Engine = args
        .engine
        .parse()
        .map_err(|e: binarize_core::engines::EngineError| CliError::Usage(e.to_string()))?;
    let axis = parse_axis(&args.axis).map_err(CliError::Usage)?;
    let params = RuleParams {
        k: args.k,
        r: args.r,
        p: args.p,
        q: args.q,
        alpha1: args.alpha1,
        k1: args.k1,
        k2: args.k2,
        gamma: args.gamma,
        contrast: args.contrast,
        hw_effective: !args.khurshid_effective_n,
        adaptive_r: args.adaptive_r,
    };
    let request = BinarizeRequest {
        input: args.input.clone(),
        output: args.output.clone(),
        engine,
        rule,
        params,
        window: (args.window_height, args.window_width),
        axis,
        max_window_side: args.max_window_side,
    };
    run_binarize(&request)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("binarize: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
