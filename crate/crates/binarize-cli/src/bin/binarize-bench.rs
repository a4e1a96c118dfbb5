//! Time binarization engines on seeded random images (or a supplied PGM)
//! and emit one CSV row per engine x rule x window combination.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use binarize_cli::{
    parse_size, parse_window, records_to_csv, run_bench, run_bench_on, BenchConfig, CliError,
};
use binarize_core::engines::Engine;
use binarize_core::netpbm::read_pgm;
use binarize_core::rules::{Rule, RuleParams};

#[derive(Parser, Debug)]
#[command(
    name = "binarize-bench",
    version,
    about = "Benchmark binarization engines and emit CSV timings"
)]
struct Args {
    /// Image sizes to generate, as HxW, comma-separated. Size i is seeded
    /// with seed+i. Ignored when --image is given.
    #[arg(long, value_delimiter = ',', default_value = "2000x2000")]
    sizes: Vec<String>,

    /// Window sizes, as a bare side length (square) or HxW, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "15,31,63,127,255")]
    windows: Vec<String>,

    /// Engines to time, comma-separated: sliding, integral, naive, otsu.
    /// The otsu engine emits one windowless row per image.
    #[arg(long, value_delimiter = ',', default_value = "sliding,integral,otsu")]
    engines: Vec<String>,

    /// Rules to time on each windowed engine, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "sauvola")]
    rules: Vec<String>,

    /// Timing repeats per combination; the median is reported.
    #[arg(long, default_value_t = 3)]
    repeats: usize,

    /// Seed for the generated images.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Benchmark this PGM image instead of generated ones.
    #[arg(long)]
    image: Option<PathBuf>,

    /// Deviation weight k for rules that use one.
    #[arg(short = 'k', long, default_value_t = 0.5, allow_negative_numbers = true)]
    k: f64,

    /// Dynamic range R of the standard deviation.
    #[arg(short = 'R', long = "dynamic-range", default_value_t = 128.0)]
    r: f64,
}

fn run(args: &Args) -> Result<(), CliError> {
    let sizes = args
        .sizes
        .iter()
        .map(|s| parse_size(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Usage)?;
    let windows = args
        .windows
        .iter()
        .map(|s| parse_window(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Usage)?;
    let engines = args
        .engines
        .iter()
        .map(|s| s.parse::<Engine>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rules = args
        .rules
        .iter()
        .map(|s| s.parse::<Rule>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let params = RuleParams {
        k: args.k,
        r: args.r,
        ..RuleParams::default()
    };
    let config = BenchConfig {
        sizes,
        windows,
        engines,
        rules,
        repeats: args.repeats,
        seed: args.seed,
        params,
    };
    let records = match &args.image {
        Some(path) => {
            let bytes = fs::read(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            let image = read_pgm(&bytes)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            run_bench_on(&[image], &config)?
        }
        None => run_bench(&config)?,
    };
    let csv = records_to_csv(&records);
    match &args.out {
        Some(path) => fs::write(path, csv)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    Ok(())
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
            eprintln!("binarize-bench: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
