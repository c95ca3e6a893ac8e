//! Batch front-end for the uic codec: compress/decompress single images,
//! inject noise, reproduce the seven-technique comparison, and dump
//! eigen-energy reports.
//!
//! Exit codes are stable: 0 success, 2 bad arguments, 3 I/O failure,
//! 4 codec error. Diagnostics go to stderr; data goes to files and stdout.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use uic_core::coder::{deserialize, serialize};
use uic_core::imageio::{add_salt_pepper, load_pgm, save_pgm, Image, NoiseSpec};
use uic_core::metrics::{build_report, mse, psnr, MetricsRow};
use uic_core::pipeline::{
    compress, decompress, eigen_analysis, measured_cr, CodecConfig, StackVariant, Technique,
};
use uic_core::wavelet::ShrinkMode;
use uic_core::EnergyReport;

mod exit {
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const CODEC: u8 = 4;
}

struct CliError {
    code: u8,
    message: String,
}

type CliResult<T> = Result<T, CliError>;

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: exit::USAGE,
        message: message.into(),
    }
}

fn io_error(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError {
        code: exit::IO,
        message: format!("{}: {err}", path.display()),
    }
}

/// Map library failures onto the documented exit codes: configuration
/// problems are usage errors, PGM problems are I/O, the rest is the codec.
fn core_error(err: uic_core::Error) -> CliError {
    let code = match &err {
        uic_core::Error::InvalidConfig(_) => exit::USAGE,
        uic_core::Error::InvalidPgm(_) => exit::IO,
        _ => exit::CODEC,
    };
    CliError {
        code,
        message: err.to_string(),
    }
}

#[derive(Parser)]
#[command(
    name = "uic",
    version,
    about = "Lossy grayscale image codec comparing wavelet, scan, and KLT pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShrinkArg {
    Soft,
    Hard,
    None,
}

impl From<ShrinkArg> for ShrinkMode {
    fn from(v: ShrinkArg) -> Self {
        match v {
            ShrinkArg::Soft => ShrinkMode::Soft,
            ShrinkArg::Hard => ShrinkMode::Hard,
            ShrinkArg::None => ShrinkMode::None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    /// Raw spatial tiles
    SpatialTile,
    /// Uniform wavelet-packet sub-blocks
    HaarPacket,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Exp1,
    Exp2,
    Exp3,
    Exp4,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a binary PGM into a .uic container
    Compress(CompressArgs),
    /// Decompress a .uic container back into a PGM
    Decompress {
        #[arg(long = "in", value_name = "UIC")]
        input: PathBuf,
        #[arg(long, value_name = "PGM")]
        out: PathBuf,
    },
    /// MSE/PSNR between two PGM images
    Metrics {
        /// Reference image
        original: PathBuf,
        /// Image under test
        reconstruction: PathBuf,
        /// Optional CSV destination (`mse,psnr` header)
        #[arg(long, value_name = "CSV")]
        report: Option<PathBuf>,
    },
    /// Apply reproducible salt-and-pepper noise to a PGM
    Noise {
        #[arg(long = "in", value_name = "PGM")]
        input: PathBuf,
        #[arg(long, value_name = "PGM")]
        out: PathBuf,
        /// Noise spec, e.g. sp:0.02
        #[arg(long)]
        noise: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run all seven techniques on one image and write a comparison report
    Experiment(ExperimentArgs),
    /// Eigenvalue spectrum of the cross-block covariance
    EigenReport {
        #[arg(long = "in", value_name = "PGM")]
        input: PathBuf,
        /// Sub-block size in pixels
        #[arg(long, default_value_t = 64)]
        block: usize,
        /// Which stack to analyze
        #[arg(long, value_enum, default_value_t = VariantArg::HaarPacket)]
        variant: VariantArg,
        /// Shrinkage applied to packet stacks before the fit
        #[arg(long, value_enum, default_value_t = ShrinkArg::None)]
        shrink: ShrinkArg,
        /// CSV destination (channel, eigenvalue, cumulative fraction)
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long = "in", value_name = "PGM")]
    input: PathBuf,
    #[arg(long, value_name = "UIC")]
    out: PathBuf,
    /// One of: haar, haar+morton, haar+row-rafter, morton+klt,
    /// row-rafter+klt, haar+morton+klt, haar+row-rafter+klt
    #[arg(long)]
    technique: String,
    /// Sub-block size in pixels
    #[arg(long, default_value_t = 64)]
    block: usize,
    /// Target compression ratio (>= 1)
    #[arg(long, default_value_t = 4.0)]
    cr: f64,
    /// Pyramid levels for the plain haar technique
    #[arg(long, default_value_t = 1)]
    levels: usize,
    #[arg(long, value_enum, default_value_t = ShrinkArg::Soft)]
    shrink: ShrinkArg,
    /// Coefficient bit budget
    #[arg(long, default_value_t = 8)]
    bits: u8,
    /// Optional pre-compression noise, e.g. sp:0.02
    #[arg(long)]
    noise: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long = "in", value_name = "PGM")]
    input: PathBuf,
    /// Output directory for reconstructions, containers, and CSVs
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Report CSV path (default: `<out>/report.csv`)
    #[arg(long, value_name = "CSV")]
    report: Option<PathBuf>,
    /// Parameter preset for the four standard comparison setups
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Target compression ratio
    #[arg(long)]
    cr: Option<f64>,
    /// Sub-block size for the KLT techniques (4-7)
    #[arg(long)]
    block: Option<usize>,
    /// Sub-block size for the wavelet-plus-scan techniques (2-3)
    #[arg(long = "haar-block")]
    haar_block: Option<usize>,
    /// Pyramid levels for the plain haar technique
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, value_enum)]
    shrink: Option<ShrinkArg>,
    #[arg(long)]
    bits: Option<u8>,
    /// Noise applied identically to every technique's input, e.g. sp:0.02
    #[arg(long)]
    noise: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { exit::USAGE } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Compress(args) => run_compress(args),
        Command::Decompress { input, out } => run_decompress(&input, &out),
        Command::Metrics {
            original,
            reconstruction,
            report,
        } => run_metrics(&original, &reconstruction, report.as_deref()),
        Command::Noise {
            input,
            out,
            noise,
            seed,
        } => run_noise(&input, &out, &noise, seed),
        Command::Experiment(args) => run_experiment(args),
        Command::EigenReport {
            input,
            block,
            variant,
            shrink,
            out,
        } => run_eigen_report(&input, block, variant, shrink.into(), &out),
    }
}

fn read_image(path: &Path) -> CliResult<Image> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    load_pgm(&bytes).map_err(core_error)
}

/// Write via a temp file in the same directory, then rename into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| usage(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, bytes).map_err(|e| io_error(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

/// `sp:<density>` with density in [0, 1].
fn parse_noise(spec: &str, seed: u64) -> CliResult<NoiseSpec> {
    let density = spec
        .strip_prefix("sp:")
        .ok_or_else(|| usage(format!("noise spec `{spec}` must look like sp:0.02")))?
        .parse::<f64>()
        .map_err(|_| usage(format!("unreadable noise density in `{spec}`")))?;
    NoiseSpec::salt_pepper(density, seed).map_err(core_error)
}

fn parse_technique(label: &str) -> CliResult<Technique> {
    Technique::from_label(label).ok_or_else(|| {
        let all = Technique::ALL.map(|t| t.label()).join(", ");
        usage(format!(
            "unknown technique `{label}`; expected one of: {all}"
        ))
    })
}

fn run_compress(args: CompressArgs) -> CliResult<()> {
    let technique = parse_technique(&args.technique)?;
    if args.cr < 1.0 {
        return Err(usage(format!("--cr {} must be >= 1", args.cr)));
    }
    let noise = args
        .noise
        .as_deref()
        .map(|s| parse_noise(s, args.seed))
        .transpose()?;
    let img = read_image(&args.input)?;
    let cfg = CodecConfig {
        technique,
        block: args.block,
        target_cr: args.cr,
        shrink: args.shrink.into(),
        levels: args.levels,
        bits: args.bits,
        noise,
    };
    let start = Instant::now();
    let artifact = compress(&img, &cfg).map_err(core_error)?;
    let elapsed = start.elapsed();
    write_atomic(&args.out, &serialize(&artifact))?;
    println!("cr: {:.4}", measured_cr(&artifact, &img));
    println!("time: {:.3} s", elapsed.as_secs_f64());
    Ok(())
}

fn run_decompress(input: &Path, out: &Path) -> CliResult<()> {
    let bytes = std::fs::read(input).map_err(|e| io_error(input, e))?;
    let artifact = deserialize(&bytes).map_err(core_error)?;
    let img = decompress(&artifact).map_err(core_error)?;
    write_atomic(out, &save_pgm(&img))
}

fn run_metrics(original: &Path, reconstruction: &Path, report: Option<&Path>) -> CliResult<()> {
    let a = read_image(original)?;
    let b = read_image(reconstruction)?;
    let m = mse(&a, &b).map_err(core_error)?;
    let p = psnr(m).map_err(core_error)?;
    println!("mse: {m:.4}");
    println!("psnr: {p:.4}");
    if let Some(path) = report {
        write_atomic(path, format!("mse,psnr\n{m:.4},{p:.4}\n").as_bytes())?;
    }
    Ok(())
}

fn run_noise(input: &Path, out: &Path, noise: &str, seed: u64) -> CliResult<()> {
    let spec = parse_noise(noise, seed)?;
    let img = read_image(input)?;
    write_atomic(out, &save_pgm(&add_salt_pepper(&img, &spec)))
}

fn eigen_csv(report: &EnergyReport) -> String {
    let mut csv = String::from("channel,eigenvalue,cumulative_fraction\n");
    for (i, value) in report.eigenvalues.iter().enumerate() {
        let fraction = if report.zero_trace {
            "nan".to_string()
        } else {
            format!("{:.8}", report.cumulative_fraction[i])
        };
        csv.push_str(&format!("{i},{value:.10e},{fraction}\n"));
    }
    csv
}

fn run_eigen_report(
    input: &Path,
    block: usize,
    variant: VariantArg,
    shrink: ShrinkMode,
    out: &Path,
) -> CliResult<()> {
    let img = read_image(input)?;
    let variant = match variant {
        VariantArg::SpatialTile => StackVariant::SpatialTile,
        VariantArg::HaarPacket => StackVariant::HaarPacket,
    };
    let report = eigen_analysis(&img, variant, block, shrink).map_err(core_error)?;
    write_atomic(out, eigen_csv(&report).as_bytes())?;
    if report.zero_trace {
        println!("zero-trace: energy fractions undefined");
    } else {
        println!(
            "channels_for(0.95): {}",
            report.channels_for(0.95).expect("trace is nonzero")
        );
    }
    Ok(())
}

struct ExperimentParams {
    cr: f64,
    block: usize,
    haar_block: usize,
    levels: usize,
    shrink: ShrinkMode,
    bits: u8,
    noise: Option<NoiseSpec>,
}

fn resolve_params(args: &ExperimentArgs, image_width: usize) -> CliResult<ExperimentParams> {
    // any explicit flag wins over the preset
    let (p_cr, p_haar_block, p_levels, p_noise) = match args.preset {
        Some(Preset::Exp1) => (4.0, 256, 1, None),
        Some(Preset::Exp2) => (4.0, 256, 1, Some("sp:0.02")),
        Some(Preset::Exp3) => (16.0, 128, 2, None),
        Some(Preset::Exp4) => (16.0, 128, 2, Some("sp:0.02")),
        None => (4.0, image_width / 2, 1, None),
    };
    let cr = args.cr.unwrap_or(p_cr);
    if cr < 1.0 {
        return Err(usage(format!("--cr {cr} must be >= 1")));
    }
    let noise = match (&args.noise, p_noise) {
        (Some(s), _) => Some(parse_noise(s, args.seed)?),
        (None, Some(s)) => Some(parse_noise(s, args.seed)?),
        (None, None) => None,
    };
    Ok(ExperimentParams {
        cr,
        block: args.block.unwrap_or(64),
        haar_block: args.haar_block.unwrap_or(p_haar_block),
        levels: args.levels.unwrap_or(p_levels),
        shrink: args
            .shrink
            .map(ShrinkMode::from)
            .unwrap_or(ShrinkMode::Soft),
        bits: args.bits.unwrap_or(8),
        noise,
    })
}

fn run_experiment(args: ExperimentArgs) -> CliResult<()> {
    let original = read_image(&args.input)?;
    let params = resolve_params(&args, original.width)?;
    std::fs::create_dir_all(&args.out).map_err(|e| io_error(&args.out, e))?;

    let input = match &params.noise {
        Some(spec) => {
            let noisy = add_salt_pepper(&original, spec);
            write_atomic(&args.out.join("input_noisy.pgm"), &save_pgm(&noisy))?;
            noisy
        }
        None => original.clone(),
    };

    let mut rows = Vec::with_capacity(Technique::ALL.len());
    for technique in Technique::ALL {
        let block = match technique {
            Technique::HaarMorton | Technique::HaarRowRaster => params.haar_block,
            _ => params.block,
        };
        let cfg = CodecConfig {
            technique,
            block,
            target_cr: params.cr,
            shrink: params.shrink,
            levels: params.levels,
            bits: params.bits,
            noise: None,
        };
        let artifact = compress(&input, &cfg).map_err(core_error)?;
        let recon = decompress(&artifact).map_err(core_error)?;
        let label = technique.label();
        write_atomic(
            &args.out.join(format!("{label}.uic")),
            &serialize(&artifact),
        )?;
        write_atomic(&args.out.join(format!("{label}.pgm")), &save_pgm(&recon))?;

        let m = mse(&original, &recon).map_err(core_error)?;
        rows.push(MetricsRow {
            technique: label.to_string(),
            cr: measured_cr(&artifact, &original),
            mse: m,
            psnr: psnr(m).map_err(core_error)?,
        });

        if technique.uses_klt() {
            let variant = if technique.uses_haar() {
                StackVariant::HaarPacket
            } else {
                StackVariant::SpatialTile
            };
            let report =
                eigen_analysis(&input, variant, block, params.shrink).map_err(core_error)?;
            write_atomic(
                &args.out.join(format!("{label}_eigen.csv")),
                eigen_csv(&report).as_bytes(),
            )?;
        }
    }

    let report = build_report(&rows);
    print!("{}", report.table);
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.out.join("report.csv"));
    write_atomic(&report_path, report.csv.as_bytes())
}
