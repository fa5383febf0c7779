use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use svmark::attacks::{AttackSpec, Rect};
use svmark::bench::{self, BenchConfig};
use svmark::imageio::{self, PixelFormat};
use svmark::keyfile;
use svmark::metrics::{MetricsReport, PsnrMode};
use svmark::{embed, extract, testimages, EmbedParams, Error, ImageMatrix, Result};

#[derive(Parser)]
#[command(name = "svmark", version, about = "Singular-vector-domain image watermarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a watermark into a host image and write the extraction key.
    Embed(EmbedArgs),
    /// Recover the watermark from a (possibly attacked) image.
    Extract(ExtractArgs),
    /// Apply one attack to an image.
    Attack {
        #[command(subcommand)]
        kind: AttackKind,
    },
    /// Compare two images: RMSE, PSNR and NCC as one CSV row.
    Metrics(MetricsArgs),
    /// Run a parameter sweep described by a TOML config and write CSV.
    Bench(BenchArgs),
    /// Write the built-in synthetic test images.
    GenImages(GenArgs),
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    host: PathBuf,
    #[arg(long)]
    mark: PathBuf,
    #[arg(long)]
    lambda: f64,
    /// Watermarked image, 8-bit (.pgm/.ppm) or lossless (.f64m).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    key: PathBuf,
    /// Additionally write the unquantized result as F64M.
    #[arg(long)]
    float_out: Option<PathBuf>,
    /// Nearest-neighbour resize the watermark to the host size.
    #[arg(long)]
    resize: bool,
    #[arg(long)]
    conventional_psnr: bool,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IoArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum AttackKind {
    /// Additive Gaussian noise; sigma is a standard deviation on [0,1] pixels.
    Noise {
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Black out a rectangle given as x,y,width,height.
    Crop {
        #[arg(long)]
        rect: String,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Simulated baseline JPEG at the given quality (1-100).
    Jpeg {
        #[arg(long)]
        quality: u8,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    conventional_psnr: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, default_value_t = 128)]
    size: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("svmark: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Embed(a) => cmd_embed(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Attack { kind } => cmd_attack(kind),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Bench(a) => cmd_bench(a),
        Command::GenImages(a) => cmd_gen(a),
    }
}

fn psnr_mode(conventional: bool) -> PsnrMode {
    if conventional {
        PsnrMode::Conventional
    } else {
        PsnrMode::ReferenceMax
    }
}

fn output_format(path: &Path, channels: usize) -> Result<PixelFormat> {
    let fmt = PixelFormat::from_path(path)
        .ok_or_else(|| Error::Config(format!("{}: use a .pgm, .ppm or .f64m extension", path.display())))?;
    let ok = match fmt {
        PixelFormat::Pgm => channels == 1,
        PixelFormat::Ppm => channels == 3,
        PixelFormat::F64m => true,
    };
    if !ok {
        return Err(Error::Config(format!("{}: cannot store {channels} channel(s) in this format", path.display())));
    }
    Ok(fmt)
}

fn save(channels: &[ImageMatrix], path: &Path) -> Result<()> {
    imageio::save(channels, output_format(path, channels.len())?, path)
}

fn cmd_embed(a: EmbedArgs) -> Result<()> {
    let params = EmbedParams::new(a.lambda)?;
    let host = imageio::load(&a.host)?.channels;
    let mut mark = imageio::load(&a.mark)?.channels;
    if a.resize {
        let (rows, cols) = host[0].shape();
        mark = mark.iter().map(|m| m.resize_nearest(rows, cols)).collect();
    }
    // Check formats before the expensive part.
    output_format(&a.out, host.len())?;
    let (marked, key) = embed(&host, &mark, params)?;
    save(&marked, &a.out)?;
    if let Some(f) = &a.float_out {
        imageio::save(&marked, PixelFormat::F64m, f)?;
    }
    keyfile::save_key(&key, &a.key)?;
    let report = MetricsReport::compute_channels(&host, &marked, psnr_mode(a.conventional_psnr))?;
    println!("{}", MetricsReport::CSV_HEADER);
    println!("{}", report.csv_row());
    Ok(())
}

fn cmd_extract(a: ExtractArgs) -> Result<()> {
    let key = keyfile::load_key(&a.key)?;
    let suspect = imageio::load(&a.image)?.channels;
    let recovered = extract(&suspect, &key)?;
    save(&recovered, &a.out)
}

fn cmd_attack(kind: AttackKind) -> Result<()> {
    let (spec, io) = match kind {
        AttackKind::Noise { sigma, seed, io } => (AttackSpec::Noise { sigma, seed }, io),
        AttackKind::Crop { rect, io } => (AttackSpec::Crop(rect.parse::<Rect>()?), io),
        AttackKind::Jpeg { quality, io } => (AttackSpec::Jpeg { quality }, io),
    };
    spec.validate()?;
    let img = imageio::load(&io.input)?.channels;
    let out = spec.apply_channels(&img)?;
    save(&out, &io.output)
}

fn cmd_metrics(a: MetricsArgs) -> Result<()> {
    let reference = imageio::load(&a.reference)?.channels;
    let test = imageio::load(&a.test)?.channels;
    let report = MetricsReport::compute_channels(&reference, &test, psnr_mode(a.conventional_psnr))?;
    println!("{}", MetricsReport::CSV_HEADER);
    println!("{}", report.csv_row());
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let mut cfg = BenchConfig::load(&a.config)?;
    if let Some(out) = a.out {
        cfg.output = out;
    }
    let rows = bench::run_config(&cfg)?;
    let mut worst: Option<i32> = None;
    for r in &rows {
        if let Err(f) = &r.outcome {
            eprintln!("svmark: bench row {} (lambda {}): {}", r.experiment, r.lambda, f.message);
            worst = Some(worst.map_or(f.exit_code, |w| w.max(f.exit_code)));
        }
    }
    match worst {
        None => Ok(()),
        Some(code) => {
            eprintln!("svmark: {} of {} rows failed", rows.iter().filter(|r| r.outcome.is_err()).count(), rows.len());
            std::process::exit(code)
        }
    }
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    if a.size < 8 {
        return Err(Error::Config("size must be at least 8".into()));
    }
    std::fs::create_dir_all(&a.dir)?;
    imageio::save(&[testimages::host_gray(a.size)], PixelFormat::Pgm, a.dir.join("host.pgm"))?;
    imageio::save(&[testimages::mark_gray(a.size)], PixelFormat::Pgm, a.dir.join("mark.pgm"))?;
    imageio::save(&testimages::host_color(a.size), PixelFormat::Ppm, a.dir.join("host_color.ppm"))?;
    imageio::save(&testimages::mark_color(a.size), PixelFormat::Ppm, a.dir.join("mark_color.ppm"))?;
    Ok(())
}
