//! Parameter sweeps over embedding strength and attacks, written as CSV.
//!
//! For every `λ` the host is watermarked once (unquantized). Then:
//!
//! * `lambda` rows compare host vs watermarked and mark vs extracted,
//! * `noise` rows add Gaussian noise for every `(σ, seed)`,
//! * `jpeg` rows run the JPEG simulation for every quality,
//! * `crop@x:y:w:h` rows black out each rectangle.
//!
//! `rmse_host`/`psnr_host` compare the host with the image handed to
//! extraction; the `*_mark` columns compare the watermark with what was
//! extracted. `λ = 0` rows leave the mark columns empty.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::attacks::{AttackSpec, Rect};
use crate::error::{Error, Result};
use crate::imageio;
use crate::matrix::ImageMatrix;
use crate::metrics::{psnr_from_rmse, rmse, MetricsReport, PsnrMode, sig9};
use crate::watermark::{embed, extract, EmbedParams, WatermarkKey};

pub const CSV_HEADER: &str =
    "experiment,lambda,sigma,quality,seed,rmse_host,psnr_host,rmse_mark,psnr_mark,ncc_mark";

/// Environment variable capping the sweep's worker threads.
pub const THREADS_ENV: &str = "SVMARK_THREADS";

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BenchConfig {
    pub host: PathBuf,
    pub mark: PathBuf,
    #[serde(flatten)]
    pub grid: Grid,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Grid {
    pub lambdas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub qualities: Vec<u8>,
    /// `x,y,width,height` strings.
    pub crops: Vec<String>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub conventional_psnr: bool,
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read a config; relative image and output paths resolve against the
    /// config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let Some(dir) = path.parent() {
            for p in [&mut cfg.host, &mut cfg.mark, &mut cfg.output] {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }
}

impl Grid {
    pub fn validate(&self) -> Result<Vec<Rect>> {
        let empty = [
            ("lambdas", self.lambdas.is_empty()),
            ("sigmas", self.sigmas.is_empty()),
            ("qualities", self.qualities.is_empty()),
            ("crops", self.crops.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Config(format!("grid `{name}` is empty")));
        }
        for &l in &self.lambdas {
            EmbedParams::diagnostic(l).map_err(|_| Error::Config(format!("lambda {l} must be >= 0")))?;
        }
        for &sigma in &self.sigmas {
            AttackSpec::Noise { sigma, seed: 0 }.validate()?;
        }
        for &quality in &self.qualities {
            AttackSpec::Jpeg { quality }.validate()?;
        }
        self.crops.iter().map(|c| c.parse()).collect()
    }

    fn psnr_mode(&self) -> PsnrMode {
        if self.conventional_psnr {
            PsnrMode::Conventional
        } else {
            PsnrMode::ReferenceMax
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub experiment: String,
    pub lambda: f64,
    pub sigma: Option<f64>,
    pub quality: Option<u8>,
    pub seed: Option<u64>,
    pub outcome: std::result::Result<RowMetrics, RowFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowFailure {
    pub message: String,
    /// Exit code class of the underlying error.
    pub exit_code: i32,
}

impl From<Error> for RowFailure {
    fn from(e: Error) -> Self {
        Self { message: e.to_string(), exit_code: e.exit_code() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowMetrics {
    pub rmse_host: f64,
    pub psnr_host: f64,
    /// Absent for `λ = 0`, where nothing can be extracted.
    pub mark: Option<MetricsReport>,
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let mut line = format!(
            "{},{},{},{},{}",
            self.experiment,
            sig9(self.lambda),
            opt(self.sigma.map(sig9)),
            opt(self.quality.map(|q| q.to_string())),
            opt(self.seed.map(|s| s.to_string())),
        );
        match &self.outcome {
            Ok(m) => {
                let _ = write!(line, ",{},{}", sig9(m.rmse_host), sig9(m.psnr_host));
                match m.mark {
                    Some(r) => {
                        let _ = write!(line, ",{}", r.csv_row());
                    }
                    None => line.push_str(",,,"),
                }
            }
            Err(_) => line.push_str(",,,,,"),
        }
        line
    }
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Plain,
    Attack(AttackSpec),
}

/// Run the full grid on in-memory images. Rows come back in grid order.
pub fn run_grid(host: &[ImageMatrix], mark: &[ImageMatrix], grid: &Grid) -> Result<Vec<BenchRow>> {
    let crops = grid.validate()?;
    if host.len() != mark.len() {
        return Err(Error::ChannelCount { expected: host.len(), actual: mark.len() });
    }
    let mode = grid.psnr_mode();

    let embeddings: Vec<std::result::Result<(Vec<ImageMatrix>, WatermarkKey), RowFailure>> = grid
        .lambdas
        .par_iter()
        .map(|&l| Ok(embed(host, mark, EmbedParams::diagnostic(l)?)?))
        .collect();

    let mut jobs: Vec<(usize, BenchRow, Job)> = Vec::new();
    let mut push = |li: usize, experiment: String, sigma, quality, seed, job| {
        let row = BenchRow {
            experiment,
            lambda: grid.lambdas[li],
            sigma,
            quality,
            seed,
            outcome: Err(RowFailure { message: "not run".into(), exit_code: 1 }),
        };
        jobs.push((li, row, job));
    };
    for li in 0..grid.lambdas.len() {
        push(li, "lambda".into(), None, None, None, Job::Plain);
    }
    for li in 0..grid.lambdas.len() {
        for &sigma in &grid.sigmas {
            for &seed in &grid.seeds {
                push(li, "noise".into(), Some(sigma), None, Some(seed), Job::Attack(AttackSpec::Noise { sigma, seed }));
            }
        }
    }
    for li in 0..grid.lambdas.len() {
        for &quality in &grid.qualities {
            push(li, "jpeg".into(), None, Some(quality), None, Job::Attack(AttackSpec::Jpeg { quality }));
        }
    }
    for li in 0..grid.lambdas.len() {
        for rect in &crops {
            let name = format!("crop@{}:{}:{}:{}", rect.x, rect.y, rect.width, rect.height);
            push(li, name, None, None, None, Job::Attack(AttackSpec::Crop(*rect)));
        }
    }

    Ok(jobs
        .into_par_iter()
        .map(|(li, mut row, job)| {
            row.outcome = match &embeddings[li] {
                Ok((marked, key)) => evaluate(host, mark, marked, key, job, mode).map_err(RowFailure::from),
                Err(e) => Err(e.clone()),
            };
            row
        })
        .collect())
}

fn evaluate(
    host: &[ImageMatrix],
    mark: &[ImageMatrix],
    marked: &[ImageMatrix],
    key: &WatermarkKey,
    job: Job,
    mode: PsnrMode,
) -> Result<RowMetrics> {
    let suspect = match job {
        Job::Plain => marked.to_vec(),
        Job::Attack(spec) => spec.apply_channels(marked)?,
    };
    let host_all = ImageMatrix::vstack(host)?;
    let rmse_host = rmse(&host_all, &ImageMatrix::vstack(&suspect)?)?;
    let psnr_host = psnr_from_rmse(rmse_host, host_all.max_value(), mode);
    let mark_report = if key.lambda() > 0.0 {
        let recovered = extract(&suspect, key)?;
        Some(MetricsReport::compute_channels(mark, &recovered, mode)?)
    } else {
        None
    };
    Ok(RowMetrics { rmse_host, psnr_host, mark: mark_report })
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Build a thread pool honoring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(e.to_string()))
}

/// Load the config's images, run the grid and write the CSV.
pub fn run_config(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let host = imageio::load(&cfg.host)?.channels;
    let mark = imageio::load(&cfg.mark)?.channels;
    let pool = thread_pool()?;
    let rows = pool.install(|| run_grid(&host, &mark, &cfg.grid))?;
    std::fs::write(&cfg.output, to_csv(&rows))?;
    Ok(rows)
}
