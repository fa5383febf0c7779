//! Robustness attacks on `[0, 1]`-scaled images: additive Gaussian noise,
//! blacked-out rectangles and a baseline-JPEG luminance round trip.
//!
//! All attacks are pure functions of the image, the parameters and (for
//! noise) the seed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;

/// Pixel rectangle, `x` counting columns and `y` rows from the top left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self { x, y, width, height }
    }

    /// Centered rectangle covering the fraction `area` of a `rows × cols` image.
    pub fn centered(rows: usize, cols: usize, area: f64) -> Self {
        let side = area.clamp(0.0, 1.0).sqrt();
        let height = (rows as f64 * side).round() as usize;
        let width = (cols as f64 * side).round() as usize;
        Self { x: (cols - width) / 2, y: (rows - height) / 2, width, height }
    }

    pub fn fits(&self, rows: usize, cols: usize) -> bool {
        self.x.checked_add(self.width).is_some_and(|r| r <= cols)
            && self.y.checked_add(self.height).is_some_and(|b| b <= rows)
    }
}

impl FromStr for Rect {
    type Err = Error;

    /// `x,y,width,height`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let nums: Vec<usize> = parts
            .iter()
            .map(|p| p.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Attack(format!("bad rectangle {s:?}, expected x,y,width,height")))?;
        match nums[..] {
            [x, y, width, height] => Ok(Self { x, y, width, height }),
            _ => Err(Error::Attack(format!("bad rectangle {s:?}, expected x,y,width,height"))),
        }
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.x, self.y, self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackSpec {
    Noise { sigma: f64, seed: u64 },
    Crop(Rect),
    Jpeg { quality: u8 },
}

impl AttackSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AttackSpec::Noise { sigma, .. } => check_sigma(sigma),
            AttackSpec::Crop(_) => Ok(()),
            AttackSpec::Jpeg { quality } => check_quality(quality as i64),
        }
    }

    pub fn apply(&self, img: &ImageMatrix) -> Result<ImageMatrix> {
        match *self {
            AttackSpec::Noise { sigma, seed } => add_gaussian_noise(img, sigma, seed),
            AttackSpec::Crop(rect) => crop_rect(img, rect),
            AttackSpec::Jpeg { quality } => jpeg_simulate(img, quality as i64),
        }
    }

    /// Apply to each channel of an image. Noise uses an independent stream
    /// per channel; channel 0 matches the single-channel output.
    pub fn apply_channels(&self, channels: &[ImageMatrix]) -> Result<Vec<ImageMatrix>> {
        channels
            .iter()
            .enumerate()
            .map(|(c, img)| match *self {
                AttackSpec::Noise { sigma, seed } => add_gaussian_noise_stream(img, sigma, seed, c as u64),
                _ => self.apply(img),
            })
            .collect()
    }
}

/// Standard normal deviates by the Box–Muller transform on a ChaCha8
/// stream. Both deviates of each pair are used.
#[derive(Debug, Clone)]
pub struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.rng.gen::<f64>();
        let u2 = self.rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// `Z' = clamp(Z + G, 0, 1)` with `G` i.i.d. normal of standard deviation `sigma`.
pub fn add_gaussian_noise(img: &ImageMatrix, sigma: f64, seed: u64) -> Result<ImageMatrix> {
    add_gaussian_noise_stream(img, sigma, seed, 0)
}

pub fn add_gaussian_noise_stream(img: &ImageMatrix, sigma: f64, seed: u64, stream: u64) -> Result<ImageMatrix> {
    check_sigma(sigma)?;
    let mut src = GaussianSource::with_stream(seed, stream);
    let data = img
        .as_slice()
        .iter()
        .map(|&v| (v + sigma * src.next_standard()).clamp(0.0, 1.0))
        .collect();
    ImageMatrix::from_vec(img.rows(), img.cols(), data)
}

/// Black out `rect`; the image keeps its dimensions.
pub fn crop_rect(img: &ImageMatrix, rect: Rect) -> Result<ImageMatrix> {
    if !rect.fits(img.rows(), img.cols()) {
        return Err(Error::Attack(format!(
            "crop rectangle {rect} exceeds {}x{} image",
            img.cols(),
            img.rows()
        )));
    }
    let mut out = img.clone();
    for i in rect.y..rect.y + rect.height {
        for j in rect.x..rect.x + rect.width {
            out.set(i, j, 0.0);
        }
    }
    Ok(out)
}

/// Baseline-JPEG luminance quantization table, natural (row-major) order.
pub const LUMA_QUANT: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Quality-scaled quantization table.
pub fn quant_table(quality: i64) -> Result<[u16; 64]> {
    check_quality(quality)?;
    let scale = if quality < 50 { 5000 / quality } else { 200 - 2 * quality };
    let mut out = [0u16; 64];
    for (o, &q) in out.iter_mut().zip(LUMA_QUANT.iter()) {
        // Integer arithmetic gives the floor for these non-negative operands.
        *o = ((q as i64 * scale + 50) / 100).clamp(1, 255) as u16;
    }
    Ok(out)
}

fn dct_basis() -> [[f64; 8]; 8] {
    let mut c = [[0.0; 8]; 8];
    for (u, row) in c.iter_mut().enumerate() {
        let alpha = if u == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
        for (x, v) in row.iter_mut().enumerate() {
            *v = alpha * (((2 * x + 1) as f64 * u as f64 * PI) / 16.0).cos();
        }
    }
    c
}

/// Simulated baseline JPEG compression of one luminance plane.
///
/// Samples are taken to 8-bit integers, level-shifted, transformed by an
/// orthonormal 8×8 DCT-II, quantized with [`quant_table`], dequantized and
/// inverted; the reconstruction is rounded back to 8 bits as a decoder
/// would. Partial blocks are padded by edge replication.
pub fn jpeg_simulate(img: &ImageMatrix, quality: i64) -> Result<ImageMatrix> {
    let table = quant_table(quality)?;
    let basis = dct_basis();
    let (rows, cols) = img.shape();
    let (prow, pcol) = (rows.div_ceil(8) * 8, cols.div_ceil(8) * 8);

    let sample = |i: usize, j: usize| -> f64 {
        let v = img.get(i.min(rows - 1), j.min(cols - 1));
        (v.clamp(0.0, 1.0) * 255.0).round()
    };

    let mut out = ImageMatrix::zeros(rows, cols);
    let mut block = [[0.0f64; 8]; 8];
    let mut tmp = [[0.0f64; 8]; 8];
    for by in (0..prow).step_by(8) {
        for bx in (0..pcol).step_by(8) {
            for (y, row) in block.iter_mut().enumerate() {
                for (x, v) in row.iter_mut().enumerate() {
                    *v = sample(by + y, bx + x) - 128.0;
                }
            }
            // Forward: C · B · Cᵀ.
            for u in 0..8 {
                for x in 0..8 {
                    tmp[u][x] = (0..8).map(|y| basis[u][y] * block[y][x]).sum();
                }
            }
            for u in 0..8 {
                for v in 0..8 {
                    let coef: f64 = (0..8).map(|x| tmp[u][x] * basis[v][x]).sum();
                    let q = table[u * 8 + v] as f64;
                    block[u][v] = (coef / q).round() * q;
                }
            }
            // Inverse: Cᵀ · F · C.
            for y in 0..8 {
                for v in 0..8 {
                    tmp[y][v] = (0..8).map(|u| basis[u][y] * block[u][v]).sum();
                }
            }
            for y in 0..8 {
                let i = by + y;
                if i >= rows {
                    break;
                }
                for x in 0..8 {
                    let j = bx + x;
                    if j >= cols {
                        break;
                    }
                    let p: f64 = (0..8).map(|v| tmp[y][v] * basis[v][x]).sum::<f64>() + 128.0;
                    out.set(i, j, p.round().clamp(0.0, 255.0) / 255.0);
                }
            }
        }
    }
    Ok(out)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Attack(format!("noise sigma must be >= 0, got {sigma}")));
    }
    Ok(())
}

fn check_quality(quality: i64) -> Result<()> {
    if !(1..=100).contains(&quality) {
        return Err(Error::Attack(format!("JPEG quality must be in 1..=100, got {quality}")));
    }
    Ok(())
}
