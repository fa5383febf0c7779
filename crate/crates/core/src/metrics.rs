//! Image difference metrics.
//!
//! PSNR follows the watermarking literature this tool reproduces:
//! `p = 10·log10(max / ε)` where `max` is the largest pixel of the
//! reference image and `ε` the RMSE. That is not the usual
//! `20·log10(MAX / ε)`; the latter is available as [`PsnrMode::Conventional`]
//! with `MAX = 1` for `[0, 1]` pixels.

use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsnrMode {
    /// `10·log10(max(reference) / ε)`.
    #[default]
    ReferenceMax,
    /// `20·log10(1 / ε)`.
    Conventional,
}

/// Elementwise `|a − b|`.
pub fn image_diff(a: &ImageMatrix, b: &ImageMatrix) -> Result<ImageMatrix> {
    a.zip_map(b, |x, y| (x - y).abs())
}

pub fn rmse(a: &ImageMatrix, b: &ImageMatrix) -> Result<f64> {
    a.ensure_same_shape(b, "rmse")?;
    let sum_sq: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sum_sq / a.as_slice().len() as f64).sqrt())
}

/// PSNR of `test` against `reference` with the reference-max peak.
///
/// Identical images give `+∞`. A reference whose maximum is not positive
/// gives `−∞`.
pub fn psnr(reference: &ImageMatrix, test: &ImageMatrix) -> Result<f64> {
    psnr_with(reference, test, PsnrMode::ReferenceMax)
}

pub fn psnr_with(reference: &ImageMatrix, test: &ImageMatrix, mode: PsnrMode) -> Result<f64> {
    let eps = rmse(reference, test)?;
    Ok(psnr_from_rmse(eps, reference.max_value(), mode))
}

pub fn psnr_from_rmse(eps: f64, reference_max: f64, mode: PsnrMode) -> f64 {
    if eps == 0.0 {
        return f64::INFINITY;
    }
    match mode {
        PsnrMode::ReferenceMax if reference_max <= 0.0 => f64::NEG_INFINITY,
        PsnrMode::ReferenceMax => 10.0 * (reference_max / eps).log10(),
        PsnrMode::Conventional => 20.0 * (1.0 / eps).log10(),
    }
}

/// Zero-mean normalized cross-correlation, in `[−1, 1]`.
pub fn ncc(a: &ImageMatrix, b: &ImageMatrix) -> Result<f64> {
    a.ensure_same_shape(b, "ncc")?;
    let n = a.as_slice().len() as f64;
    let mean_a = a.as_slice().iter().sum::<f64>() / n;
    let mean_b = b.as_slice().iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Degenerate { metric: "ncc" });
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub rmse: f64,
    pub psnr: f64,
    pub ncc: f64,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "rmse,psnr,ncc";

    pub fn compute(reference: &ImageMatrix, test: &ImageMatrix, mode: PsnrMode) -> Result<Self> {
        let rmse = rmse(reference, test)?;
        Ok(Self {
            rmse,
            psnr: psnr_from_rmse(rmse, reference.max_value(), mode),
            ncc: ncc(reference, test)?,
        })
    }

    /// Metrics over several channels taken together as one image.
    pub fn compute_channels(reference: &[ImageMatrix], test: &[ImageMatrix], mode: PsnrMode) -> Result<Self> {
        if reference.len() != test.len() {
            return Err(Error::ChannelCount { expected: reference.len(), actual: test.len() });
        }
        for (r, t) in reference.iter().zip(test) {
            r.ensure_same_shape(t, "metrics channels")?;
        }
        Self::compute(&ImageMatrix::vstack(reference)?, &ImageMatrix::vstack(test)?, mode)
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{}", sig9(self.rmse), sig9(self.psnr), sig9(self.ncc))
    }
}

/// Nine significant digits, `%.9g` style.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
