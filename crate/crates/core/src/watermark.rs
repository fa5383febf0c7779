//! Embedding into and extraction from the right singular vectors of a host
//! image.
//!
//! With `Z = A_z·V_zᵀ` and `W = A_w·V_wᵀ` (`A = U·D`), the watermarked image
//! is `Z_c = A_z·(V_z + λ·V_w)ᵀ`. Extraction inverts that chain given the
//! side information `(λ, A_z, V_z, A_w)`:
//! `V_wᵀ = (A_z⁻¹·Z_c − V_zᵀ) / λ` and `W̃ = A_w·V_wᵀ`, where
//! `A_z⁻¹ = D_z⁻¹·U_zᵀ`.
//!
//! Nothing here clamps or quantizes; outputs are unconstrained reals.

use log::warn;

use crate::error::{Error, Result};
use crate::matrix::ImageMatrix;
use crate::svd::{invert_principal, principal_components, thin_svd, ThinSvd, DEFAULT_SV_FLOOR};

/// Strengths above this make the watermarked image visibly noisy.
pub const NOISY_LAMBDA: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedParams {
    lambda: f64,
}

impl EmbedParams {
    /// Embedding strength; must be positive and finite.
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Lambda(lambda));
        }
        if lambda > NOISY_LAMBDA {
            warn!("lambda {lambda} exceeds {NOISY_LAMBDA}; the watermarked image will be visibly noisy");
        }
        Ok(Self { lambda })
    }

    /// Like [`EmbedParams::new`] but also accepts `λ = 0`, for sweeps that
    /// start at the unwatermarked limit.
    pub fn diagnostic(lambda: f64) -> Result<Self> {
        if lambda == 0.0 {
            return Ok(Self { lambda });
        }
        Self::new(lambda)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Side information for one channel.
///
/// Factors are stored in the normalized orientation (`rows ≥ cols`);
/// `transposed` records whether the original images were wide.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelKey {
    pub lambda: f64,
    pub a_z: ImageMatrix,
    pub v_z: ImageMatrix,
    pub a_w: ImageMatrix,
    pub transposed: bool,
}

impl ChannelKey {
    pub fn validate(&self) -> Result<()> {
        let (m, n) = self.a_z.shape();
        if m < n {
            return Err(Error::dim(format!("key factors {m}x{n} are not in tall orientation")));
        }
        self.a_z.ensure_same_shape(&self.a_w, "key A_z vs A_w")?;
        if self.v_z.shape() != (n, n) {
            return Err(Error::dim(format!(
                "key V_z is {}x{}, expected {n}x{n}",
                self.v_z.rows(),
                self.v_z.cols()
            )));
        }
        Ok(())
    }

    /// Shape of the images this key applies to, in their original orientation.
    pub fn image_shape(&self) -> (usize, usize) {
        let (m, n) = self.a_z.shape();
        if self.transposed {
            (n, m)
        } else {
            (m, n)
        }
    }
}

/// One key per channel: gray, or R, G, B in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkKey {
    channels: Vec<ChannelKey>,
}

impl WatermarkKey {
    pub fn new(channels: Vec<ChannelKey>) -> Result<Self> {
        if channels.len() != 1 && channels.len() != 3 {
            return Err(Error::ChannelCount { expected: 3, actual: channels.len() });
        }
        let first = &channels[0];
        for c in &channels {
            c.validate()?;
            if c.a_z.shape() != first.a_z.shape() || c.transposed != first.transposed {
                return Err(Error::dim("key channels differ in geometry"));
            }
            if c.lambda.to_bits() != first.lambda.to_bits() {
                return Err(Error::Lambda(c.lambda));
            }
        }
        Ok(Self { channels })
    }

    pub fn channels(&self) -> &[ChannelKey] {
        &self.channels
    }

    pub fn lambda(&self) -> f64 {
        self.channels[0].lambda
    }
}

/// Transpose wide images so that `rows ≥ cols`.
pub fn geometry_normalize(img: &ImageMatrix) -> (ImageMatrix, bool) {
    if img.rows() >= img.cols() {
        (img.clone(), false)
    } else {
        (img.transpose(), true)
    }
}

pub fn embed_gray(
    host: &ImageMatrix,
    mark: &ImageMatrix,
    params: EmbedParams,
) -> Result<(ImageMatrix, ChannelKey)> {
    host.ensure_same_shape(mark, "host vs watermark")?;
    let (host_n, transposed) = geometry_normalize(host);
    let (mark_n, _) = geometry_normalize(mark);

    let host_svd = thin_svd(&host_n)?;
    // Extraction needs A_z⁻¹; refuse hosts where it would not exist.
    invert_principal(&host_svd, DEFAULT_SV_FLOOR)?;
    let mark_svd = thin_svd(&mark_n)?;

    let host_pc = principal_components(&host_svd);
    let mark_pc = principal_components(&mark_svd);
    let lambda = params.lambda();

    let blended = host_pc.v.add(&mark_pc.v.scale(lambda))?;
    let marked = host_pc.a.matmul_transpose(&blended)?;

    let key = ChannelKey {
        lambda,
        a_z: host_pc.a,
        v_z: host_pc.v,
        a_w: mark_pc.a,
        transposed,
    };
    let marked = if transposed { marked.transpose() } else { marked };
    Ok((marked, key))
}

pub fn extract_gray(suspect: &ImageMatrix, key: &ChannelKey) -> Result<ImageMatrix> {
    key.validate()?;
    if !(key.lambda.is_finite() && key.lambda > 0.0) {
        return Err(Error::Lambda(key.lambda));
    }
    let expected = key.image_shape();
    if suspect.shape() != expected {
        return Err(Error::dim(format!(
            "suspect is {}x{}, key expects {}x{}",
            suspect.rows(),
            suspect.cols(),
            expected.0,
            expected.1
        )));
    }
    let suspect = if key.transposed { suspect.transpose() } else { suspect.clone() };

    let host_factors = ThinSvd::from_principal(&key.a_z, &key.v_z)?;
    let a_z_inv = invert_principal(&host_factors, DEFAULT_SV_FLOOR)?;
    let projected = a_z_inv.matmul(&suspect)?;
    let v_w_t = projected.sub(&key.v_z.transpose())?.scale(1.0 / key.lambda);
    let recovered = key.a_w.matmul(&v_w_t)?;
    Ok(if key.transposed { recovered.transpose() } else { recovered })
}

pub fn embed_color(
    host: &[ImageMatrix],
    mark: &[ImageMatrix],
    params: EmbedParams,
) -> Result<(Vec<ImageMatrix>, WatermarkKey)> {
    check_three(host)?;
    check_three(mark)?;
    let mut marked = Vec::with_capacity(3);
    let mut keys = Vec::with_capacity(3);
    for (c, (h, w)) in host.iter().zip(mark).enumerate() {
        h.ensure_same_shape(&host[0], "host channels")?;
        let (out, key) = embed_gray(h, w, params).map_err(|e| in_channel(c, e))?;
        marked.push(out);
        keys.push(key);
    }
    Ok((marked, WatermarkKey::new(keys)?))
}

pub fn extract_color(suspect: &[ImageMatrix], key: &WatermarkKey) -> Result<Vec<ImageMatrix>> {
    check_three(suspect)?;
    if key.channels().len() != 3 {
        return Err(Error::ChannelCount { expected: 3, actual: key.channels().len() });
    }
    suspect
        .iter()
        .zip(key.channels())
        .enumerate()
        .map(|(c, (s, k))| extract_gray(s, k).map_err(|e| in_channel(c, e)))
        .collect()
}

/// Embed one or three channels, dispatching on the channel count.
pub fn embed(
    host: &[ImageMatrix],
    mark: &[ImageMatrix],
    params: EmbedParams,
) -> Result<(Vec<ImageMatrix>, WatermarkKey)> {
    if host.len() != mark.len() {
        return Err(Error::ChannelCount { expected: host.len(), actual: mark.len() });
    }
    match host {
        [h] => {
            let (out, key) = embed_gray(h, &mark[0], params)?;
            Ok((vec![out], WatermarkKey::new(vec![key])?))
        }
        _ => embed_color(host, mark, params),
    }
}

pub fn extract(suspect: &[ImageMatrix], key: &WatermarkKey) -> Result<Vec<ImageMatrix>> {
    if suspect.len() != key.channels().len() {
        return Err(Error::ChannelCount { expected: key.channels().len(), actual: suspect.len() });
    }
    match suspect {
        [s] => Ok(vec![extract_gray(s, &key.channels()[0])?]),
        _ => extract_color(suspect, key),
    }
}

fn check_three(channels: &[ImageMatrix]) -> Result<()> {
    if channels.len() != 3 {
        return Err(Error::ChannelCount { expected: 3, actual: channels.len() });
    }
    Ok(())
}

fn in_channel(channel: usize, err: Error) -> Error {
    const NAMES: [&str; 3] = ["red", "green", "blue"];
    match err {
        Error::Dimension(msg) => Error::Dimension(format!("{} channel: {msg}", NAMES[channel])),
        other => other,
    }
}
