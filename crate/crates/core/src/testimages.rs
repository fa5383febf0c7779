//! Deterministic synthetic test images.
//!
//! The classic photographic test images are not redistributable, so the
//! tool ships procedurally generated stand-ins: a portrait-like gray host
//! (smooth shading, a few large shapes, multi-scale texture), a soft-edged
//! logo watermark, and color counterparts. All are 8-bit valued in `[0, 1]`
//! and depend only on the requested size. Hosts stay below 0.8 so that
//! embedding at moderate λ does not clip on export.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imageio::quantize_8bit;
use crate::matrix::ImageMatrix;

/// Bilinearly interpolated lattice noise with cell size `cell` pixels,
/// values in `[-1, 1]`.
fn value_noise(size: usize, cell: usize, seed: u64) -> ImageMatrix {
    let lattice = size / cell + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid: Vec<f64> = (0..lattice * lattice).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ImageMatrix::from_fn(size, size, |i, j| {
        let (fy, fx) = (i as f64 / cell as f64, j as f64 / cell as f64);
        let (y0, x0) = (fy.floor() as usize, fx.floor() as usize);
        let (ty, tx) = (fy - y0 as f64, fx - x0 as f64);
        let g = |y: usize, x: usize| grid[y * lattice + x];
        let top = g(y0, x0) * (1.0 - tx) + g(y0, x0 + 1) * tx;
        let bottom = g(y0 + 1, x0) * (1.0 - tx) + g(y0 + 1, x0 + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    })
}

fn texture(size: usize, seed: u64, octaves: &[(usize, f64)]) -> ImageMatrix {
    let mut acc = ImageMatrix::zeros(size, size);
    for (k, &(cell, amp)) in octaves.iter().enumerate() {
        let cell = cell.clamp(1, size);
        acc = acc.add(&value_noise(size, cell, seed.wrapping_add(k as u64 * 7919)).scale(amp)).expect("same size");
    }
    acc
}

fn smoothstep(edge: f64, width: f64, x: f64) -> f64 {
    let t = ((x - edge) / width + 0.5).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn portrait(size: usize, seed: u64, tint: [f64; 3]) -> ImageMatrix {
    let s = size as f64;
    let tex = texture(size, seed, &[(size / 4, 0.08), (size / 16, 0.06), (2, 0.04), (1, 0.035)]);
    let img = ImageMatrix::from_fn(size, size, |i, j| {
        let (v, u) = (i as f64 / s, j as f64 / s);
        let mut p = tint[0] + 0.2 * (2.3 * u + 1.1 * v).sin() + 0.1 * (5.0 * v).cos();
        // Hair: a dark region down the left side.
        p -= 0.3 * (1.0 - smoothstep(0.3 + 0.1 * (6.0 * v).sin(), 0.1, u));
        // Face: soft-edged ellipse.
        let r = (((u - 0.58) / 0.2).powi(2) + ((v - 0.5) / 0.28).powi(2)).sqrt();
        p += tint[1] * (1.0 - smoothstep(1.0, 0.15, r));
        // Hat brim: a dark diagonal band.
        let band = (v - 0.75 * u - 0.05).abs();
        p -= tint[2] * (1.0 - smoothstep(0.06, 0.04, band));
        // Shoulder highlight.
        let sh = (((u - 0.75) / 0.3).powi(2) + ((v - 1.0) / 0.22).powi(2)).sqrt();
        p += 0.25 * (1.0 - smoothstep(1.0, 0.2, sh));
        p + tex.get(i, j)
    });
    // Headroom above: embedding brightens the image by roughly (1 + λ).
    img.map(|p| 0.04 + 0.76 * p.clamp(0.0, 1.0))
}

/// Gray host image, `size × size`.
pub fn host_gray(size: usize) -> ImageMatrix {
    quantize_8bit(&portrait(size, 0x5eed_0001, [0.45, 0.4, 0.35]))
}

/// Gray logo watermark, `size × size`: a ring, a bar and a checker patch.
pub fn mark_gray(size: usize) -> ImageMatrix {
    logo(size, 0.3, 0.7)
}

fn box_blur(img: &ImageMatrix, radius: usize) -> ImageMatrix {
    let (rows, cols) = img.shape();
    let pass = |src: &ImageMatrix, horizontal: bool| {
        ImageMatrix::from_fn(rows, cols, |i, j| {
            let (mut acc, mut count) = (0.0, 0.0);
            for k in 0..=2 * radius {
                let off = k as isize - radius as isize;
                let (ii, jj) = if horizontal { (i as isize, j as isize + off) } else { (i as isize + off, j as isize) };
                if (0..rows as isize).contains(&ii) && (0..cols as isize).contains(&jj) {
                    acc += src.get(ii as usize, jj as usize);
                    count += 1.0;
                }
            }
            acc / count
        })
    };
    pass(&pass(img, true), false)
}

fn logo(size: usize, dark: f64, light: f64) -> ImageMatrix {
    let s = size as f64;
    let img = ImageMatrix::from_fn(size, size, |i, j| {
        let (v, u) = (i as f64 / s, j as f64 / s);
        let r = ((u - 0.5).powi(2) + (v - 0.45).powi(2)).sqrt();
        let ring = (0.22..0.32).contains(&r);
        let bar = (0.42..0.5).contains(&v) && (0.15..0.85).contains(&u);
        let checker = v > 0.78 && u < 0.3 && ((i / (size / 16).max(1) + j / (size / 16).max(1)) % 2 == 0);
        if ring || bar || checker {
            light
        } else {
            dark
        }
    });
    // Soft edges, like a downsampled photograph of a printed logo.
    let radius = (size / 64).max(1);
    quantize_8bit(&box_blur(&box_blur(&img, radius), radius))
}

/// Color host, R, G, B.
pub fn host_color(size: usize) -> Vec<ImageMatrix> {
    [
        (0x5eed_0101, [0.55, 0.3, 0.2]),
        (0x5eed_0102, [0.35, 0.25, 0.25]),
        (0x5eed_0103, [0.3, 0.15, 0.3]),
    ]
    .into_iter()
    .map(|(seed, tint)| quantize_8bit(&portrait(size, seed, tint)))
    .collect()
}

/// Color watermark with dense fur-like texture, R, G, B.
pub fn mark_color(size: usize) -> Vec<ImageMatrix> {
    [(0x5eed_0201, 0.55), (0x5eed_0202, 0.45), (0x5eed_0203, 0.5)]
        .into_iter()
        .map(|(seed, base)| {
            let tex = texture(size, seed, &[(size / 8, 0.2), (4, 0.15), (2, 0.12), (1, 0.1)]);
            quantize_8bit(&tex.map(|t| (base + t).clamp(0.0, 1.0)))
        })
        .collect()
}
