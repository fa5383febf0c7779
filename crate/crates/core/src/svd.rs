//! Thin singular value decomposition by one-sided (Hestenes) Jacobi, and the
//! principal-component factorizations built on it.
//!
//! For an `m × n` matrix `Z` with `m ≥ n` the decomposition is
//! `Z = U · diag(d) · Vᵀ` with `U` (`m × n`) having orthonormal columns, `V`
//! (`n × n`) orthogonal and `d` non-increasing and non-negative. Each column
//! of `U` is sign-normalized so that its largest-magnitude entry is
//! positive, with the matching column of `V` flipped alongside.

use crate::error::{Error, Result};
use crate::matrix::{dot, ImageMatrix};

/// Sweep cap for the Jacobi iteration.
pub const MAX_SWEEPS: usize = 60;

/// Default relative singular-value floor for [`invert_principal`].
pub const DEFAULT_SV_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ThinSvd {
    u: ImageMatrix,
    d: Vec<f64>,
    v: ImageMatrix,
}

impl ThinSvd {
    /// Assemble factors directly. Only shapes and the sign of `d` are
    /// checked; orthogonality is the caller's responsibility.
    pub fn from_parts(u: ImageMatrix, d: Vec<f64>, v: ImageMatrix) -> Result<Self> {
        let n = d.len();
        if u.cols() != n || v.shape() != (n, n) || u.rows() < n {
            return Err(Error::dim(format!(
                "inconsistent factors: U {}x{}, {} singular values, V {}x{}",
                u.rows(),
                u.cols(),
                n,
                v.rows(),
                v.cols()
            )));
        }
        if let Some(index) = d.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if d.iter().any(|&x| x < 0.0) {
            return Err(Error::dim("negative singular value"));
        }
        Ok(Self { u, d, v })
    }

    /// Recover `U` and `d` from principal components `A = U·diag(d)`: the
    /// singular values are the column norms of `A`.
    pub fn from_principal(a: &ImageMatrix, v: &ImageMatrix) -> Result<Self> {
        let (m, n) = a.shape();
        if m < n || v.shape() != (n, n) {
            return Err(Error::dim(format!(
                "principal components {m}x{n} with V {}x{}",
                v.rows(),
                v.cols()
            )));
        }
        let mut columns: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let d: Vec<f64> = columns.iter().map(|c| dot(c, c).sqrt()).collect();
        normalize_columns(&mut columns, &d, f64::EPSILON * a.frobenius_norm(), m);
        Ok(Self { u: from_columns(m, &columns), d, v: v.clone() })
    }

    pub fn u(&self) -> &ImageMatrix {
        &self.u
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.d
    }

    pub fn v(&self) -> &ImageMatrix {
        &self.v
    }

    /// `U · diag(d) · Vᵀ`.
    pub fn reconstruct(&self) -> ImageMatrix {
        principal_components(self)
            .a
            .matmul_transpose(&self.v)
            .expect("factor shapes checked at construction")
    }
}

/// `A = U·diag(d)` together with `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalComponents {
    pub a: ImageMatrix,
    pub v: ImageMatrix,
}

/// Thin SVD of `z`. Requires `rows ≥ cols`; transpose wide inputs first.
pub fn thin_svd(z: &ImageMatrix) -> Result<ThinSvd> {
    let (m, n) = z.shape();
    if m < n {
        return Err(Error::dim(format!(
            "thin SVD needs rows >= cols, got {m}x{n}; transpose first"
        )));
    }

    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| z.column(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    let tol = m as f64 * f64::EPSILON;
    let z_norm_sq = z.as_slice().iter().map(|x| x * x).sum::<f64>();
    let negligible = f64::EPSILON * z_norm_sq.sqrt();
    let mut converged = n < 2;
    let mut off_norm = 0.0;

    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        let mut off_sq = 0.0;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (head, tail) = cols.split_at_mut(q);
                let (cp, cq) = (&mut head[p], &mut tail[0]);
                let alpha = dot(cp, cp);
                let beta = dot(cq, cq);
                let gamma = dot(cp, cq);
                off_sq += gamma * gamma;
                let (na, nb) = (alpha.sqrt(), beta.sqrt());
                // Columns below the rounding level of Z are numerically zero;
                // rotating them only chases noise.
                if na <= negligible || nb <= negligible || gamma.abs() <= tol * na * nb {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(cp, cq, c, s);
                let (vhead, vtail) = vcols.split_at_mut(q);
                rotate(&mut vhead[p], &mut vtail[0], c, s);
            }
        }
        off_norm = if z_norm_sq > 0.0 { off_sq.sqrt() / z_norm_sq } else { 0.0 };
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_norm });
    }

    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable, so equal singular values keep their column order.
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let d: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut ucols: Vec<Vec<f64>> = order.iter().map(|&j| std::mem::take(&mut cols[j])).collect();
    let mut vcols: Vec<Vec<f64>> = order.iter().map(|&j| std::mem::take(&mut vcols[j])).collect();
    normalize_columns(&mut ucols, &d, negligible, m);

    for (uc, vc) in ucols.iter_mut().zip(vcols.iter_mut()) {
        let lead = uc.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if lead < 0.0 {
            uc.iter_mut().for_each(|x| *x = -*x);
            vc.iter_mut().for_each(|x| *x = -*x);
        }
    }

    Ok(ThinSvd { u: from_columns(m, &ucols), d, v: from_columns(n, &vcols) })
}

/// `A = U·diag(d)`; `V` is copied through.
pub fn principal_components(s: &ThinSvd) -> PrincipalComponents {
    let (m, n) = s.u.shape();
    let a = ImageMatrix::from_fn(m, n, |i, j| s.u.get(i, j) * s.d[j]);
    PrincipalComponents { a, v: s.v.clone() }
}

/// Left inverse of the principal components, `D⁻¹·Uᵀ` (`n × m`).
///
/// Every singular value must exceed `sv_floor` times the largest one.
pub fn invert_principal(s: &ThinSvd, sv_floor: f64) -> Result<ImageMatrix> {
    let d_max = s.d.iter().copied().fold(0.0, f64::max);
    let floor = sv_floor * d_max;
    for (index, &value) in s.d.iter().enumerate() {
        if value.is_nan() || value <= floor || value == 0.0 {
            return Err(Error::Singular { index, value, floor });
        }
    }
    let (m, n) = s.u.shape();
    Ok(ImageMatrix::from_fn(n, m, |i, j| s.u.get(j, i) / s.d[i]))
}

/// Diagonal of `V·Vᵀ`, i.e. the squared row norms of `v`.
pub fn gram_diagonal(v: &ImageMatrix) -> Result<Vec<f64>> {
    if !v.is_square() {
        return Err(Error::dim(format!("gram diagonal of non-square {}x{}", v.rows(), v.cols())));
    }
    Ok((0..v.rows()).map(|i| dot(v.row(i), v.row(i))).collect())
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Divide each column by its norm. Columns with norm at or below
/// `negligible` are replaced by unit vectors orthogonal to every other column.
fn normalize_columns(cols: &mut [Vec<f64>], norms: &[f64], negligible: f64, m: usize) {
    let mut missing = Vec::new();
    for (j, (c, &nrm)) in cols.iter_mut().zip(norms).enumerate() {
        if nrm > negligible && nrm > 0.0 {
            let inv = 1.0 / nrm;
            c.iter_mut().for_each(|x| *x *= inv);
        } else {
            missing.push(j);
        }
    }
    let mut pending = missing.clone();
    for j in missing {
        let basis: Vec<&Vec<f64>> = cols
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j && !pending.contains(k))
            .map(|(_, c)| c)
            .collect();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for k in 0..m {
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            // Two Gram-Schmidt passes recover orthogonality lost to rounding.
            for _ in 0..2 {
                for b in &basis {
                    let proj = dot(&e, b);
                    e.iter_mut().zip(b.iter()).for_each(|(x, y)| *x -= proj * y);
                }
            }
            let nrm = dot(&e, &e).sqrt();
            if best.as_ref().is_none_or(|(bn, _)| nrm > *bn) {
                best = Some((nrm, e));
            }
        }
        let (nrm, mut e) = best.expect("m >= 1");
        e.iter_mut().for_each(|x| *x /= nrm);
        cols[j] = e;
        pending.retain(|&k| k != j);
    }
}

fn from_columns(rows: usize, cols: &[Vec<f64>]) -> ImageMatrix {
    ImageMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}
