//! Singular values checked against a textbook two-sided Jacobi
//! eigen-decomposition of `ZᵀZ`, written independently of the library.

mod common;

use common::{orthogonality_defect, random_signed, rng};
use svmark::{thin_svd, ImageMatrix};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
fn symmetric_eigenvalues(a: &ImageMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut s: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| s[i][j] * s[i][j]).sum();
        let diag: f64 = (0..n).map(|i| s[i][i] * s[i][i]).sum();
        if off <= 1e-30 * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if s[p][q] == 0.0 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (skp, skq) = (s[k][p], s[k][q]);
                    s[k][p] = c * skp - sn * skq;
                    s[k][q] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let (spk, sqk) = (s[p][k], s[q][k]);
                    s[p][k] = c * spk - sn * sqk;
                    s[q][k] = sn * spk + c * sqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| s[i][i]).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

#[test]
fn singular_values_match_gram_eigenvalues() {
    let mut r = rng(55);
    for _ in 0..20 {
        let z = random_signed(&mut r, 64, 64);
        let s = thin_svd(&z).unwrap();
        let gram = z.transpose().matmul(&z).unwrap();
        let oracle: Vec<f64> = symmetric_eigenvalues(&gram).iter().map(|&e| e.max(0.0).sqrt()).collect();
        let d = s.singular_values();
        // Squaring loses precision at the bottom of the spectrum; compare
        // relative to the largest value.
        for (a, b) in d.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-8 * d[0], "{a} vs {b}");
        }
        let resid = s.reconstruct().sub(&z).unwrap().frobenius_norm() / z.frobenius_norm().max(1.0);
        assert!(resid <= 1e-10, "residual {resid:e}");
    }
}

#[test]
fn leading_singular_values_are_accurate_relative_to_themselves() {
    let mut r = rng(56);
    for _ in 0..5 {
        let z = random_signed(&mut r, 96, 40);
        let d = thin_svd(&z).unwrap().singular_values().to_vec();
        let oracle: Vec<f64> = symmetric_eigenvalues(&z.transpose().matmul(&z).unwrap()).iter().map(|e| e.sqrt()).collect();
        for (a, b) in d.iter().zip(&oracle).take(10) {
            assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
        }
    }
}

#[test]
fn known_spectrum_is_recovered() {
    // Z = Q₁ diag(σ) Q₂ᵀ with orthogonal factors from the QR of random matrices.
    let mut r = rng(57);
    let (m, n) = (50, 20);
    let q1 = gram_schmidt(&random_signed(&mut r, m, n));
    let q2 = gram_schmidt(&random_signed(&mut r, n, n));
    assert!(orthogonality_defect(&q1) < 1e-12);
    let sigma: Vec<f64> = (0..n).map(|i| 10f64.powf(-(i as f64) / 4.0)).collect();
    let z = q1.matmul(&ImageMatrix::diag(&sigma)).unwrap().matmul_transpose(&q2).unwrap();
    let d = thin_svd(&z).unwrap().singular_values().to_vec();
    for (a, b) in d.iter().zip(&sigma) {
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
}

fn gram_schmidt(a: &ImageMatrix) -> ImageMatrix {
    let (m, n) = a.shape();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let p: f64 = (0..m).map(|i| cols[j][i] * cols[k][i]).sum();
                for i in 0..m {
                    cols[j][i] -= p * cols[k][i];
                }
            }
        }
        let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|x| *x /= norm);
    }
    ImageMatrix::from_fn(m, n, |i, j| cols[j][i])
}
