//! Cyclic Jacobi eigenvalues for real symmetric and complex Hermitian
//! matrices, and eigenvalue signatures with a relative zero threshold.

use serde::Serialize;

use crate::exact_arith::ComplexFloat;

pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalues below this fraction of the spectral radius count as zero.
pub const ZERO_EIGEN_RELATIVE: f64 = 1e-9;
/// Matrices with spectral radius below this report all zeros.
pub const NEGLIGIBLE_SPECTRAL_RADIUS: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub positives: usize,
    pub negatives: usize,
    pub zeros: usize,
}

impl Signature {
    pub fn new(positives: usize, negatives: usize, zeros: usize) -> Self {
        Self {
            positives,
            negatives,
            zeros,
        }
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.zeros == 0
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.positives, self.negatives, self.zeros)
    }
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigenvalues of a Hermitian matrix, ascending. The matrix `A + iB` is
/// doubled to the real symmetric `[[A, −B], [B, A]]`, whose spectrum is that
/// of the original with every eigenvalue repeated.
pub fn hermitian_eigenvalues(h: &[Vec<ComplexFloat>]) -> Vec<f64> {
    let n = h.len();
    let mut d = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = h[i][j];
            d[i][j] = z.re;
            d[i + n][j + n] = z.re;
            d[i][j + n] = -z.im;
            d[i + n][j] = z.im;
        }
    }
    symmetric_eigenvalues(&d).into_iter().step_by(2).collect()
}

pub fn spectral_radius(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

pub fn signature_of(eigenvalues: &[f64]) -> Signature {
    let radius = spectral_radius(eigenvalues);
    if radius < NEGLIGIBLE_SPECTRAL_RADIUS {
        return Signature::new(0, 0, eigenvalues.len());
    }
    let cut = ZERO_EIGEN_RELATIVE * radius;
    let mut s = Signature::new(0, 0, 0);
    for &e in eigenvalues {
        if e > cut {
            s.positives += 1;
        } else if e < -cut {
            s.negatives += 1;
        } else {
            s.zeros += 1;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_form_spectrum() {
        let a = vec![
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let ev = symmetric_eigenvalues(&a);
        assert!((ev[0] + 1.0).abs() < 1e-12);
        assert!((ev[1] - 1.0).abs() < 1e-12);
        assert!((ev[2] - 1.0).abs() < 1e-12);
        assert_eq!(signature_of(&ev), Signature::new(2, 1, 0));
    }

    #[test]
    fn hermitian_matches_characteristic_polynomial() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let h = vec![
            vec![ComplexFloat::new(2.0, 0.0), ComplexFloat::new(0.0, 1.0)],
            vec![ComplexFloat::new(0.0, -1.0), ComplexFloat::new(2.0, 0.0)],
        ];
        let ev = hermitian_eigenvalues(&h);
        assert_eq!(ev.len(), 2);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_threshold_is_relative() {
        assert_eq!(signature_of(&[1e-12, 1.0, -2.0]), Signature::new(1, 1, 1));
        assert_eq!(signature_of(&[1e-40, -1e-35]), Signature::new(0, 0, 2));
        assert_eq!(signature_of(&[1e-20, -1e-20]), Signature::new(1, 1, 0));
    }

    #[test]
    fn random_symmetric_trace_preserved() {
        let a = vec![
            vec![4.0, -2.0, 0.5, 1.0],
            vec![-2.0, 3.0, 0.25, 0.0],
            vec![0.5, 0.25, -1.0, 2.0],
            vec![1.0, 0.0, 2.0, 0.0],
        ];
        let ev = symmetric_eigenvalues(&a);
        let tr: f64 = ev.iter().sum();
        assert!((tr - 6.0).abs() < 1e-10);
        let fro: f64 = ev.iter().map(|x| x * x).sum();
        let fro_a: f64 = a.iter().flatten().map(|x| x * x).sum();
        assert!((fro - fro_a).abs() < 1e-9);
    }
}
