use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::tol;

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// The input is checked against [`tol::HERMITIAN`] and then replaced by its
/// exact Hermitian part. The complex problem is solved as the real symmetric
/// matrix `[[Re h, -Im h], [Im h, Re h]]`, whose spectrum is that of `h` with
/// every eigenvalue doubled; consecutive sorted pairs are merged.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    let (values, _) = solve(h, false)?;
    Ok(values)
}

#[cfg(test)]
/// Eigenvalues with unit eigenvectors (column `k` of the returned list pairs with value `k`).
pub(crate) fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let (values, vectors) = solve(h, true)?;
    Ok((values, vectors.unwrap_or_default()))
}

type Eigenvectors = Vec<Vec<Complex64>>;

fn solve(h: &ComplexMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Eigenvectors>)> {
    let defect = h.hermitian_defect();
    if defect > tol::HERMITIAN || defect.is_nan() {
        return Err(Error::NotHermitian { defect });
    }
    let h = h.hermitian_part();
    let n = h.dim();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    let mut v = want_vectors.then(|| {
        let mut id = vec![0.0; m * m];
        for i in 0..m {
            id[i * m + i] = 1.0;
        }
        id
    });
    let diag = jacobi(&mut a, m, v.as_deref_mut())?;

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    let values = order
        .chunks(2)
        .map(|pair| 0.5 * (diag[pair[0]] + diag[pair[1]]))
        .collect();
    let vectors = v.map(|v| {
        order
            .chunks(2)
            .map(|pair| {
                let col = pair[0];
                let mut z: Vec<Complex64> = (0..n)
                    .map(|i| Complex64::new(v[i * m + col], v[(i + n) * m + col]))
                    .collect();
                let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                z.iter_mut().for_each(|c| *c /= norm);
                z
            })
            .collect()
    });
    Ok((values, vectors))
}

/// Cyclic Jacobi on a real symmetric row-major `m × m` matrix.
///
/// Returns the diagonal after convergence; when `v` is given it accumulates
/// the rotations so its columns are the eigenvectors.
fn jacobi(a: &mut [f64], m: usize, mut v: Option<&mut [f64]>) -> Result<Vec<f64>> {
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = tol::JACOBI_OFF_DIAGONAL * total;
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..m {
            for q in 0..m {
                if p != q {
                    s += a[p * m + q] * a[p * m + q];
                }
            }
        }
        s.sqrt()
    };

    for sweep in 0..tol::JACOBI_MAX_SWEEPS {
        if off(a) <= target {
            return Ok((0..m).map(|i| a[i * m + i]).collect());
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                // after a few sweeps, entries below the diagonal's resolution are dropped
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * m + q] = 0.0;
                    a[q * m + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                a[p * m + q] = 0.0;
                a[q * m + p] = 0.0;

                if let Some(v) = v.as_deref_mut() {
                    for k in 0..m {
                        let vkp = v[k * m + p];
                        let vkq = v[k * m + q];
                        v[k * m + p] = c * vkp - s * vkq;
                        v[k * m + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    if off(a) <= target {
        return Ok((0..m).map(|i| a[i * m + i]).collect());
    }
    Err(Error::NoConvergence {
        sweeps: tol::JACOBI_MAX_SWEEPS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = crate::rng::Rng::new(seed);
        let g = rng.gaussian_matrix(n);
        (&g + &g.adjoint()).scale_real(0.5)
    }

    #[test]
    fn diagonal_and_swap() {
        assert_eq!(hermitian_eigenvalues(&ComplexMatrix::diag(&[3.0, 1.0, 2.0])).unwrap(), vec![1.0, 2.0, 3.0]);
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let ev = hermitian_eigenvalues(&x).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_y_has_unit_spectrum() {
        let mut y = ComplexMatrix::zeros(2);
        y[(0, 1)] = c(0.0, -1.0);
        y[(1, 0)] = c(0.0, 1.0);
        let ev = hermitian_eigenvalues(&y).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn trace_and_residuals() {
        for (seed, n) in [(1u64, 2usize), (2, 3), (3, 5), (4, 8), (5, 16)] {
            let h = random_hermitian(n, seed);
            let (vals, vecs) = hermitian_eigen(&h).unwrap();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            let sum: f64 = vals.iter().sum();
            assert!((sum - h.trace().re).abs() < 1e-10);
            for (lambda, v) in vals.iter().zip(&vecs) {
                let hv = h.mat_vec(v);
                let r: f64 = hv.iter().zip(v).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt();
                assert!(r <= 1e-9, "residual {r} for n={n}");
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let ev = hermitian_eigenvalues(&ComplexMatrix::identity(6).scale_real(0.25)).unwrap();
        assert!(ev.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn large_matrix_converges() {
        let h = random_hermitian(64, 9);
        let ev = hermitian_eigenvalues(&h).unwrap();
        assert_eq!(ev.len(), 64);
        assert!((ev.iter().sum::<f64>() - h.trace().re).abs() < 1e-9);
    }
}
