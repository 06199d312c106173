//! Eigenvalues of small Hermitian matrices from their characteristic polynomial.
//!
//! This path shares nothing with the Jacobi solver: coefficients come from the
//! Faddeev–LeVerrier recursion and roots from closed forms (quadratic formula,
//! trigonometric cubic, Ferrari's quartic). Near multiple roots the closed
//! forms lose digits, so when the discriminant of the depressed polynomial,
//! rescaled to roots of unit size, is tiny the roots are found instead by
//! bisection between the critical points, which interlace the roots of a
//! real-rooted polynomial.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::tol;

const MAX_DIM: usize = 4;
/// Threshold on the discriminant of the depressed polynomial with roots rescaled to unit size.
const ILL_CONDITIONED: f64 = 1e-10;

/// Ascending eigenvalues of a Hermitian matrix of dimension at most four.
///
/// Exact multiple eigenvalues are recovered to near machine precision. A
/// cluster of three or four eigenvalues that is close but not exactly
/// degenerate, next to a much larger one, is only as accurate as the
/// polynomial coefficients allow, roughly `(ε·‖h‖³)^{1/3}`.
pub fn charpoly_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    if h.dim() > MAX_DIM {
        return Err(Error::DimensionCapExceeded {
            dim: h.dim(),
            cap: MAX_DIM,
        });
    }
    let defect = h.hermitian_defect();
    if defect > tol::HERMITIAN || defect.is_nan() {
        return Err(Error::NotHermitian { defect });
    }
    let coeffs = characteristic_polynomial(&h.hermitian_part());
    let mut roots = real_roots(&coeffs);
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Monic coefficients `[c_0, …, c_{n−1}, 1]` of `det(λI − A)`.
pub fn characteristic_polynomial(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.dim();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = ComplexMatrix::zeros(n);
    let id = ComplexMatrix::identity(n);
    for k in 1..=n {
        m = &a.matmul(&m) + &id.scale_real(c[n - k + 1]);
        c[n - k] = -a.matmul(&m).trace().re / k as f64;
    }
    c
}

/// Roots of a monic, real-rooted polynomial of degree one to four.
fn real_roots(c: &[f64]) -> Vec<f64> {
    let roots = match c.len() - 1 {
        0 => vec![],
        1 => vec![-c[0]],
        2 => quadratic(c[1], c[0]).to_vec(),
        3 => cubic(c).unwrap_or_else(|| interlacing_roots(c)),
        4 => quartic(c).unwrap_or_else(|| interlacing_roots(c)),
        d => unreachable!("degree {d}"),
    };
    roots.into_iter().map(|x| polish(c, x)).collect()
}

/// Roots of `x² + b x + c`, assuming they are real; a slightly negative discriminant is clamped.
fn quadratic(b: f64, c: f64) -> [f64; 2] {
    let disc = (b * b - 4.0 * c).max(0.0);
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return [0.0, 0.0];
    }
    [q, c / q]
}

fn cubic(c: &[f64]) -> Option<Vec<f64>> {
    let shift = c[2] / 3.0;
    let p = c[1] - c[2] * c[2] / 3.0;
    let q = 2.0 * c[2].powi(3) / 27.0 - c[2] * c[1] / 3.0 + c[0];
    let (p, q) = (denoise(p, shift, 2), denoise(q, shift, 3));
    let scale = (p.abs().sqrt()).max(q.abs().cbrt());
    if scale == 0.0 {
        return Some(vec![-shift; 3]);
    }
    let (pn, qn) = (p / scale.powi(2), q / scale.powi(3));
    let disc = -(4.0 * pn.powi(3) + 27.0 * qn * qn);
    if disc.abs() < ILL_CONDITIONED || p >= 0.0 {
        return None;
    }
    Some(depressed_cubic_three_real(p, q).iter().map(|t| t - shift).collect())
}

/// Trigonometric roots of `t³ + p t + q` when all three are real (`p < 0`).
fn depressed_cubic_three_real(p: f64, q: f64) -> [f64; 3] {
    let r = 2.0 * (-p / 3.0).sqrt();
    let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    [0.0, 1.0, 2.0].map(|k| r * (phi - TAU * k / 3.0).cos())
}

/// Largest real root of a monic cubic `x³ + a x² + b x + c`.
fn largest_real_cubic_root(a: f64, b: f64, c: f64) -> f64 {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + c;
    let disc = q * q / 4.0 + p.powi(3) / 27.0;
    let t = if disc > 0.0 {
        // one real root: Cardano
        let s = disc.sqrt();
        (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()
    } else if p < 0.0 {
        depressed_cubic_three_real(p, q)[0]
    } else {
        (-q).cbrt()
    };
    let mut x = t - shift;
    let poly = [c, b, a, 1.0];
    for _ in 0..4 {
        let (v, d) = eval_with_derivative(&poly, x);
        if d == 0.0 {
            break;
        }
        x -= v / d;
    }
    x
}

fn quartic(c: &[f64]) -> Option<Vec<f64>> {
    let a = c[3];
    let shift = a / 4.0;
    // depressed quartic y⁴ + p y² + q y + r with x = y − a/4
    let p = c[2] - 3.0 * a * a / 8.0;
    let q = c[1] - a * c[2] / 2.0 + a.powi(3) / 8.0;
    let r = c[0] - a * c[1] / 4.0 + a * a * c[2] / 16.0 - 3.0 * a.powi(4) / 256.0;
    let (p, q, r) = (denoise(p, shift, 2), denoise(q, shift, 3), denoise(r, shift, 4));
    let scale = p.abs().sqrt().max(q.abs().cbrt()).max(r.abs().sqrt().sqrt());
    if scale == 0.0 {
        return Some(vec![-shift; 4]);
    }
    let (pn, qn, rn) = (p / scale.powi(2), q / scale.powi(3), r / scale.powi(4));
    let disc = 256.0 * rn.powi(3) - 128.0 * pn * pn * rn * rn + 144.0 * pn * qn * qn * rn - 27.0 * qn.powi(4)
        + 16.0 * pn.powi(4) * rn
        - 4.0 * pn.powi(3) * qn * qn;
    if disc.abs() < ILL_CONDITIONED {
        return None;
    }
    let ys: Vec<f64> = if q == 0.0 {
        // biquadratic
        quadratic(p, r)
            .iter()
            .flat_map(|&z| {
                let s = z.max(0.0).sqrt();
                [s, -s]
            })
            .collect()
    } else {
        // resolvent 8m³ + 8p m² + (2p² − 8r) m − q² = 0 has a positive root
        let m = largest_real_cubic_root(p, p * p / 4.0 - r, -q * q / 8.0);
        if m <= 0.0 {
            return None;
        }
        let s = (2.0 * m).sqrt();
        let k = q / (2.0 * s);
        let mut ys = quadratic(-s, p / 2.0 + m + k).to_vec();
        ys.extend(quadratic(s, p / 2.0 + m - k));
        ys
    };
    Some(ys.iter().map(|y| y - shift).collect())
}

/// Zero for a depressed coefficient of degree `k` that is pure roundoff from removing `shift`.
fn denoise(v: f64, shift: f64, k: i32) -> f64 {
    if v.abs() <= 64.0 * f64::EPSILON * shift.abs().powi(k) {
        0.0
    } else {
        v
    }
}

fn eval_with_derivative(c: &[f64], x: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut d = 0.0;
    for &ci in c.iter().rev() {
        d = d * x + v;
        v = v * x + ci;
    }
    (v, d)
}

/// Value and a rounding-error bound for Horner evaluation.
fn eval_with_noise(c: &[f64], x: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut mag = 0.0;
    for &ci in c.iter().rev() {
        v = v * x + ci;
        mag = mag * x.abs() + ci.abs();
    }
    (v, 8.0 * c.len() as f64 * f64::EPSILON * mag)
}

/// Newton steps that are kept only while they reduce `|p|`.
fn polish(c: &[f64], mut x: f64) -> f64 {
    for _ in 0..3 {
        let (v, d) = eval_with_derivative(c, x);
        if v == 0.0 || d == 0.0 {
            break;
        }
        let next = x - v / d;
        if eval_with_derivative(c, next).0.abs() < v.abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

fn derivative(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    // rescaled to stay monic
    (1..=n).map(|k| c[k] * k as f64 / n as f64).collect()
}

/// All roots of a monic real-rooted polynomial by bisection between critical points.
///
/// A critical point where `p` vanishes to within rounding is a multiple root
/// and is returned directly for each adjacent interval.
fn interlacing_roots(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    if n == 1 {
        return vec![-c[0]];
    }
    let mut crit = interlacing_roots(&derivative(c));
    crit.sort_by(f64::total_cmp);
    let bound = 1.0 + c[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut edges = vec![-bound];
    edges.extend(&crit);
    edges.push(bound);

    let at_noise = |x: f64| {
        let (v, noise) = eval_with_noise(c, x);
        v.abs() <= noise
    };
    edges
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (lo, hi) = (w[0], w[1]);
            // interior edges are critical points
            if i + 1 < edges.len() - 1 && at_noise(hi) {
                return hi;
            }
            if i > 0 && at_noise(lo) {
                return lo;
            }
            bisect(c, lo, hi)
        })
        .collect()
}

fn bisect(c: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let flo = eval_with_derivative(c, lo).0;
    let fhi = eval_with_derivative(c, hi).0;
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 || flo.signum() == fhi.signum() {
        // no bracket: the root sits on the better endpoint
        return if flo.abs() < fhi.abs() { lo } else { hi };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval_with_derivative(c, mid).0;
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::partial_transpose;
    use crate::states::{singlet, werner};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn scalar() {
        assert_eq!(charpoly_eigenvalues(&ComplexMatrix::diag(&[2.0])).unwrap(), vec![2.0]);
    }

    #[test]
    fn coefficients_of_diagonal() {
        // (λ−1)(λ−2)(λ−3) = λ³ − 6λ² + 11λ − 6
        let c = characteristic_polynomial(&ComplexMatrix::diag(&[1.0, 2.0, 3.0]));
        assert!(close(&c, &[-6.0, 11.0, -6.0, 1.0], 1e-14));
    }

    #[test]
    fn singlet_projector() {
        let ev = charpoly_eigenvalues(singlet().matrix()).unwrap();
        assert!(close(&ev, &[0.0, 0.0, 0.0, 1.0], 1e-12), "{ev:?}");
    }

    #[test]
    fn werner_partial_transpose_at_half() {
        let ev = charpoly_eigenvalues(&partial_transpose(&werner(0.5).unwrap())).unwrap();
        assert!(close(&ev, &[-0.125, 0.375, 0.375, 0.375], 1e-12), "{ev:?}");
    }

    #[test]
    fn distinct_and_repeated_spectra() {
        for diag in [
            vec![1.0, 2.0],
            vec![-1.0, 0.5, 4.0],
            vec![2.0, 2.0, 2.0],
            vec![-3.0, 0.1, 0.2, 5.0],
            vec![1.0, 1.0, 2.0, 2.0],
            vec![0.7, 0.7, 0.7, 0.7],
        ] {
            let ev = charpoly_eigenvalues(&ComplexMatrix::diag(&diag)).unwrap();
            assert!(close(&ev, &diag, 1e-10), "{diag:?} -> {ev:?}");
        }
    }

    #[test]
    fn triple_roots_keep_full_accuracy() {
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            let q = (1.0 + x) / 4.0;
            let ev = charpoly_eigenvalues(&partial_transpose(&werner(x).unwrap())).unwrap();
            assert!(close(&ev, &[(1.0 - 3.0 * x) / 4.0, q, q, q], 1e-12), "x = {x}: {ev:?}");
        }
    }

    #[test]
    fn interlacing_agrees_with_closed_forms() {
        // (x+2)(x−1)(x−3)(x−4)
        let c = [-24.0, 26.0, 3.0, -6.0, 1.0];
        let mut a = interlacing_roots(&c);
        a.sort_by(f64::total_cmp);
        let mut b = quartic(&c).unwrap();
        b.sort_by(f64::total_cmp);
        assert!(close(&a, &[-2.0, 1.0, 3.0, 4.0], 1e-12));
        assert!(close(&b, &[-2.0, 1.0, 3.0, 4.0], 1e-12));
    }

    #[test]
    fn rejects_large_and_non_hermitian() {
        assert!(matches!(
            charpoly_eigenvalues(&ComplexMatrix::identity(5)),
            Err(Error::DimensionCapExceeded { .. })
        ));
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.5, 0.0]]).unwrap();
        assert!(matches!(charpoly_eigenvalues(&m), Err(Error::NotHermitian { .. })));
    }
}
