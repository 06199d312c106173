//! Nonnegative least squares (Lawson–Hanson active set).

use crate::linalg::real::solve_in_place;

/// Minimizes `‖A w − b‖₂` subject to `w ≥ 0`.
///
/// `columns` holds the columns of `A`, each of length `b.len()`.
pub(crate) fn nnls(columns: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = columns.len();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, c)| a * c).sum::<f64>();
    let gram: Vec<f64> = (0..n * n).map(|k| dot(&columns[k / n], &columns[k % n])).collect();
    let atb: Vec<f64> = columns.iter().map(|c| dot(c, b)).collect();
    let scale = atb.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let ridge = 1e-14 * (0..n).map(|i| gram[i * n + i]).fold(0.0f64, f64::max);

    let mut w = vec![0.0; n];
    let mut passive = vec![false; n];
    let gradient = |w: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| atb[i] - (0..n).map(|j| gram[i * n + j] * w[j]).sum::<f64>())
            .collect()
    };
    // unconstrained solve restricted to the passive set
    let solve_passive = |passive: &[bool]| -> Vec<f64> {
        let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
        let m = idx.len();
        let mut a = vec![0.0; m * m];
        let mut rhs: Vec<f64> = idx.iter().map(|&i| atb[i]).collect();
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[r * m + c] = gram[i * n + j] + if r == c { ridge } else { 0.0 };
            }
        }
        let mut s = vec![0.0; n];
        if solve_in_place(&mut a, &mut rhs, m) {
            for (r, &i) in idx.iter().enumerate() {
                s[i] = rhs[r];
            }
        }
        s
    };

    for _ in 0..3 * n + 10 {
        let g = gradient(&w);
        let Some(t) = (0..n)
            .filter(|&i| !passive[i] && g[i] > 1e-13 * scale)
            .max_by(|&x, &y| g[x].total_cmp(&g[y]))
        else {
            break;
        };
        passive[t] = true;
        for _ in 0..3 * n + 10 {
            let s = solve_passive(&passive);
            if (0..n).filter(|&i| passive[i]).all(|i| s[i] > 0.0) {
                w = s;
                break;
            }
            let alpha = (0..n)
                .filter(|&i| passive[i] && s[i] <= 0.0)
                .map(|i| w[i] / (w[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            for i in 0..n {
                w[i] += alpha * (s[i] - w[i]);
                if passive[i] && w[i] <= 1e-15 {
                    passive[i] = false;
                    w[i] = 0.0;
                }
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_nonnegative_solution() {
        let cols = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 1.0]];
        let b = vec![1.5, 2.0, 0.5];
        let w = nnls(&cols, &b);
        for (got, want) in w.iter().zip([1.0, 1.5, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn clamps_negative_directions() {
        // unconstrained optimum is w = (2, -1); the constrained one drops the second column
        let cols = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let b = vec![1.0, -1.0];
        let w = nnls(&cols, &b);
        assert!((w[0] - 1.0).abs() < 1e-12);
        assert_eq!(w[1], 0.0);
    }

    #[test]
    fn all_negative_target_gives_zero() {
        let cols = vec![vec![1.0, 1.0]];
        assert_eq!(nnls(&cols, &[-1.0, -2.0]), vec![0.0]);
    }
}
