//! Dense complex matrices and the handful of operations the criteria need.
//!
//! Matrices are square and stored row-major. Composite spaces follow the
//! first-factor-major convention used by [`kron`]: for factor dimensions
//! `d_1, …, d_k` the multi-index `(i_1, …, i_k)` maps to
//! `((i_1 · d_2 + i_2) · d_3 + …) · d_k + i_k`.

mod eigen;
pub(crate) mod real;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eigen::hermitian_eigenvalues;

/// A `dim × dim` matrix of complex scalars.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting bad lengths and non-finite values.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("matrix dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                row: k / dim,
                col: k % dim,
            });
        }
        Ok(Self { dim, data })
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Builds a matrix from nested real rows; handy for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            data.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self::from_vec(dim, data)
    }

    /// The projector `v v†`.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |h[i,j] - conj(h[j,i])|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(h + h†) / 2`. The result is exactly Hermitian in floating point.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `u · self · u†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
                .unwrap();
            if a[pivot * n + col].norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= f * v;
                }
            }
        }
        det
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product: entry `(i·db + k, j·db + l)` is `a[i,j] · b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let n = da * db;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            for k in 0..db {
                let row = (i * db + k) * n + j * db;
                for l in 0..db {
                    out.data[row + l] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn kron_vec(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    u.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect()
}

/// Which side of a bipartition to keep (or act on).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of an operator on a `da × db` composite space.
///
/// Keeping `A` sums over the second index, keeping `B` over the first.
pub fn partial_trace(m: &ComplexMatrix, da: usize, db: usize, keep: Subsystem) -> Result<ComplexMatrix> {
    if da * db != m.dim {
        return Err(Error::DimensionMismatch(format!(
            "{da}x{db} bipartition of a {}-dimensional matrix",
            m.dim
        )));
    }
    let out = match keep {
        Subsystem::A => {
            let mut r = ComplexMatrix::zeros(da);
            for i in 0..da {
                for j in 0..da {
                    r[(i, j)] = (0..db).map(|mu| m[(i * db + mu, j * db + mu)]).sum();
                }
            }
            r
        }
        Subsystem::B => {
            let mut r = ComplexMatrix::zeros(db);
            for mu in 0..db {
                for nu in 0..db {
                    r[(mu, nu)] = (0..da).map(|i| m[(i * db + mu, i * db + nu)]).sum();
                }
            }
            r
        }
    };
    Ok(out)
}

fn check_permutation(dims: &[usize], perm: &[usize]) -> Result<()> {
    if dims.len() != perm.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} factors but a permutation of length {}",
            dims.len(),
            perm.len()
        )));
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::DimensionMismatch(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}

/// Inverse of a permutation given as an index list.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Reorders the tensor factors of `m`.
///
/// `dims` lists the factor dimensions of the input. Factor `k` of the output
/// is factor `perm[k]` of the input, on both the row and column multi-index.
pub fn permute_subsystems(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    check_permutation(dims, perm)?;
    let total: usize = dims.iter().product();
    if total != m.dim {
        return Err(Error::DimensionMismatch(format!(
            "factor dimensions {dims:?} multiply to {total}, matrix is {}",
            m.dim
        )));
    }
    let map = permuted_index_map(dims, perm);
    let n = m.dim;
    let mut out = ComplexMatrix::zeros(n);
    for (i_out, &i_in) in map.iter().enumerate() {
        for (j_out, &j_in) in map.iter().enumerate() {
            out.data[i_out * n + j_out] = m.data[i_in * n + j_in];
        }
    }
    Ok(out)
}

/// For every output composite index, the input composite index it reads from.
fn permuted_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let k = dims.len();
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut in_strides = vec![1usize; k];
    for f in (0..k.saturating_sub(1)).rev() {
        in_strides[f] = in_strides[f + 1] * dims[f + 1];
    }
    let total: usize = dims.iter().product();
    let mut digits = vec![0usize; k];
    let mut map = Vec::with_capacity(total);
    for _ in 0..total {
        map.push(
            digits
                .iter()
                .zip(perm)
                .map(|(&d, &p)| d * in_strides[p])
                .sum(),
        );
        // odometer increment over the output digits, last factor fastest
        for f in (0..k).rev() {
            digits[f] += 1;
            if digits[f] < out_dims[f] {
                break;
            }
            digits[f] = 0;
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(dim: usize, salt: f64) -> ComplexMatrix {
        let data = (0..dim * dim)
            .map(|k| {
                let t = k as f64 + salt;
                c((1.3 * t).sin(), (0.7 * t + 0.2).cos())
            })
            .collect();
        ComplexMatrix::from_vec(dim, data).unwrap()
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)), ComplexMatrix::identity(4));
        let p = ComplexMatrix::diag(&[1.0, 0.0]);
        assert_eq!(kron(&p, &p), ComplexMatrix::diag(&[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_matches_quadruple_loop() {
        let a = sample(2, 0.1);
        let b = sample(2, 5.3);
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 2 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_of_unequal_sizes() {
        let a = sample(2, 1.0);
        let b = sample(3, 2.0);
        let k = kron(&a, &b);
        assert_eq!(k.dim(), 6);
        // row m·3 + μ with (m, μ) = (1, 2); column (n, ν) = (0, 1)
        assert_eq!(k[(5, 1)], a[(1, 0)] * b[(2, 1)]);
        assert!((k.trace() - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn from_vec_rejects_bad_input() {
        assert!(matches!(ComplexMatrix::from_vec(2, vec![c(0.0, 0.0); 3]), Err(Error::DimensionMismatch(_))));
        let mut v = vec![c(0.0, 0.0); 4];
        v[3] = c(f64::NAN, 0.0);
        assert_eq!(ComplexMatrix::from_vec(2, v), Err(Error::NonFinite { row: 1, col: 1 }));
    }

    #[test]
    fn partial_trace_of_product() {
        let a = sample(2, 0.3);
        let b = sample(3, 1.7);
        let k = kron(&a, &b);
        let ta = partial_trace(&k, 2, 3, Subsystem::A).unwrap();
        let tb = partial_trace(&k, 2, 3, Subsystem::B).unwrap();
        assert!(ta.max_abs_diff(&a.scale(b.trace())) < 1e-12);
        assert!(tb.max_abs_diff(&b.scale(a.trace())) < 1e-12);
        assert!(partial_trace(&k, 2, 2, Subsystem::A).is_err());
    }

    #[test]
    fn permutation_identity_and_swap() {
        let a = sample(2, 0.5);
        let b = sample(3, 0.9);
        let ab = kron(&a, &b);
        assert_eq!(permute_subsystems(&ab, &[2, 3], &[0, 1]).unwrap(), ab);
        assert_eq!(permute_subsystems(&ab, &[2, 3], &[1, 0]).unwrap(), kron(&b, &a));
    }

    #[test]
    fn permutation_round_trip_is_exact() {
        let m = sample(8, 0.25);
        let perm = [2, 0, 1];
        let p = permute_subsystems(&m, &[2, 2, 2], &perm).unwrap();
        let out_dims: Vec<usize> = perm.iter().map(|&i| [2, 2, 2][i]).collect();
        let back = permute_subsystems(&p, &out_dims, &inverse_permutation(&perm)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn permutation_of_three_factors() {
        let (a, b, cc) = (sample(2, 0.1), sample(3, 0.2), sample(2, 0.3));
        let abc = kron(&kron(&a, &b), &cc);
        let p = permute_subsystems(&abc, &[2, 3, 2], &[2, 0, 1]).unwrap();
        // products associate differently, so only roundoff-level agreement
        assert!(p.max_abs_diff(&kron(&kron(&cc, &a), &b)) < 1e-15);
    }

    #[test]
    fn permutation_errors() {
        let m = sample(4, 0.0);
        assert!(permute_subsystems(&m, &[2, 3], &[0, 1]).is_err());
        assert!(permute_subsystems(&m, &[2, 2], &[0, 0]).is_err());
        assert!(permute_subsystems(&m, &[2, 2], &[0]).is_err());
    }

    #[test]
    fn determinant_of_triangular() {
        let m = ComplexMatrix::from_real_rows(&[&[2.0, 1.0, 0.0], &[0.0, 3.0, 5.0], &[0.0, 0.0, -1.0]]).unwrap();
        assert!((m.determinant() - c(-6.0, 0.0)).norm() < 1e-14);
        let swapped = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(swapped.determinant(), c(-1.0, 0.0));
    }

    #[test]
    fn hermitian_part_is_exactly_hermitian() {
        let h = sample(5, 3.3).hermitian_part();
        assert_eq!(h.hermitian_defect(), 0.0);
        assert_eq!(h, h.adjoint());
    }
}
