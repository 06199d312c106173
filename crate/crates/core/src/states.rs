//! Bipartite density matrices and the state families used throughout the crate.
//!
//! A state on `dA × dB` stores its matrix with the first subsystem major:
//! element `ρ_{mμ,nν}` sits at row `m·dB + μ`, column `n·dB + ν`. With this
//! layout `kron(ρ', ρ'')` is exactly the product state `ρ' ⊗ ρ''`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigenvalues, kron, ComplexMatrix, Subsystem};
use crate::rng::Rng;
use crate::tol;

/// A validated density matrix on a two-party composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteDensityMatrix {
    da: usize,
    db: usize,
    mat: ComplexMatrix,
}

/// Defects of a candidate density matrix, measured without rejecting it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    pub hermitian_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
}

impl ValidationReport {
    /// Measures `mat` as a `da × db` state. Only a shape mismatch is an error.
    pub fn measure(da: usize, db: usize, mat: &ComplexMatrix) -> Result<Self> {
        check_dims(da, db, mat)?;
        let herm = mat.hermitian_part();
        Ok(Self {
            hermitian_defect: mat.hermitian_defect(),
            trace_defect: (mat.trace() - Complex64::new(1.0, 0.0)).norm(),
            min_eigenvalue: hermitian_eigenvalues(&herm)?[0],
        })
    }

    /// The first violated invariant, in the order Hermiticity, trace, positivity.
    pub fn check(&self, trace: f64) -> Result<()> {
        if self.hermitian_defect > tol::HERMITIAN {
            return Err(Error::NotHermitian {
                defect: self.hermitian_defect,
            });
        }
        if self.trace_defect > tol::TRACE {
            return Err(Error::TraceNotOne { trace });
        }
        if self.min_eigenvalue < tol::PSD {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: self.min_eigenvalue,
            });
        }
        Ok(())
    }
}

fn check_dims(da: usize, db: usize, mat: &ComplexMatrix) -> Result<()> {
    if da == 0 || db == 0 || da * db != mat.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{da}x{db} bipartition of a {}-dimensional matrix",
            mat.dim()
        )));
    }
    Ok(())
}

impl BipartiteDensityMatrix {
    /// Checks the density-matrix invariants and returns the state.
    ///
    /// The stored matrix is the exact Hermitian part of `mat`; a trace within
    /// [`tol::TRACE`] of one is renormalized unless it is already one to
    /// within summation roundoff.
    pub fn validate(da: usize, db: usize, mat: ComplexMatrix) -> Result<Self> {
        Self::checked(da, db, mat, true)
    }

    fn checked(da: usize, db: usize, mat: ComplexMatrix, renormalize: bool) -> Result<Self> {
        check_dims(da, db, &mat)?;
        let defect = mat.hermitian_defect();
        if defect > tol::HERMITIAN || defect.is_nan() {
            return Err(Error::NotHermitian { defect });
        }
        let mut mat = mat.hermitian_part();
        let trace = mat.trace().re;
        if (trace - 1.0).abs() > tol::TRACE {
            return Err(Error::TraceNotOne { trace });
        }
        // a trace already one up to summation roundoff is left alone so that
        // re-validating a stored state is the identity
        if renormalize && (trace - 1.0).abs() > 4.0 * f64::EPSILON * mat.dim() as f64 {
            mat = mat.scale_real(1.0 / trace);
        }
        let min_eigenvalue = hermitian_eigenvalues(&mat)?[0];
        if min_eigenvalue < tol::PSD {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
        }
        Ok(Self { da, db, mat })
    }

    /// The pure state `v v†` for a normalized amplitude vector.
    pub fn from_pure(da: usize, db: usize, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != da * db {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a {da}x{db} system",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol::NORM {
            return Err(Error::NotNormalized { norm });
        }
        Self::checked(da, db, ComplexMatrix::outer(amplitudes), false)
    }

    /// Product state `ρ' ⊗ ρ''`.
    pub fn product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Self> {
        Self::validate(a.dim(), b.dim(), kron(a, b))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.da, self.db)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Element `ρ_{mμ,nν}` by subsystem indices.
    pub fn element(&self, m: usize, mu: usize, n: usize, nu: usize) -> Complex64 {
        self.mat[(m * self.db + mu, n * self.db + nu)]
    }

    pub fn partial_trace(&self, keep: Subsystem) -> ComplexMatrix {
        linalg::partial_trace(&self.mat, self.da, self.db, keep).expect("dimensions checked at construction")
    }

    /// `trace(ρ²)`.
    pub fn purity(&self) -> f64 {
        purity(&self.mat)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat).expect("validated state is Hermitian")
    }

    /// `(U' ⊗ U'') ρ (U' ⊗ U'')†`.
    pub fn locally_rotated(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Result<Self> {
        if ua.dim() != self.da || ub.dim() != self.db {
            return Err(Error::DimensionMismatch("local unitary sizes".into()));
        }
        Self::validate(self.da, self.db, self.mat.conjugate_by(&kron(ua, ub)))
    }
}

/// `trace(m²)` for Hermitian `m`, i.e. the squared Frobenius norm.
pub fn purity(m: &ComplexMatrix) -> f64 {
    m.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// A convex mixture of product states.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub weights: Vec<f64>,
    pub factors_a: Vec<ComplexMatrix>,
    pub factors_b: Vec<ComplexMatrix>,
    /// Frobenius distance of the mixture from the state it was fitted to.
    pub residual: f64,
}

impl Decomposition {
    /// Builds a decomposition with zero residual after checking its invariants.
    pub fn new(weights: Vec<f64>, factors_a: Vec<ComplexMatrix>, factors_b: Vec<ComplexMatrix>) -> Result<Self> {
        let d = Self {
            weights,
            factors_a,
            factors_b,
            residual: 0.0,
        };
        d.check()?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        let n = self.weights.len();
        if n == 0 || self.factors_a.len() != n || self.factors_b.len() != n {
            return Err(Error::DimensionMismatch("weights and factor lists must share one nonzero length".into()));
        }
        if self.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}")));
        }
        let (da, db) = (self.factors_a[0].dim(), self.factors_b[0].dim());
        for (a, b) in self.factors_a.iter().zip(&self.factors_b) {
            if a.dim() != da || b.dim() != db {
                return Err(Error::DimensionMismatch("factor sizes differ between terms".into()));
            }
            BipartiteDensityMatrix::validate(da, 1, a.clone())?;
            BipartiteDensityMatrix::validate(1, db, b.clone())?;
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.factors_a[0].dim(), self.factors_b[0].dim())
    }

    /// `Σ_k w_k ρ'_k ⊗ ρ''_k`.
    pub fn mixture(&self) -> ComplexMatrix {
        let (da, db) = self.dims();
        let mut acc = ComplexMatrix::zeros(da * db);
        for ((w, a), b) in self.weights.iter().zip(&self.factors_a).zip(&self.factors_b) {
            acc = &acc + &kron(a, b).scale_real(*w);
        }
        acc
    }
}

/// Builds the separable state a decomposition describes.
pub fn separable_mixture(decomp: &Decomposition) -> Result<BipartiteDensityMatrix> {
    decomp.check()?;
    let (da, db) = decomp.dims();
    BipartiteDensityMatrix::validate(da, db, decomp.mixture())
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::ParameterOutOfRange { name, value });
    }
    Ok(())
}

/// The two-qubit singlet `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> BipartiteDensityMatrix {
    let mut s = ComplexMatrix::zeros(4);
    s[(1, 1)] = Complex64::new(0.5, 0.0);
    s[(2, 2)] = Complex64::new(0.5, 0.0);
    s[(1, 2)] = Complex64::new(-0.5, 0.0);
    s[(2, 1)] = Complex64::new(-0.5, 0.0);
    BipartiteDensityMatrix { da: 2, db: 2, mat: s }
}

/// Singlet fraction `x` mixed with the maximally mixed state: `x S + (1 − x) I/4`.
pub fn werner(x: f64) -> Result<BipartiteDensityMatrix> {
    check_unit_interval("x", x)?;
    let s = singlet().mat;
    let noise = ComplexMatrix::identity(4).scale_real((1.0 - x) / 4.0);
    BipartiteDensityMatrix::checked(2, 2, &s.scale_real(x) + &noise, false)
}

/// Fraction `x` of `a|01⟩ + b|10⟩` with `(1 − x)/2` each of `|00⟩` and `|11⟩`.
pub fn gisin(x: f64, a: Complex64, b: Complex64) -> Result<BipartiteDensityMatrix> {
    check_unit_interval("x", x)?;
    check_amplitudes(a, b)?;
    let mut m = ComplexMatrix::zeros(4);
    let half = Complex64::new((1.0 - x) / 2.0, 0.0);
    m[(0, 0)] = half;
    m[(3, 3)] = half;
    m[(1, 1)] = Complex64::new(x * a.norm_sqr(), 0.0);
    m[(2, 2)] = Complex64::new(x * b.norm_sqr(), 0.0);
    m[(1, 2)] = a * b.conj() * x;
    m[(2, 1)] = m[(1, 2)].conj();
    BipartiteDensityMatrix::checked(2, 2, m, false)
}

pub(crate) fn check_amplitudes(a: Complex64, b: Complex64) -> Result<()> {
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if ((a.norm_sqr() + b.norm_sqr()) - 1.0).abs() > tol::NORM {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// Singlet fraction `x` mixed with the polarized pair `|00⟩`.
pub fn singlet_polarized(x: f64) -> Result<BipartiteDensityMatrix> {
    check_unit_interval("x", x)?;
    let mut m = singlet().mat.scale_real(x);
    m[(0, 0)] = Complex64::new(1.0 - x, 0.0);
    BipartiteDensityMatrix::checked(2, 2, m, false)
}

/// A one-parameter state family with its shape parameters fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Werner,
    Gisin { a: Complex64, b: Complex64 },
    SingletPolarized,
}

impl Family {
    /// Looks up a family by name; `a`/`b` default to `1/√2` for Gisin.
    pub fn from_name(name: &str, a: Option<Complex64>, b: Option<Complex64>) -> Result<Self> {
        match name {
            "werner" => Ok(Family::Werner),
            "singlet_polarized" | "singlet-polarized" => Ok(Family::SingletPolarized),
            "gisin" => {
                let d = Complex64::new(FRAC_1_SQRT_2, 0.0);
                let (a, b) = (a.unwrap_or(d), b.unwrap_or(d));
                check_amplitudes(a, b)?;
                Ok(Family::Gisin { a, b })
            }
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Werner => "werner",
            Family::Gisin { .. } => "gisin",
            Family::SingletPolarized => "singlet_polarized",
        }
    }

    pub fn state(&self, x: f64) -> Result<BipartiteDensityMatrix> {
        match *self {
            Family::Werner => werner(x),
            Family::Gisin { a, b } => gisin(x, a, b),
            Family::SingletPolarized => singlet_polarized(x),
        }
    }
}

/// A family member: the family plus its mixing parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub x: f64,
}

impl FamilySpec {
    pub fn build(&self) -> Result<BipartiteDensityMatrix> {
        self.family.state(self.x)
    }
}

/// Random full-rank `d × d` density matrix `G G† / trace(G G†)`.
pub fn random_density(d: usize, seed: u64) -> ComplexMatrix {
    random_density_from(d, &mut Rng::new(seed))
}

pub(crate) fn random_density_from(d: usize, rng: &mut Rng) -> ComplexMatrix {
    let g = rng.gaussian_matrix(d);
    let ggd = g.matmul(&g.adjoint()).hermitian_part();
    let t = ggd.trace().re;
    ggd.scale_real(1.0 / t)
}

/// Random state on `da × db` drawn as [`random_density`] of the composite dimension.
pub fn random_state(da: usize, db: usize, seed: u64) -> BipartiteDensityMatrix {
    BipartiteDensityMatrix::validate(da, db, random_density(da * db, seed)).expect("G G† is a density matrix")
}

/// Random unitary by Gram–Schmidt on a complex Gaussian matrix.
pub(crate) fn random_unitary_from(d: usize, rng: &mut Rng) -> ComplexMatrix {
    let g = rng.gaussian_matrix(d);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v: Vec<Complex64> = (0..d).map(|i| g[(i, j)]).collect();
        // two passes keep orthogonality at roundoff level
        for _ in 0..2 {
            for q in &cols {
                let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= proj * qi);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    let mut u = ComplexMatrix::zeros(d);
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            u[(i, j)] = *z;
        }
    }
    u
}

/// A seeded pair of local unitaries `(U', U'')`.
pub fn random_local_unitary(da: usize, db: usize, seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    let mut rng = Rng::new(seed);
    let ua = random_unitary_from(da, &mut rng);
    let ub = random_unitary_from(db, &mut rng);
    (ua, ub)
}

/// Random separable mixture of `terms` product states with mixed factors.
pub fn random_decomposition(da: usize, db: usize, terms: usize, seed: u64) -> Decomposition {
    let mut rng = Rng::new(seed);
    let raw: Vec<f64> = (0..terms).map(|_| rng.uniform() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    let factors_a = (0..terms).map(|_| random_density_from(da, &mut rng)).collect();
    let factors_b = (0..terms).map(|_| random_density_from(db, &mut rng)).collect();
    Decomposition::new(weights, factors_a, factors_b).expect("random factors are density matrices")
}
