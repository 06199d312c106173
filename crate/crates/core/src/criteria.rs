//! Inseparability tests.
//!
//! The partial-transpose test is the primary one: a negative eigenvalue of
//! `σ_{mμ,nν} = ρ_{nμ,mν}` certifies entanglement. Two weaker tests are kept
//! for comparison: the Horodecki CHSH bound for two qubits and the purity
//! (Rényi-2 entropy) inequality between the state and its marginals.
//!
//! Verdicts use an asymmetric margin ([`tol::DETECTION`]) so that roundoff
//! never flags a separable state.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, kron, permute_subsystems, ComplexMatrix, Subsystem};
use crate::states::{check_amplitudes, purity, BipartiteDensityMatrix};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Ppt,
    #[serde(rename = "chsh")]
    ChshHorodecki,
    Renyi2,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::Ppt, Criterion::ChshHorodecki, Criterion::Renyi2];

    /// Short identifier used in table headers and on the command line.
    pub fn id(&self) -> &'static str {
        match self {
            Criterion::Ppt => "ppt",
            Criterion::ChshHorodecki => "chsh",
            Criterion::Renyi2 => "renyi2",
        }
    }

    /// Detection rule applied to a witness value.
    pub fn detects(&self, witness: f64) -> bool {
        match self {
            Criterion::Ppt => witness < -tol::DETECTION,
            Criterion::ChshHorodecki => witness > 1.0 + tol::DETECTION,
            Criterion::Renyi2 => witness > tol::DETECTION,
        }
    }

    /// The same rule without the roundoff margin.
    pub fn detects_strictly(&self, witness: f64) -> bool {
        match self {
            Criterion::Ppt => witness < 0.0,
            Criterion::ChshHorodecki => witness > 1.0,
            Criterion::Renyi2 => witness > 0.0,
        }
    }

    pub fn evaluate(&self, rho: &BipartiteDensityMatrix) -> Result<CriterionReport> {
        match self {
            Criterion::Ppt => ppt_report(rho),
            Criterion::ChshHorodecki => chsh_horodecki(rho),
            Criterion::Renyi2 => Ok(renyi2_report(rho)),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ppt" => Ok(Criterion::Ppt),
            "chsh" | "chsh_horodecki" => Ok(Criterion::ChshHorodecki),
            "renyi2" => Ok(Criterion::Renyi2),
            other => Err(Error::UnknownCriterion(other.to_string())),
        }
    }
}

/// Parses a comma-separated criterion list, keeping order and dropping repeats.
pub fn parse_criteria(list: &str) -> Result<Vec<Criterion>> {
    let mut out = Vec::new();
    for item in list.split(',').filter(|s| !s.trim().is_empty()) {
        let c: Criterion = item.parse()?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("empty criteria list".into()));
    }
    Ok(out)
}

/// One criterion's verdict on one state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    /// ppt: smallest eigenvalue of σ; chsh: M(ρ); renyi2: purity excess.
    pub witness: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    pub inseparable_detected: bool,
}

impl CriterionReport {
    fn new(criterion: Criterion, witness: f64, spectrum: Option<Vec<f64>>) -> Self {
        Self {
            criterion,
            witness,
            spectrum,
            inseparable_detected: criterion.detects(witness),
        }
    }
}

/// Transposes the first-subsystem indices: `σ_{mμ,nν} = ρ_{nμ,mν}`.
///
/// This only moves entries, so applying it twice returns `ρ` bit for bit.
pub fn partial_transpose(rho: &BipartiteDensityMatrix) -> ComplexMatrix {
    let (da, db) = rho.dims();
    partial_transpose_raw(rho.matrix(), da, db)
}

pub(crate) fn partial_transpose_raw(m: &ComplexMatrix, da: usize, db: usize) -> ComplexMatrix {
    let mut sigma = ComplexMatrix::zeros(da * db);
    for mi in 0..da {
        for ni in 0..da {
            for mu in 0..db {
                for nu in 0..db {
                    sigma[(mi * db + mu, ni * db + nu)] = m[(ni * db + mu, mi * db + nu)];
                }
            }
        }
    }
    sigma
}

pub fn ppt_report(rho: &BipartiteDensityMatrix) -> Result<CriterionReport> {
    let spectrum = hermitian_eigenvalues(&partial_transpose(rho))?;
    Ok(CriterionReport::new(Criterion::Ppt, spectrum[0], Some(spectrum)))
}

fn pauli() -> [ComplexMatrix; 3] {
    let z0 = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mk = |e: [Complex64; 4]| ComplexMatrix::from_vec(2, e.to_vec()).expect("2x2 literal");
    [mk([z0, one, one, z0]), mk([z0, -i, i, z0]), mk([one, z0, z0, -one])]
}

/// Two-qubit correlation matrix `T_ij = trace(ρ (σ_i ⊗ σ_j))` over `x, y, z`.
pub fn correlation_matrix(rho: &BipartiteDensityMatrix) -> Result<[[f64; 3]; 3]> {
    if rho.dims() != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "CHSH test needs two qubits, got {:?}",
            rho.dims()
        )));
    }
    let p = pauli();
    let mut t = [[0.0; 3]; 3];
    for (i, si) in p.iter().enumerate() {
        for (j, sj) in p.iter().enumerate() {
            t[i][j] = rho.matrix().matmul(&kron(si, sj)).trace().re;
        }
    }
    Ok(t)
}

/// Horodecki test: `M(ρ)` is the sum of the two largest eigenvalues of `TᵀT`,
/// and some CHSH inequality is violated iff `M > 1`.
///
/// For the singlet mixed with `|00⟩` this gives `T = diag(−x, −x, 1 − 2x)` and
/// `M = x² + max(x², (1 − 2x)²)`, which first exceeds one at `x = 1/√2`. The
/// often quoted "Bell holds for x ≤ 0.8" domain corresponds to the
/// `x² + (1 − 2x)²` branch alone; the reported witness is always the full `M`.
pub fn chsh_horodecki(rho: &BipartiteDensityMatrix) -> Result<CriterionReport> {
    let t = correlation_matrix(rho)?;
    let mut ttt = ComplexMatrix::zeros(3);
    for i in 0..3 {
        for j in 0..3 {
            ttt[(i, j)] = Complex64::new((0..3).map(|k| t[k][i] * t[k][j]).sum(), 0.0);
        }
    }
    let ev = hermitian_eigenvalues(&ttt)?;
    Ok(CriterionReport::new(Criterion::ChshHorodecki, ev[1] + ev[2], None))
}

/// Purity comparison: separable states satisfy `trace(ρ²) ≤ trace(ρ_A²)` and
/// `trace(ρ²) ≤ trace(ρ_B²)`. The witness is `trace(ρ²) − min` of the marginal purities.
pub fn renyi2_report(rho: &BipartiteDensityMatrix) -> CriterionReport {
    let pa = purity(&rho.partial_trace(Subsystem::A));
    let pb = purity(&rho.partial_trace(Subsystem::B));
    CriterionReport::new(Criterion::Renyi2, rho.purity() - pa.min(pb), None)
}

/// The `k`-fold copy `ρ^{⊗k}` regrouped as `(A₁…A_k | B₁…B_k)`.
pub fn tensor_power(rho: &BipartiteDensityMatrix, k: usize) -> Result<BipartiteDensityMatrix> {
    if !(2..=3).contains(&k) {
        return Err(Error::InvalidArgument(format!("tensor power k = {k}, expected 2 or 3")));
    }
    let (da, db) = rho.dims();
    let dim = (da * db).pow(k as u32);
    if dim > tol::DIMENSION_CAP {
        return Err(Error::DimensionCapExceeded {
            dim,
            cap: tol::DIMENSION_CAP,
        });
    }
    let mut copies = rho.matrix().clone();
    for _ in 1..k {
        copies = kron(&copies, rho.matrix());
    }
    let dims: Vec<usize> = (0..k).flat_map(|_| [da, db]).collect();
    let perm: Vec<usize> = (0..k).map(|i| 2 * i).chain((0..k).map(|i| 2 * i + 1)).collect();
    let regrouped = permute_subsystems(&copies, &dims, &perm)?;
    BipartiteDensityMatrix::validate(da.pow(k as u32), db.pow(k as u32), regrouped)
}

/// Mixing fraction above which the Gisin state has a negative partial transpose.
pub fn gisin_ppt_threshold(a: Complex64, b: Complex64) -> Result<f64> {
    check_amplitudes(a, b)?;
    Ok(1.0 / (1.0 + 2.0 * (a * b).norm()))
}

/// Gisin's closed-form CHSH violation threshold, `[1 + 2|ab|(√2 − 1)]⁻¹`.
///
/// This is a quoted reference value; it coincides with the Horodecki-M
/// crossing only for balanced amplitudes.
pub fn gisin_bell_threshold(a: Complex64, b: Complex64) -> Result<f64> {
    check_amplitudes(a, b)?;
    Ok(1.0 / (1.0 + 2.0 * (a * b).norm() * (std::f64::consts::SQRT_2 - 1.0)))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;
    use crate::linalg::inverse_permutation;
    use crate::states::{gisin, random_density, random_state, singlet, singlet_polarized, werner};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Transpose on the second subsystem; same spectrum as σ.
    fn partial_transpose_second(rho: &BipartiteDensityMatrix) -> ComplexMatrix {
        let (da, db) = rho.dims();
        let m = rho.matrix();
        let mut out = ComplexMatrix::zeros(da * db);
        for mi in 0..da {
            for ni in 0..da {
                for mu in 0..db {
                    for nu in 0..db {
                        out[(mi * db + mu, ni * db + nu)] = m[(mi * db + nu, ni * db + mu)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn product_state_transposes_first_factor() {
        let a = random_density(2, 1);
        let b = random_density(3, 2);
        let rho = BipartiteDensityMatrix::product(&a, &b).unwrap();
        let sigma = partial_transpose(&rho);
        assert!(sigma.max_abs_diff(&kron(&a.transpose(), &b)) < 1e-15);
    }

    #[test]
    fn involution_and_exact_hermiticity() {
        for seed in 0..20 {
            let rho = random_state(2, 3, seed);
            let sigma = partial_transpose(&rho);
            assert_eq!(sigma.hermitian_defect(), 0.0);
            assert!((sigma.trace().re - 1.0).abs() < 1e-12);
            let back = partial_transpose_raw(&sigma, 2, 3);
            assert_eq!(&back, rho.matrix());
        }
    }

    #[test]
    fn maximally_mixed_is_fixed() {
        let id = BipartiteDensityMatrix::validate(2, 2, ComplexMatrix::identity(4).scale_real(0.25)).unwrap();
        assert_eq!(&partial_transpose(&id), id.matrix());
    }

    #[test]
    fn singlet_spectrum() {
        let r = ppt_report(&singlet()).unwrap();
        let spec = r.spectrum.unwrap();
        for (got, want) in spec.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(r.inseparable_detected);
    }

    #[test]
    fn second_subsystem_transpose_has_same_spectrum() {
        for seed in 0..10 {
            let rho = random_state(3, 2, seed);
            let s1 = hermitian_eigenvalues(&partial_transpose(&rho)).unwrap();
            let s2 = hermitian_eigenvalues(&partial_transpose_second(&rho)).unwrap();
            for (a, b) in s1.iter().zip(&s2) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn werner_verdicts() {
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            let r = ppt_report(&werner(x).unwrap()).unwrap();
            assert_eq!(r.inseparable_detected, x > 1.0 / 3.0, "x = {x}");
            assert!((r.witness - (1.0 - 3.0 * x) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gisin_verdicts_follow_determinant_threshold() {
        for (a, b) in [(FRAC_1_SQRT_2, FRAC_1_SQRT_2), (0.6, 0.8), (0.28, 0.96)] {
            let th = gisin_ppt_threshold(c(a, 0.0), c(b, 0.0)).unwrap();
            for x in [th - 1e-3, th + 1e-3] {
                let r = ppt_report(&gisin(x, c(a, 0.0), c(b, 0.0)).unwrap()).unwrap();
                assert_eq!(r.inseparable_detected, x > th);
            }
        }
    }

    #[test]
    fn gisin_global_phase_leaves_spectrum_unchanged() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let phase = Complex64::from_polar(1.0, 0.7);
        let s1 = ppt_report(&gisin(0.7, a, b).unwrap()).unwrap().spectrum.unwrap();
        let s2 = ppt_report(&gisin(0.7, a * phase, b * phase).unwrap()).unwrap().spectrum.unwrap();
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn singlet_polarized_witness() {
        let r = ppt_report(&singlet_polarized(0.5).unwrap()).unwrap();
        let expected = (0.5 - 0.5f64.sqrt()) / 2.0;
        assert!((r.witness - expected).abs() < 1e-14);
        assert!((r.witness + 0.10355).abs() < 1e-5);
    }

    #[test]
    fn chsh_examples() {
        let s = chsh_horodecki(&singlet()).unwrap();
        assert!((s.witness - 2.0).abs() < 1e-14);
        let t = correlation_matrix(&singlet()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { -1.0 } else { 0.0 };
                assert!((t[i][j] - want).abs() < 1e-15);
            }
        }
        let classical = BipartiteDensityMatrix::validate(2, 2, ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.5])).unwrap();
        let r = chsh_horodecki(&classical).unwrap();
        assert!((r.witness - 1.0).abs() < 1e-15);
        assert!(!r.inseparable_detected);
        let t = correlation_matrix(&classical).unwrap();
        assert_eq!(t, [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);

        for k in 0..=20 {
            let x = k as f64 / 20.0;
            let m = chsh_horodecki(&werner(x).unwrap()).unwrap().witness;
            assert!((m - 2.0 * x * x).abs() < 1e-12);
        }
        assert!(chsh_horodecki(&random_state(2, 3, 0)).is_err());
    }

    #[test]
    fn chsh_singlet_polarized_closed_form() {
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            let m = chsh_horodecki(&singlet_polarized(x).unwrap()).unwrap().witness;
            let want = x * x + (x * x).max((1.0 - 2.0 * x).powi(2));
            assert!((m - want).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn renyi2_examples() {
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            let r = renyi2_report(&werner(x).unwrap());
            assert!((r.witness - ((1.0 + 3.0 * x * x) / 4.0 - 0.5)).abs() < 1e-14);
        }
        let r = renyi2_report(&werner(0.6).unwrap());
        assert!((r.witness - 0.02).abs() < 1e-14 && r.inseparable_detected);

        for seed in 0..20 {
            let rho = BipartiteDensityMatrix::product(&random_density(2, seed), &random_density(3, seed + 50)).unwrap();
            let r = renyi2_report(&rho);
            assert!(r.witness <= 1e-14 && !r.inseparable_detected);
        }
    }

    #[test]
    fn tensor_power_basics() {
        let id = BipartiteDensityMatrix::validate(2, 2, ComplexMatrix::identity(4).scale_real(0.25)).unwrap();
        let t = tensor_power(&id, 2).unwrap();
        assert_eq!(t.dims(), (4, 4));
        assert!(t.matrix().max_abs_diff(&ComplexMatrix::identity(16).scale_real(1.0 / 16.0)) < 1e-15);

        let w = tensor_power(&werner(0.2).unwrap(), 2).unwrap();
        assert!(ppt_report(&w).unwrap().witness >= -1e-10);

        assert!(matches!(tensor_power(&random_state(3, 3, 1), 2), Err(Error::DimensionCapExceeded { .. })));
        assert!(tensor_power(&id, 4).is_err());
        assert_eq!(tensor_power(&id, 3).unwrap().dims(), (8, 8));
    }

    #[test]
    fn transpose_of_copies_is_copy_of_transposes() {
        for seed in 0..5 {
            let rho = random_state(2, 2, seed);
            let sigma2 = partial_transpose(&tensor_power(&rho, 2).unwrap());
            // regroup (A1 A2 | B1 B2) back to (A1 B1)(A2 B2)
            let perm = [0, 2, 1, 3];
            let back = permute_subsystems(&sigma2, &[2, 2, 2, 2], &inverse_permutation(&perm)).unwrap();
            let sigma = partial_transpose(&rho);
            assert!(back.max_abs_diff(&kron(&sigma, &sigma)) <= 1e-14);
        }
    }

    #[test]
    fn gisin_bell_threshold_examples() {
        let r = c(FRAC_1_SQRT_2, 0.0);
        assert!((gisin_bell_threshold(r, r).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(gisin_bell_threshold(c(1.0, 0.0), c(0.0, 0.0)).unwrap(), 1.0);
        let v = gisin_bell_threshold(c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        assert!((v - 1.0 / (1.0 + 0.96 * (2f64.sqrt() - 1.0))).abs() < 1e-15);
        assert!((v - 0.715_489_26).abs() < 1e-8);
        assert!(gisin_bell_threshold(c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn criteria_parsing() {
        assert_eq!(
            parse_criteria("ppt,chsh,renyi2").unwrap(),
            vec![Criterion::Ppt, Criterion::ChshHorodecki, Criterion::Renyi2]
        );
        assert_eq!(parse_criteria("chsh_horodecki,ppt,ppt").unwrap().len(), 2);
        assert!(parse_criteria("ppt,bogus").is_err());
        assert!(parse_criteria("").is_err());
    }
}
