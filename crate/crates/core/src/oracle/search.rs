//! Randomized search for a separable decomposition `ρ = Σ_k w_k |a_k⟩⟨a_k| ⊗ |b_k⟩⟨b_k|`.
//!
//! Each restart fits `K` product vectors `z_k = u_k ⊗ v_k` (weights absorbed
//! into the norms) so that `Σ_k z_k z_k†` matches `ρ` in Frobenius norm.
//! Local refinement is Levenberg–Marquardt on the real and imaginary parts of
//! the factor vectors. When it stalls, a simulated-annealing kick re-draws one
//! term and re-fits all weights by nonnegative least squares; the kick is
//! kept by the Metropolis rule. A restart that keeps stalling is abandoned.
//!
//! Success is a constructive certificate of separability. Failure proves
//! nothing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::nnls::nnls;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::real::solve_in_place;
use crate::linalg::{kron_vec, ComplexMatrix};
use crate::rng::Rng;
use crate::states::{BipartiteDensityMatrix, Decomposition};

/// Largest composite dimension the searcher accepts.
pub const SEARCH_DIMENSION_CAP: usize = 9;

const STALL_WINDOW: usize = 60;
const STALL_RATIO: f64 = 0.999;
const MAX_KICKS: usize = 8;
const MERGE_FIDELITY: f64 = 1.0 - 1e-4;
const POLISH_ITERATIONS: usize = 300;
const DROP_POLISH_ITERATIONS: usize = 60;
const DROP_ATTEMPTS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Mixture terms per restart; `None` uses `(dA·dB)²`.
    pub max_terms: Option<usize>,
    pub restarts: usize,
    pub iterations: usize,
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_terms: None,
            restarts: 32,
            iterations: 5000,
            residual_tol: 1e-6,
            seed: 0,
        }
    }
}

impl SearchConfig {
    fn check(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidArgument("residual_tol must be positive".into()));
        }
        if self.max_terms == Some(0) || self.restarts == 0 || self.iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_terms, restarts and iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn terms_for(&self, da: usize, db: usize) -> usize {
        self.max_terms.unwrap_or((da * db) * (da * db))
    }
}

/// Result of a search, including diagnostics when nothing was found.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub decomposition: Option<Decomposition>,
    /// Index of the restart that produced the decomposition.
    pub restart: Option<usize>,
    /// Smallest Frobenius residual reached over all restarts that were run.
    pub best_residual: f64,
}

/// Looks for a separable decomposition of `rho`; `None` after the budget is spent.
pub fn search_decomposition(rho: &BipartiteDensityMatrix, cfg: &SearchConfig) -> Result<Option<Decomposition>> {
    Ok(search(rho, cfg, Execution::default())?.decomposition)
}

/// Runs the restarts under `exec` and reports the lowest-index success.
///
/// Restarts draw from independent seeded streams, so the outcome does not
/// depend on how they are scheduled.
pub fn search(rho: &BipartiteDensityMatrix, cfg: &SearchConfig, exec: Execution) -> Result<SearchOutcome> {
    cfg.check()?;
    let (da, db) = rho.dims();
    if da * db > SEARCH_DIMENSION_CAP {
        return Err(Error::DimensionCapExceeded {
            dim: da * db,
            cap: SEARCH_DIMENSION_CAP,
        });
    }
    let runs = exec.map_indexed(cfg.restarts, |i| run_restart(rho, cfg, i));
    let best_residual = runs.iter().map(|r| r.residual()).fold(f64::INFINITY, f64::min);
    let found = runs.into_iter().enumerate().find_map(|(i, r)| match r {
        RestartResult::Found(d) => Some((i, d)),
        RestartResult::Stalled(_) => None,
    });
    Ok(match found {
        Some((i, d)) => SearchOutcome {
            decomposition: Some(d),
            restart: Some(i),
            best_residual,
        },
        None => SearchOutcome {
            decomposition: None,
            restart: None,
            best_residual,
        },
    })
}

enum RestartResult {
    Found(Decomposition),
    Stalled(f64),
}

impl RestartResult {
    fn residual(&self) -> f64 {
        match self {
            RestartResult::Found(d) => d.residual,
            RestartResult::Stalled(r) => *r,
        }
    }
}

/// Factor vectors of every term, packed as `[Re u, Im u, Re v, Im v]` per term.
#[derive(Clone)]
struct Terms {
    da: usize,
    db: usize,
    params: Vec<f64>,
}

impl Terms {
    fn stride(&self) -> usize {
        2 * (self.da + self.db)
    }

    fn len(&self) -> usize {
        self.params.len() / self.stride()
    }

    fn factors(&self, k: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let s = &self.params[k * self.stride()..(k + 1) * self.stride()];
        let (da, db) = (self.da, self.db);
        let u = (0..da).map(|i| Complex64::new(s[i], s[da + i])).collect();
        let v = (0..db)
            .map(|i| Complex64::new(s[2 * da + i], s[2 * da + db + i]))
            .collect();
        (u, v)
    }

    fn set_factors(&mut self, k: usize, u: &[Complex64], v: &[Complex64]) {
        let (da, db) = (self.da, self.db);
        let stride = self.stride();
        let s = &mut self.params[k * stride..(k + 1) * stride];
        for i in 0..da {
            s[i] = u[i].re;
            s[da + i] = u[i].im;
        }
        for i in 0..db {
            s[2 * da + i] = v[i].re;
            s[2 * da + db + i] = v[i].im;
        }
    }

    fn select(&self, keep: &[usize]) -> Terms {
        let stride = self.stride();
        Terms {
            da: self.da,
            db: self.db,
            params: keep
                .iter()
                .flat_map(|&k| self.params[k * stride..(k + 1) * stride].iter().copied())
                .collect(),
        }
    }

    fn product_vector(&self, k: usize) -> Vec<Complex64> {
        let (u, v) = self.factors(k);
        kron_vec(&u, &v)
    }

    /// `Σ_k z_k z_k† − ρ` flattened as interleaved real and imaginary parts.
    fn residual(&self, rho: &ComplexMatrix) -> Vec<f64> {
        let d = rho.dim();
        let mut r: Vec<f64> = rho.as_slice().iter().flat_map(|z| [-z.re, -z.im]).collect();
        for k in 0..self.len() {
            let z = self.product_vector(k);
            for p in 0..d {
                for q in 0..d {
                    let m = z[p] * z[q].conj();
                    r[2 * (p * d + q)] += m.re;
                    r[2 * (p * d + q) + 1] += m.im;
                }
            }
        }
        r
    }

    /// Jacobian of [`Terms::residual`], one column per real parameter.
    fn jacobian(&self, d: usize) -> Vec<Vec<f64>> {
        let (da, db) = (self.da, self.db);
        let mut cols = Vec::with_capacity(self.params.len());
        for k in 0..self.len() {
            let (u, v) = self.factors(k);
            let z = kron_vec(&u, &v);
            let mut push = |dz: Vec<Complex64>| {
                let mut col = vec![0.0; 2 * d * d];
                for p in 0..d {
                    for q in 0..d {
                        let m = dz[p] * z[q].conj() + z[p] * dz[q].conj();
                        col[2 * (p * d + q)] = m.re;
                        col[2 * (p * d + q) + 1] = m.im;
                    }
                }
                cols.push(col);
            };
            for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                for i in 0..da {
                    let mut du = vec![Complex64::new(0.0, 0.0); da];
                    du[i] = unit;
                    push(kron_vec(&du, &v));
                }
            }
            for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                for i in 0..db {
                    let mut dv = vec![Complex64::new(0.0, 0.0); db];
                    dv[i] = unit;
                    push(kron_vec(&u, &dv));
                }
            }
        }
        cols
    }

    /// Normalized factors and their weights `|u|²|v|²`.
    fn normalized(&self) -> Vec<(f64, Vec<Complex64>, Vec<Complex64>)> {
        (0..self.len())
            .map(|k| {
                let (mut u, mut v) = self.factors(k);
                let nu = norm(&u);
                let nv = norm(&v);
                if nu > 0.0 {
                    u.iter_mut().for_each(|x| *x /= nu);
                }
                if nv > 0.0 {
                    v.iter_mut().for_each(|x| *x /= nv);
                }
                (nu * nu * nv * nv, u, v)
            })
            .collect()
    }

    /// Re-fits the weights of the current product directions by NNLS.
    ///
    /// Weights are floored at `floor` so that no term collapses to the origin,
    /// where the model has zero gradient.
    fn refit_weights(&mut self, rho: &ComplexMatrix, floor: f64) {
        let d = rho.dim();
        let parts = self.normalized();
        let columns: Vec<Vec<f64>> = parts
            .iter()
            .map(|(_, u, v)| {
                let z = kron_vec(u, v);
                let mut col = vec![0.0; 2 * d * d];
                for p in 0..d {
                    for q in 0..d {
                        let m = z[p] * z[q].conj();
                        col[2 * (p * d + q)] = m.re;
                        col[2 * (p * d + q) + 1] = m.im;
                    }
                }
                col
            })
            .collect();
        let target: Vec<f64> = rho.as_slice().iter().flat_map(|z| [z.re, z.im]).collect();
        let w = nnls(&columns, &target);
        for (k, (_, u, v)) in parts.iter().enumerate() {
            let s = w[k].max(floor).sqrt();
            let su: Vec<Complex64> = u.iter().map(|x| x * s).collect();
            self.set_factors(k, &su, v);
        }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Levenberg–Marquardt state for one restart.
struct Fit<'a> {
    rho: &'a ComplexMatrix,
    terms: Terms,
    cost: f64,
    lambda: f64,
}

impl<'a> Fit<'a> {
    fn new(rho: &'a ComplexMatrix, terms: Terms) -> Self {
        let cost = sum_sq(&terms.residual(rho));
        Self {
            rho,
            terms,
            cost,
            lambda: 1e-3,
        }
    }

    fn residual_norm(&self) -> f64 {
        self.cost.sqrt()
    }

    /// One damped Gauss–Newton step; returns whether it was accepted.
    ///
    /// The step is taken in the row space, `δ = −Jᵀ (J Jᵀ + λI)⁻¹ r`, since
    /// there are more parameters than residual components.
    fn step(&mut self) -> bool {
        let d = self.rho.dim();
        let r = self.terms.residual(self.rho);
        let cols = self.terms.jacobian(d);
        let m = r.len();
        let mut jjt = vec![0.0; m * m];
        for col in &cols {
            for (a, &ca) in col.iter().enumerate() {
                if ca == 0.0 {
                    continue;
                }
                let row = &mut jjt[a * m..(a + 1) * m];
                for (b, &cb) in col.iter().enumerate() {
                    row[b] += ca * cb;
                }
            }
        }
        let diag_scale = (0..m).map(|i| jjt[i * m + i]).sum::<f64>() / m as f64;
        for _ in 0..8 {
            let mut a = jjt.clone();
            for i in 0..m {
                a[i * m + i] += self.lambda * diag_scale.max(1e-300);
            }
            let mut y = r.clone();
            if !solve_in_place(&mut a, &mut y, m) {
                self.lambda *= 10.0;
                continue;
            }
            let mut trial = self.terms.clone();
            for (p, col) in trial.params.iter_mut().zip(&cols) {
                *p -= col.iter().zip(&y).map(|(c, yi)| c * yi).sum::<f64>();
            }
            let cost = sum_sq(&trial.residual(self.rho));
            if cost < self.cost {
                self.terms = trial;
                self.cost = cost;
                self.lambda = (self.lambda / 3.0).max(1e-15);
                return true;
            }
            self.lambda = (self.lambda * 4.0).min(1e12);
        }
        false
    }
}

fn run_restart(rho: &BipartiteDensityMatrix, cfg: &SearchConfig, index: usize) -> RestartResult {
    let (da, db) = rho.dims();
    let target = rho.matrix();
    let k = cfg.terms_for(da, db);
    let mut rng = Rng::derived(cfg.seed, index as u64);
    let floor = 0.1 / k as f64;

    let mut terms = Terms {
        da,
        db,
        params: vec![0.0; k * 2 * (da + db)],
    };
    for t in 0..k {
        terms.set_factors(t, &rng.unit_vector(da), &rng.unit_vector(db));
    }
    terms.refit_weights(target, floor);

    let goal = 0.5 * cfg.residual_tol;
    let mut fit = Fit::new(target, terms);
    let mut best = fit.cost;
    let mut window_start = fit.cost;
    let mut kicks = 0;
    let mut temperature = 0.05;

    for it in 1..=cfg.iterations {
        if fit.residual_norm() <= goal {
            break;
        }
        fit.step();
        best = best.min(fit.cost);
        if it % STALL_WINDOW != 0 {
            continue;
        }
        if best < STALL_RATIO * window_start {
            window_start = best;
            continue;
        }
        if kicks == MAX_KICKS {
            break;
        }
        kicks += 1;
        // annealing kick: redraw one term, re-fit weights, Metropolis acceptance
        let mut candidate = fit.terms.clone();
        let victim = rng.below(k);
        candidate.set_factors(victim, &rng.unit_vector(da), &rng.unit_vector(db));
        candidate.refit_weights(target, floor);
        let cand_cost = sum_sq(&candidate.residual(target));
        let delta = (cand_cost - fit.cost) / fit.cost.max(1e-300);
        if delta <= 0.0 || rng.uniform() < (-delta / temperature).exp() {
            fit = Fit::new(target, candidate);
        }
        temperature *= 0.7;
        window_start = fit.cost;
        best = fit.cost;
    }

    if fit.residual_norm() > goal {
        return RestartResult::Stalled(fit.residual_norm());
    }
    match finalize(target, &fit.terms, cfg.residual_tol) {
        Some(d) => RestartResult::Found(d),
        None => RestartResult::Stalled(fit.residual_norm()),
    }
}

/// Turns converged factor vectors into a [`Decomposition`].
///
/// Weights are re-fitted without the floor, near-identical product
/// directions merged, and then terms are dropped one at a time, smallest
/// first, for as long as a short re-polish still meets the goal.
fn finalize(rho: &ComplexMatrix, terms: &Terms, tol: f64) -> Option<Decomposition> {
    let goal = 0.5 * tol;
    let mut best = terms.clone();
    if let Some(t) = polish(rho, sparsify(rho, terms), goal, POLISH_ITERATIONS) {
        best = t;
    }
    if let Some(t) = merge(&best).and_then(|c| polish(rho, c, goal, POLISH_ITERATIONS)) {
        best = t;
    }
    let mut attempts = 0;
    'drop: while best.len() > 1 && attempts < DROP_ATTEMPTS {
        let parts = best.normalized();
        let mut order: Vec<usize> = (0..parts.len()).collect();
        order.sort_by(|&a, &b| parts[a].0.total_cmp(&parts[b].0));
        for victim in order {
            attempts += 1;
            let keep: Vec<usize> = (0..best.len()).filter(|&k| k != victim).collect();
            let candidate = sparsify(rho, &best.select(&keep));
            if let Some(t) = polish(rho, candidate, goal, DROP_POLISH_ITERATIONS) {
                best = t;
                continue 'drop;
            }
            if attempts == DROP_ATTEMPTS {
                break;
            }
        }
        break;
    }
    assemble(rho, &best, tol).or_else(|| assemble(rho, terms, tol))
}

/// Re-fits weights with no floor and removes the terms NNLS switched off.
fn sparsify(rho: &ComplexMatrix, terms: &Terms) -> Terms {
    let mut t = terms.clone();
    t.refit_weights(rho, 0.0);
    let keep: Vec<usize> = t
        .normalized()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.0 > 0.0)
        .map(|(k, _)| k)
        .collect();
    if keep.is_empty() {
        return terms.clone();
    }
    t.select(&keep)
}

/// LM iterations until the residual reaches `goal`; `None` if it does not.
fn polish(rho: &ComplexMatrix, terms: Terms, goal: f64, iterations: usize) -> Option<Terms> {
    let mut fit = Fit::new(rho, terms);
    for _ in 0..iterations {
        if fit.residual_norm() <= goal {
            break;
        }
        if !fit.step() && fit.lambda >= 1e12 {
            break;
        }
    }
    (fit.residual_norm() <= goal).then_some(fit.terms)
}

/// Merges near-identical product directions; `None` if nothing changes.
fn merge(terms: &Terms) -> Option<Terms> {
    let parts = terms.normalized();
    let mut kept: Vec<(f64, Vec<Complex64>, Vec<Complex64>)> = Vec::new();
    for (w, u, v) in parts.iter().cloned() {
        let same = kept.iter_mut().find(|(_, ku, kv)| {
            let fu = inner(ku, &u).norm_sqr();
            let fv = inner(kv, &v).norm_sqr();
            fu * fv >= MERGE_FIDELITY
        });
        match same {
            Some(entry) => entry.0 += w,
            None => kept.push((w, u, v)),
        }
    }
    if kept.len() == parts.len() {
        return None;
    }
    let mut out = Terms {
        da: terms.da,
        db: terms.db,
        params: vec![0.0; kept.len() * terms.stride()],
    };
    for (k, (w, u, v)) in kept.iter().enumerate() {
        let su: Vec<Complex64> = u.iter().map(|x| x * w.sqrt()).collect();
        out.set_factors(k, &su, v);
    }
    Some(out)
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn assemble(rho: &ComplexMatrix, terms: &Terms, tol: f64) -> Option<Decomposition> {
    let parts: Vec<_> = terms.normalized().into_iter().filter(|p| p.0 > 0.0).collect();
    let total: f64 = parts.iter().map(|p| p.0).sum();
    if parts.is_empty() || !(total > 0.0) {
        return None;
    }
    let weights: Vec<f64> = parts.iter().map(|p| p.0 / total).collect();
    let factors_a = parts.iter().map(|p| ComplexMatrix::outer(&p.1)).collect();
    let factors_b = parts.iter().map(|p| ComplexMatrix::outer(&p.2)).collect();
    let mut d = Decomposition {
        weights,
        factors_a,
        factors_b,
        residual: 0.0,
    };
    d.residual = (rho - &d.mixture()).frobenius_norm();
    (d.residual <= tol && d.check().is_ok()).then_some(d)
}
