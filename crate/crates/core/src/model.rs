//! Parametric families and the generic Fisher-information machinery.
//!
//! A [`ModelFamily`] supplies `log p(y | θ)`, a sampler and, optionally,
//! analytic scores and Fisher matrices. Everything else here (scores by
//! finite differences, expectations, the two Fisher definitions) is derived
//! from that surface.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{diff, linalg, Error, Result};

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    pub const POSITIVE: Interval = Interval { lo: 0.0, hi: f64::INFINITY };
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

/// Product of open intervals, one per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain(Vec<Interval>);

impl Domain {
    pub fn new(intervals: Vec<Interval>) -> Self {
        Domain(intervals)
    }

    pub fn real(k: usize) -> Self {
        Domain(alloc::vec![Interval::REAL; k])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.0
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.0.len() && self.0.iter().zip(theta).all(|(iv, &x)| iv.contains(x))
    }

    /// Length and interiority check; boundary points are errors, never clamped.
    pub fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.0.len() {
            return Err(Error::DimensionMismatch { expected: self.0.len(), got: theta.len() });
        }
        for (index, (iv, &value)) in self.0.iter().zip(theta).enumerate() {
            if !iv.contains(value) {
                return Err(Error::Domain { index, value, lo: iv.lo, hi: iv.hi });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSpace {
    Finite { size: usize },
    Countable,
    Continuous { dim: usize },
}

/// A regular parametric family `{ p(y | θ) : θ ∈ Ω }`.
pub trait ModelFamily {
    type Obs: Clone;

    fn dim(&self) -> usize;

    fn domain(&self) -> Domain;

    fn log_density(&self, y: &Self::Obs, theta: &[f64]) -> f64;

    fn sample<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Self::Obs;

    fn sample_space(&self) -> SampleSpace;

    /// Every point of a finite sample space.
    fn enumerate(&self) -> Option<Vec<Self::Obs>> {
        None
    }

    /// A deterministic rule `(y_i, w_i)` with `Σ w_i f(y_i) ≈ E_θ[f(y)]` for
    /// smooth `f`, used for continuous families instead of Monte Carlo.
    fn quadrature(&self, _theta: &[f64]) -> Option<Vec<(Self::Obs, f64)>> {
        None
    }

    fn analytic_score(&self, _y: &Self::Obs, _theta: &[f64]) -> Option<DVector<f64>> {
        None
    }

    fn analytic_fisher(&self, _theta: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    fn kl_closed_form(&self, _theta: &[f64], _other: &[f64]) -> Option<f64> {
        None
    }
}

/// Observed data `y_1, …, y_n` with `n ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<O> {
    observations: Vec<O>,
}

impl<O> Dataset<O> {
    pub fn new(observations: Vec<O>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidArgument("dataset must contain at least one observation"));
        }
        Ok(Dataset { observations })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[O] {
        &self.observations
    }

    pub fn iter(&self) -> core::slice::Iter<'_, O> {
        self.observations.iter()
    }
}

/// Largest finite sample space that is summed exactly.
pub const MAX_ENUMERATION: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationConfig {
    pub draws: usize,
    pub seed: u64,
    /// Skip enumeration and quadrature even when available.
    pub force_monte_carlo: bool,
}

impl Default for ExpectationConfig {
    fn default() -> Self {
        ExpectationConfig { draws: 1_000_000, seed: 0x5eed, force_monte_carlo: false }
    }
}

impl ExpectationConfig {
    pub fn monte_carlo(draws: usize, seed: u64) -> Self {
        ExpectationConfig { draws, seed, force_monte_carlo: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectationMethod {
    Enumeration,
    Quadrature,
    MonteCarlo { draws: usize },
}

/// Expectation of a vector-valued function, with a standard error when it
/// was estimated by Monte Carlo.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean: DVector<f64>,
    pub std_error: Option<DVector<f64>>,
    pub method: ExpectationMethod,
}

/// `E_θ[f(y)]` by enumeration, the family's quadrature rule, or seeded Monte
/// Carlo, in that order of preference.
pub fn expectation<M, F>(model: &M, theta: &[f64], cfg: &ExpectationConfig, mut f: F) -> Result<Estimate>
where
    M: ModelFamily,
    F: FnMut(&M::Obs) -> Result<DVector<f64>>,
{
    model.domain().check(theta)?;
    if !cfg.force_monte_carlo {
        if let SampleSpace::Finite { size } = model.sample_space() {
            if size <= MAX_ENUMERATION {
                if let Some(points) = model.enumerate() {
                    let mut acc: Option<DVector<f64>> = None;
                    for y in &points {
                        let lp = model.log_density(y, theta);
                        if lp == f64::NEG_INFINITY {
                            continue;
                        }
                        if !lp.is_finite() {
                            return Err(Error::NonFinite);
                        }
                        let v = f(y)? * lp.exp();
                        acc = Some(match acc {
                            Some(a) => a + v,
                            None => v,
                        });
                    }
                    let mean = acc.ok_or(Error::InvalidArgument("empty sample space"))?;
                    return Ok(Estimate { mean, std_error: None, method: ExpectationMethod::Enumeration });
                }
            }
        }
        if let Some(rule) = model.quadrature(theta) {
            let mut acc: Option<DVector<f64>> = None;
            for (y, w) in &rule {
                let v = f(y)? * *w;
                acc = Some(match acc {
                    Some(a) => a + v,
                    None => v,
                });
            }
            let mean = acc.ok_or(Error::InvalidArgument("empty quadrature rule"))?;
            return Ok(Estimate { mean, std_error: None, method: ExpectationMethod::Quadrature });
        }
    }
    if cfg.draws < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least two draws"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mean: Option<DVector<f64>> = None;
    let mut m2: Option<DVector<f64>> = None;
    for i in 0..cfg.draws {
        let y = model.sample(theta, &mut rng);
        let v = f(&y)?;
        match (&mut mean, &mut m2) {
            (Some(mu), Some(s)) => {
                let delta = &v - &*mu;
                *mu += &delta / (i as f64 + 1.0);
                let delta2 = &v - &*mu;
                *s += delta.component_mul(&delta2);
            }
            _ => {
                m2 = Some(DVector::zeros(v.len()));
                mean = Some(v);
            }
        }
    }
    let n = cfg.draws as f64;
    let mean = mean.unwrap_or_else(|| DVector::zeros(0));
    let se = m2.unwrap_or_else(|| DVector::zeros(0)).map(|s| (s / (n - 1.0) / n).sqrt());
    Ok(Estimate { mean, std_error: Some(se), method: ExpectationMethod::MonteCarlo { draws: cfg.draws } })
}

fn finite_log_density<M: ModelFamily>(model: &M, y: &M::Obs, theta: &[f64]) -> Result<f64> {
    let lp = model.log_density(y, theta);
    if lp.is_finite() {
        Ok(lp)
    } else {
        Err(Error::NonFinite)
    }
}

/// `∂ log p(y | θ) / ∂θ`, analytic when the family provides it.
pub fn score<M: ModelFamily>(model: &M, theta: &[f64], y: &M::Obs) -> Result<DVector<f64>> {
    model.domain().check(theta)?;
    finite_log_density(model, y, theta)?;
    if let Some(s) = model.analytic_score(y, theta) {
        return Ok(s);
    }
    diff::gradient(|t| finite_log_density(model, y, t), theta)
}

/// Hessian of `log p(y | θ)` by central differences, of the analytic score
/// when there is one.
pub fn log_density_hessian<M: ModelFamily>(model: &M, theta: &[f64], y: &M::Obs) -> Result<DMatrix<f64>> {
    if model.analytic_score(y, theta).is_some() {
        let h = diff::jacobian_richardson(
            |t| {
                model.domain().check(t)?;
                model.analytic_score(y, t).ok_or(Error::NonFinite)
            },
            theta,
        )?;
        return Ok(linalg::symmetrize(&h));
    }
    diff::hessian(|t| finite_log_density(model, y, t), theta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherEstimate {
    pub matrix: DMatrix<f64>,
    pub std_error: Option<DMatrix<f64>>,
    pub method: ExpectationMethod,
    /// Smallest eigenvalue below `1e-10` times the largest.
    pub rank_deficient: bool,
}

fn to_matrix(k: usize, v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(k, k, v.as_slice())
}

/// Fisher information as the expected outer product of scores.
pub fn numeric_fisher<M: ModelFamily>(model: &M, theta: &[f64], cfg: &ExpectationConfig) -> Result<FisherEstimate> {
    let k = model.dim();
    let est = expectation(model, theta, cfg, |y| {
        let s = score(model, theta, y)?;
        let outer = &s * s.transpose();
        Ok(DVector::from_column_slice(outer.as_slice()))
    })?;
    let matrix = linalg::symmetrize(&to_matrix(k, &est.mean));
    let std_error = est.std_error.as_ref().map(|se| to_matrix(k, se));
    let rank_deficient = linalg::is_rank_deficient(&matrix);
    Ok(FisherEstimate { matrix, std_error, method: est.method, rank_deficient })
}

/// Comparison of `E[s sᵀ]` against `−E[∂² log p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub outer_product: DMatrix<f64>,
    pub negative_hessian: DMatrix<f64>,
    pub max_deviation: f64,
    pub method: ExpectationMethod,
}

pub fn check_identity<M: ModelFamily>(model: &M, theta: &[f64], cfg: &ExpectationConfig) -> Result<IdentityReport> {
    let k = model.dim();
    let outer = numeric_fisher(model, theta, cfg)?;
    let est = expectation(model, theta, cfg, |y| {
        let h = log_density_hessian(model, theta, y)?;
        Ok(DVector::from_column_slice((-h).as_slice()))
    })?;
    let negative_hessian = linalg::symmetrize(&to_matrix(k, &est.mean));
    let max_deviation = (&outer.matrix - &negative_hessian).abs().max();
    Ok(IdentityReport { outer_product: outer.matrix, negative_hessian, max_deviation, method: est.method })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_rejects_boundary_and_length() {
        let d = Domain::new(alloc::vec![Interval::REAL, Interval::POSITIVE]);
        assert!(d.check(&[0.0, 1.0]).is_ok());
        assert!(matches!(d.check(&[0.0, 0.0]), Err(Error::Domain { index: 1, .. })));
        assert!(matches!(d.check(&[0.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn dataset_must_be_nonempty() {
        assert!(Dataset::<f64>::new(alloc::vec![]).is_err());
        assert_eq!(Dataset::new(alloc::vec![1.0, 2.0]).unwrap().len(), 2);
    }
}
