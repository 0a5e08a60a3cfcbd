//! Maximum likelihood by gradient ascent, Newton-Raphson or Fisher scoring,
//! and the Riemannian volume element behind Jeffreys' prior.
//!
//! All three schemes take the step `θ ← θ + α C(θ) ∇ℓ(θ)` with `C` equal to
//! the identity, `−H⁻¹` or `g⁻¹`, starting from `α = α₀` and halving until
//! the log-likelihood does not decrease.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::cef::CurvedExpFamily;
use crate::families::{MultinomialFamily, Normal1D, RaschTest};
use crate::metric::FisherMetric;
use crate::model::{self, Dataset, Domain};
use crate::quad::adaptive_simpson_fallible;
use crate::{diff, linalg, Error, MetricField, ModelFamily, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    GradientAscent,
    NewtonRaphson,
    FisherScoring,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Initial step `α₀` of each iteration.
    pub step: f64,
    pub tol_grad: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { method: Method::FisherScoring, step: 1.0, tol_grad: 1e-10, max_iter: 500, max_halvings: 30 }
    }
}

impl OptimizerConfig {
    pub fn with_method(method: Method) -> Self {
        OptimizerConfig { method, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol_grad > 0.0) || self.max_iter == 0 || !(self.step > 0.0) {
            return Err(Error::InvalidArgument("optimizer needs tol_grad > 0, step > 0 and max_iter ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
    /// Iterations where `H` or `g` could not be used and a gradient step was taken.
    pub fallback_steps: usize,
}

/// Relative loglik change treated as rounding noise during step acceptance.
const ROUNDING: f64 = 16.0 * f64::EPSILON;

/// A log-likelihood surface.
pub trait Likelihood {
    fn dim(&self) -> usize;

    fn domain(&self) -> Domain;

    fn loglik(&self, theta: &[f64]) -> Result<f64>;

    fn gradient(&self, theta: &[f64]) -> Result<DVector<f64>> {
        diff::gradient(|t| self.loglik(t), theta)
    }

    fn hessian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        diff::hessian(|t| self.loglik(t), theta)
    }

    /// Expected information of the whole sample.
    fn information(&self, theta: &[f64]) -> Result<DMatrix<f64>>;
}

/// Independent observations from a [`ModelFamily`].
pub struct IidLikelihood<'a, M: ModelFamily> {
    pub model: &'a M,
    pub data: &'a Dataset<M::Obs>,
}

impl<M: ModelFamily> Likelihood for IidLikelihood<'_, M> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn domain(&self) -> Domain {
        self.model.domain()
    }

    fn loglik(&self, theta: &[f64]) -> Result<f64> {
        self.model.domain().check(theta)?;
        let s: f64 = self.data.iter().map(|y| self.model.log_density(y, theta)).sum();
        if s.is_finite() {
            Ok(s)
        } else {
            Err(Error::NonFinite)
        }
    }

    fn gradient(&self, theta: &[f64]) -> Result<DVector<f64>> {
        let mut g = DVector::zeros(self.dim());
        for y in self.data.iter() {
            g += model::score(self.model, theta, y)?;
        }
        Ok(g)
    }

    fn hessian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let k = self.dim();
        let mut h = DMatrix::zeros(k, k);
        for y in self.data.iter() {
            h += model::log_density_hessian(self.model, theta, y)?;
        }
        Ok(h)
    }

    fn information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        Ok(FisherMetric::new(self.model).metric(theta)? * self.data.len() as f64)
    }
}

/// A curved exponential family, summarized by its sufficient statistic.
pub struct CefLikelihood<'a, C> {
    pub spec: &'a C,
    pub stat: DVector<f64>,
    pub carrier: f64,
}

impl<'a, C: CurvedExpFamily> CefLikelihood<'a, C> {
    pub fn new(spec: &'a C, data: &C::Data) -> Result<Self> {
        Ok(CefLikelihood { spec, stat: spec.suff_stat(data)?, carrier: spec.log_carrier(data) })
    }

    fn residual(&self, theta: &[f64]) -> Result<(DVector<f64>, DVector<f64>)> {
        self.spec.domain().check(theta)?;
        let eta = self.spec.eta(theta)?;
        let r = &self.stat - self.spec.log_partition_gradient(&eta)?;
        Ok((eta, r))
    }
}

impl<C: CurvedExpFamily> Likelihood for CefLikelihood<'_, C> {
    fn dim(&self) -> usize {
        self.spec.q()
    }

    fn domain(&self) -> Domain {
        self.spec.domain()
    }

    fn loglik(&self, theta: &[f64]) -> Result<f64> {
        self.spec.domain().check(theta)?;
        let eta = self.spec.eta(theta)?;
        let l = eta.dot(&self.stat) - self.spec.log_partition(&eta)? + self.carrier;
        if l.is_finite() {
            Ok(l)
        } else {
            Err(Error::NonFinite)
        }
    }

    /// `η̇ᵀ (t − ∇Ψ)`.
    fn gradient(&self, theta: &[f64]) -> Result<DVector<f64>> {
        let (_, r) = self.residual(theta)?;
        Ok(self.spec.eta_jacobian(theta)?.transpose() * r)
    }

    /// `η̈_abᵀ (t − ∇Ψ) − (η̇ᵀ ∇²Ψ η̇)_ab`.
    fn hessian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let q = self.dim();
        let (_, r) = self.residual(theta)?;
        let second = self.spec.eta_hessians(theta)?;
        let info = self.information(theta)?;
        Ok(DMatrix::from_fn(q, q, |a, b| second[a * q + b].dot(&r) - info[(a, b)]))
    }

    fn information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let eta = self.spec.eta(theta)?;
        let j = self.spec.eta_jacobian(theta)?;
        Ok(linalg::symmetrize(&(j.transpose() * self.spec.log_partition_hessian(&eta)? * j)))
    }
}

/// Search direction `C(θ) ∇ℓ(θ)` and whether the gradient fallback was used.
pub fn step_direction<L: Likelihood>(lik: &L, theta: &[f64], method: Method) -> Result<(DVector<f64>, bool)> {
    let grad = lik.gradient(theta)?;
    let candidate = match method {
        Method::GradientAscent => return Ok((grad, false)),
        Method::NewtonRaphson => lik.hessian(theta).and_then(|h| linalg::lu_solve(&(-h), &grad)),
        Method::FisherScoring => lik.information(theta).and_then(|g| linalg::spd_solve(&g, &grad)),
    };
    match candidate {
        Ok(d) if d.iter().all(|x| x.is_finite()) && d.dot(&grad) > 0.0 => Ok((d, false)),
        _ => Ok((grad, true)),
    }
}

/// Maximize `lik` from `start`.
pub fn fit<L: Likelihood>(lik: &L, start: &[f64], cfg: &OptimizerConfig) -> Result<FitResult> {
    cfg.validate()?;
    if start.len() != lik.dim() {
        return Err(Error::DimensionMismatch { expected: lik.dim(), got: start.len() });
    }
    let domain = lik.domain();
    domain.check(start)?;
    let mut theta = DVector::from_column_slice(start);
    let mut ll = lik.loglik(start)?;
    let mut grad_norm = lik.gradient(start)?.norm();
    let mut fallback_steps = 0;
    let mut iterations = 0;
    while grad_norm > cfg.tol_grad && iterations < cfg.max_iter {
        iterations += 1;
        let (dir, fell_back) = step_direction(lik, theta.as_slice(), cfg.method)?;
        fallback_steps += usize::from(fell_back);
        let mut alpha = cfg.step;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let cand = &theta + &dir * alpha;
            if domain.contains(cand.as_slice()) {
                if let Ok(l) = lik.loglik(cand.as_slice()) {
                    // Near the optimum changes drown in rounding; then require
                    // that the step has not passed the maximum along `dir`.
                    let flat = l >= ll - ROUNDING * ll.abs().max(1.0)
                        && lik.gradient(cand.as_slice()).is_ok_and(|g| g.dot(&dir) >= 0.0);
                    if l >= ll || flat {
                        accepted = Some((cand, l));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some((cand, l)) = accepted else {
            break;
        };
        theta = cand;
        ll = l;
        grad_norm = lik.gradient(theta.as_slice())?.norm();
    }
    Ok(FitResult {
        theta: theta.iter().copied().collect(),
        loglik: ll,
        iterations,
        converged: grad_norm <= cfg.tol_grad,
        grad_norm,
        fallback_steps,
    })
}

/// Families with a default starting value for maximum likelihood.
pub trait StartingValue: ModelFamily {
    fn start(&self, data: &Dataset<Self::Obs>) -> Vec<f64>;
}

impl StartingValue for Normal1D {
    /// Sample mean and standard deviation.
    fn start(&self, data: &Dataset<f64>) -> Vec<f64> {
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let var = data.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
        alloc::vec![mean, if var > 0.0 { var.sqrt() } else { 1.0 }]
    }
}

impl StartingValue for RaschTest {
    fn start(&self, _data: &Dataset<Vec<u8>>) -> Vec<f64> {
        alloc::vec![0.0]
    }
}

impl StartingValue for MultinomialFamily {
    /// Observed proportions, pulled toward uniform so every cell is positive.
    fn start(&self, data: &Dataset<Vec<u32>>) -> Vec<f64> {
        let m = self.categories();
        let total = data.len() as f64 * f64::from(self.trials());
        let mut counts = alloc::vec![0.5; m];
        for y in data.iter() {
            for (c, &v) in counts.iter_mut().zip(y) {
                *c += f64::from(v);
            }
        }
        let denom = total + 0.5 * m as f64;
        counts[..m - 1].iter().map(|c| c / denom).collect()
    }
}

/// Maximum likelihood for i.i.d. data from the family's default start.
pub fn fit_mle<M: StartingValue>(model: &M, data: &Dataset<M::Obs>, cfg: &OptimizerConfig) -> Result<FitResult> {
    fit(&IidLikelihood { model, data }, &model.start(data), cfg)
}

/// Maximum likelihood for i.i.d. data from a given start.
pub fn fit_mle_from<M: ModelFamily>(
    model: &M,
    data: &Dataset<M::Obs>,
    start: &[f64],
    cfg: &OptimizerConfig,
) -> Result<FitResult> {
    fit(&IidLikelihood { model, data }, start, cfg)
}

/// Maximum likelihood for a curved exponential family.
pub fn fit_cef<C: CurvedExpFamily>(spec: &C, data: &C::Data, cfg: &OptimizerConfig) -> Result<FitResult> {
    fit(&CefLikelihood::new(spec, data)?, &spec.start(data), cfg)
}

/// `g(θ)⁻¹ ∇ℓ`, the steepest-ascent direction on the manifold.
pub fn natural_gradient_direction<G: MetricField>(g: &G, theta: &[f64], gradient: &DVector<f64>) -> Result<DVector<f64>> {
    linalg::spd_solve(&g.metric(theta)?, gradient)
}

/// `√det g(θ)`.
pub fn volume_element<G: MetricField>(g: &G, theta: &[f64]) -> Result<f64> {
    let m = g.metric(theta)?;
    let chol = linalg::symmetrize(&m).cholesky().ok_or(Error::Singular("metric is not positive definite"))?;
    let l = chol.l();
    let v: f64 = (0..m.nrows()).map(|i| l[(i, i)]).product();
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Singular("metric is not positive definite"))
    }
}

/// Unnormalized Jeffreys density `√det g(θ)`.
pub fn jeffreys_prior<G: MetricField>(g: &G, theta: &[f64]) -> Result<f64> {
    volume_element(g, theta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JeffreysNormalization {
    /// Extrapolated total volume, when the prior is proper.
    pub constant: Option<f64>,
    pub proper: bool,
    /// Volume of each box in the expanding sequence.
    pub box_volumes: Vec<f64>,
}

/// Number of boxes tried before giving up on detecting divergence.
pub const JEFFREYS_BOXES: usize = 12;

/// Box `j` of the exhausting sequence: bounded sides shrink their margin by
/// a factor 4 per step, half-lines and lines double.
fn jeffreys_box(domain: &Domain, j: usize) -> Vec<(f64, f64)> {
    let grow = 2f64.powi(j as i32);
    let margin = 4f64.powi(-(j as i32));
    domain
        .intervals()
        .iter()
        .map(|iv| match (iv.lo.is_finite(), iv.hi.is_finite()) {
            (true, true) => {
                let w = iv.hi - iv.lo;
                (iv.lo + w * margin, iv.hi - w * margin)
            }
            (true, false) => (iv.lo + 1.0 / grow, iv.lo + grow),
            (false, true) => (iv.hi - grow, iv.hi - 1.0 / grow),
            (false, false) => (-grow, grow),
        })
        .collect()
}

fn integrate_box<F: Fn(&[f64]) -> Result<f64>>(f: &F, bounds: &[(f64, f64)], prefix: &[f64], tol: f64) -> Result<f64> {
    let depth = prefix.len();
    if depth == bounds.len() {
        return f(prefix);
    }
    let (lo, hi) = bounds[depth];
    let r = adaptive_simpson_fallible(
        |x| {
            let mut p = prefix.to_vec();
            p.push(x);
            integrate_box(f, bounds, &p, tol)
        },
        lo,
        hi,
        tol,
    )?;
    Ok(r.value)
}

/// Normalizing constant of Jeffreys' prior over the whole domain, or a flag
/// that it is improper. Volumes are computed on an expanding sequence of
/// boxes; three consecutive growth ratios above 1.5 mark divergence,
/// otherwise the sequence is Aitken-extrapolated.
pub fn jeffreys_normalization<G: MetricField>(g: &G, domain: &Domain, tol: f64) -> Result<JeffreysNormalization> {
    if domain.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: domain.dim() });
    }
    let f = |t: &[f64]| volume_element(g, t);
    let mut vols: Vec<f64> = Vec::with_capacity(JEFFREYS_BOXES);
    for j in 1..=JEFFREYS_BOXES {
        let b = jeffreys_box(domain, j);
        vols.push(integrate_box(&f, &b, &[], tol)?);
        let n = vols.len();
        if n >= 4 && (n - 3..n).all(|i| vols[i] > 1.5 * vols[i - 1]) {
            return Ok(JeffreysNormalization { constant: None, proper: false, box_volumes: vols });
        }
    }
    let n = vols.len();
    let (a, b, c) = (vols[n - 3], vols[n - 2], vols[n - 1]);
    let denom = (c - b) - (b - a);
    let constant = if denom.abs() > f64::EPSILON * c.abs() { c - (c - b) * (c - b) / denom } else { c };
    Ok(JeffreysNormalization { constant: Some(constant), proper: true, box_volumes: vols })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::Cfa3;
    use crate::metric::{pullback_metric, Chart, Euclidean, FnMetric};
    use crate::model::Interval;
    use core::f64::consts::{PI, SQRT_2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn normal_data() -> Dataset<f64> {
        Dataset::new(alloc::vec![1.2, -0.3, 2.5, 0.7, 1.9, 0.1, -1.1, 3.0]).unwrap()
    }

    #[test]
    fn normal_mle_is_closed_form_for_every_method() {
        let data = normal_data();
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let sd = (data.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n).sqrt();
        for method in [Method::GradientAscent, Method::NewtonRaphson, Method::FisherScoring] {
            let mut cfg = OptimizerConfig::with_method(method);
            cfg.max_iter = 5000;
            let r = fit_mle_from(&Normal1D, &data, &[0.0, 1.0], &cfg).unwrap();
            assert!(r.converged, "{method:?}: {r:?}");
            assert!((r.theta[0] - mean).abs() < 1e-8 && (r.theta[1] - sd).abs() < 1e-8, "{method:?}");
        }
        let r = fit_mle(&Normal1D, &data, &OptimizerConfig::default()).unwrap();
        assert!(r.converged && r.iterations <= 1);
    }

    #[test]
    fn rasch_scoring_equals_newton() {
        let test = RaschTest::new(alloc::vec![-1.0, 0.0, 0.5, 1.2]).unwrap();
        let data = Dataset::new(alloc::vec![alloc::vec![1, 1, 0, 1]]).unwrap();
        let lik = IidLikelihood { model: &test, data: &data };
        for &t in &[-1.0, 0.0, 0.8, 2.0] {
            let (fs, _) = step_direction(&lik, &[t], Method::FisherScoring).unwrap();
            let (nr, _) = step_direction(&lik, &[t], Method::NewtonRaphson).unwrap();
            assert!((fs[0] - nr[0]).abs() < 1e-10 * fs[0].abs().max(1.0), "θ={t}");
        }
        let r = fit_mle(&test, &data, &OptimizerConfig::default()).unwrap();
        assert!(r.converged);
        let expected: f64 = test.probs(r.theta[0]).iter().sum();
        assert!((expected - 3.0).abs() < 1e-9);
    }

    #[test]
    fn loglik_is_nondecreasing() {
        let data = normal_data();
        let lik = IidLikelihood { model: &Normal1D, data: &data };
        let mut prev = lik.loglik(&[5.0, 0.2]).unwrap();
        let mut start = alloc::vec![5.0, 0.2];
        for _ in 0..20 {
            let cfg = OptimizerConfig { max_iter: 1, ..OptimizerConfig::with_method(Method::NewtonRaphson) };
            let r = fit(&lik, &start, &cfg).unwrap();
            assert!(r.loglik >= prev - 1e-13 * prev.abs());
            prev = r.loglik;
            start = r.theta;
        }
    }

    #[test]
    fn cfa_large_sample_is_consistent() {
        let spec = Cfa3::new(5000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = spec.simulate(&[1.0, 1.0, 1.0], &mut rng);
        let r = fit_cef(&spec, &data, &OptimizerConfig::default()).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.theta.iter().all(|t| (t - 1.0).abs() < 0.05), "{:?}", r.theta);
    }

    #[test]
    fn cef_hessian_matches_finite_differences() {
        let spec = Cfa3::new(40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = spec.simulate(&[0.8, 1.2, 0.9], &mut rng);
        let lik = CefLikelihood::new(&spec, &data).unwrap();
        let th = [0.9, 1.1, 1.0];
        let h = lik.hessian(&th).unwrap();
        let fd = diff::hessian(|t| lik.loglik(t), &th).unwrap();
        assert!((h - &fd).abs().max() < 1e-4 * fd.abs().max());
    }

    #[test]
    fn natural_gradient_examples() {
        let grad = DVector::from_vec(alloc::vec![1.0, 1.0]);
        let e = natural_gradient_direction(&Euclidean(2), &[0.3, 0.4], &grad).unwrap();
        assert_eq!(e, grad);
        let n = natural_gradient_direction(&FisherMetric::new(&Normal1D), &[0.0, 2.0], &grad).unwrap();
        assert!((n - DVector::from_vec(alloc::vec![4.0, 2.0])).abs().max() < 1e-12);
    }

    #[test]
    fn natural_gradient_commutes_with_linear_charts() {
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.5, 3.0]);
        let binv = b.clone().try_inverse().unwrap();
        let binv2 = binv.clone();
        let theta = DVector::from_vec(alloc::vec![0.4, 1.5]);
        let phi = &b * &theta;
        let chart = Chart::new(2, move |p| Ok(&binv2 * DVector::from_column_slice(p)));
        let pb = pullback_metric(FisherMetric::new(&Normal1D), chart).unwrap();
        let grad_theta = DVector::from_vec(alloc::vec![0.7, -0.2]);
        let grad_phi = binv.transpose() * &grad_theta;
        let step_theta = natural_gradient_direction(&FisherMetric::new(&Normal1D), theta.as_slice(), &grad_theta).unwrap();
        let step_phi = natural_gradient_direction(&pb, phi.as_slice(), &grad_phi).unwrap();
        assert!((binv * step_phi - step_theta).abs().max() < 1e-8);
    }

    #[test]
    fn volume_element_examples() {
        let s = 1.7;
        let v = volume_element(&FisherMetric::new(&Normal1D), &[0.2, s]).unwrap();
        assert!((v - SQRT_2 / (s * s)).abs() < 1e-14);
        assert_eq!(volume_element(&Euclidean(3), &[0.0; 3]).unwrap(), 1.0);
        let chart = Chart::new(2, |p| Ok(DVector::from_vec(alloc::vec![p[0], p[1].exp()])));
        let pb = pullback_metric(FisherMetric::new(&Normal1D), chart).unwrap();
        let w = volume_element(&pb, &[0.2, s.ln()]).unwrap();
        assert!((w - s * SQRT_2 / (s * s)).abs() < 1e-8);
        let singular = FnMetric::new(2, |_| Ok(DMatrix::zeros(2, 2)));
        assert!(volume_element(&singular, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn bernoulli_jeffreys_normalizes_to_pi() {
        let g = FnMetric::new(1, |p: &[f64]| Ok(DMatrix::from_element(1, 1, 1.0 / (p[0] * (1.0 - p[0])))));
        let r = jeffreys_normalization(&g, &Domain::new(alloc::vec![Interval::UNIT]), 1e-11).unwrap();
        assert!(r.proper);
        assert!((r.constant.unwrap() - PI).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn normal_jeffreys_is_improper() {
        let r = jeffreys_normalization(&FisherMetric::new(&Normal1D), &Normal1D.domain(), 1e-8).unwrap();
        assert!(!r.proper && r.constant.is_none());
        let j = jeffreys_prior(&FisherMetric::new(&Normal1D), &[3.0, 0.5]).unwrap();
        assert!((j - SQRT_2 / 0.25).abs() < 1e-12);
    }

    #[test]
    fn jeffreys_transforms_as_a_density() {
        // Bernoulli in π versus the logit chart
        let g = FnMetric::new(1, |p: &[f64]| Ok(DMatrix::from_element(1, 1, 1.0 / (p[0] * (1.0 - p[0])))));
        let item = RaschTest::equal(1).unwrap();
        for &eta in &[-2.0, 0.0, 1.3] {
            let pi = crate::families::rasch::logistic(eta);
            let in_logit = jeffreys_prior(&FisherMetric::new(&item), &[eta]).unwrap();
            let transformed = jeffreys_prior(&g, &[pi]).unwrap() * pi * (1.0 - pi);
            assert!((in_logit - transformed).abs() < 1e-8);
        }
    }
}
