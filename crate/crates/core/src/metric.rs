//! Metric fields `θ ↦ g(θ)` and the adapters used to build them.

use alloc::boxed::Box;
use nalgebra::{DMatrix, DVector};

use crate::model::{numeric_fisher, ExpectationConfig, ModelFamily};
use crate::{diff, linalg, Error, Result};

/// A symmetric positive-definite matrix field on a coordinate chart.
pub trait MetricField {
    fn dim(&self) -> usize;

    fn metric(&self, theta: &[f64]) -> Result<DMatrix<f64>>;
}

impl<T: MetricField + ?Sized> MetricField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn metric(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        (**self).metric(theta)
    }
}

impl<T: MetricField + ?Sized> MetricField for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn metric(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        (**self).metric(theta)
    }
}

/// The identity metric on `ℝ^k`.
#[derive(Debug, Clone, Copy)]
pub struct Euclidean(pub usize);

impl MetricField for Euclidean {
    fn dim(&self) -> usize {
        self.0
    }

    fn metric(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        if theta.len() != self.0 {
            return Err(Error::DimensionMismatch { expected: self.0, got: theta.len() });
        }
        Ok(DMatrix::identity(self.0, self.0))
    }
}

/// Metric given by a closure.
pub struct FnMetric<F> {
    dim: usize,
    f: F,
}

impl<F> FnMetric<F>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnMetric { dim, f }
    }
}

impl<F> MetricField for FnMetric<F>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: theta.len() });
        }
        (self.f)(theta)
    }
}

/// Fisher metric of a model family: the analytic matrix when the family
/// supplies one, otherwise [`numeric_fisher`].
pub struct FisherMetric<'a, M> {
    model: &'a M,
    cfg: ExpectationConfig,
    prefer_analytic: bool,
}

impl<'a, M: ModelFamily> FisherMetric<'a, M> {
    pub fn new(model: &'a M) -> Self {
        FisherMetric { model, cfg: ExpectationConfig::default(), prefer_analytic: true }
    }

    /// Always go through the score outer product, ignoring analytic forms.
    pub fn numeric(model: &'a M, cfg: ExpectationConfig) -> Self {
        FisherMetric { model, cfg, prefer_analytic: false }
    }
}

impl<M: ModelFamily> MetricField for FisherMetric<'_, M> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn metric(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.model.domain().check(theta)?;
        if self.prefer_analytic {
            if let Some(g) = self.model.analytic_fisher(theta) {
                return Ok(g);
            }
        }
        Ok(numeric_fisher(self.model, theta, &self.cfg)?.matrix)
    }
}

/// `factor · g(θ)`; the metric of `n` i.i.d. observations is `Scaled(g, n)`.
pub struct Scaled<G> {
    pub base: G,
    pub factor: f64,
}

impl<G: MetricField> Scaled<G> {
    pub fn new(base: G, factor: f64) -> Self {
        Scaled { base, factor }
    }
}

impl<G: MetricField> MetricField for Scaled<G> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn metric(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.base.metric(theta)? * self.factor)
    }
}

type VecMap = Box<dyn Fn(&[f64]) -> Result<DVector<f64>>>;
type MatMap = Box<dyn Fn(&[f64]) -> Result<DMatrix<f64>>>;

/// A change of coordinates `φ ↦ θ(φ)`, optionally with its analytic
/// Jacobian `∂θ/∂φ` and inverse `θ ↦ φ(θ)`.
pub struct Chart {
    dim: usize,
    to_base: VecMap,
    jacobian: Option<MatMap>,
    from_base: Option<VecMap>,
}

impl Chart {
    pub fn new<F>(dim: usize, to_base: F) -> Self
    where
        F: Fn(&[f64]) -> Result<DVector<f64>> + 'static,
    {
        Chart { dim, to_base: Box::new(to_base), jacobian: None, from_base: None }
    }

    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&[f64]) -> Result<DMatrix<f64>> + 'static,
    {
        self.jacobian = Some(Box::new(jacobian));
        self
    }

    pub fn with_inverse<F>(mut self, from_base: F) -> Self
    where
        F: Fn(&[f64]) -> Result<DVector<f64>> + 'static,
    {
        self.from_base = Some(Box::new(from_base));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_base(&self, phi: &[f64]) -> Result<DVector<f64>> {
        (self.to_base)(phi)
    }

    pub fn from_base(&self, theta: &[f64]) -> Result<DVector<f64>> {
        match &self.from_base {
            Some(f) => f(theta),
            None => Err(Error::InvalidArgument("chart has no inverse map")),
        }
    }

    /// `∂θ/∂φ`, analytic if supplied, else central differences.
    pub fn jacobian(&self, phi: &[f64]) -> Result<DMatrix<f64>> {
        match &self.jacobian {
            Some(j) => j(phi),
            None => diff::jacobian(|p| (self.to_base)(p), phi),
        }
    }

    /// The identity chart on `ℝ^k`.
    pub fn identity(dim: usize) -> Self {
        Chart::new(dim, |p| Ok(DVector::from_column_slice(p)))
            .with_jacobian(move |_| Ok(DMatrix::identity(dim, dim)))
            .with_inverse(|t| Ok(DVector::from_column_slice(t)))
    }
}

/// Metric pulled back through a chart: `g*(φ) = Jᵀ g(θ(φ)) J`.
pub struct Pullback<G> {
    base: G,
    chart: Chart,
}

impl<G: MetricField> Pullback<G> {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn base(&self) -> &G {
        &self.base
    }
}

pub fn pullback_metric<G: MetricField>(base: G, chart: Chart) -> Result<Pullback<G>> {
    if base.dim() != chart.dim() {
        return Err(Error::DimensionMismatch { expected: base.dim(), got: chart.dim() });
    }
    Ok(Pullback { base, chart })
}

impl<G: MetricField> MetricField for Pullback<G> {
    fn dim(&self) -> usize {
        self.chart.dim()
    }

    fn metric(&self, phi: &[f64]) -> Result<DMatrix<f64>> {
        let theta = self.chart.to_base(phi)?;
        let j = self.chart.jacobian(phi)?;
        let det = j.determinant();
        if !(det.abs() > 1e-300) || !det.is_finite() {
            return Err(Error::Singular("chart Jacobian"));
        }
        let g = self.base.metric(theta.as_slice())?;
        Ok(linalg::symmetrize(&(j.transpose() * g * j)))
    }
}
