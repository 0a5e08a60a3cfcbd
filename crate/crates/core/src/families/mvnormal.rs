//! Multivariate normal submodels.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{Domain, Interval, ModelFamily, SampleSpace};
use crate::{linalg, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum MvNormalVariant {
    /// `(μ₁, μ₂, σ₁, σ₂, ρ)`.
    FullBivariate,
    /// `(μ₁, μ₂, σ₁, σ₂)` with `ρ = 0`.
    UncorrelatedBivariate,
    /// `(μ₁, μ₂, σ)` with `Σ = σ² I₂`.
    IsoBivariate,
    /// `(μ₁, …, μ_d, σ)` with `Σ = σ² I_d`.
    Iso { d: usize },
    /// `(μ₁, …, μ_d)` with `Σ = S` fixed.
    KnownCov { s: DMatrix<f64> },
}

impl MvNormalVariant {
    pub fn iso(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive"));
        }
        Ok(MvNormalVariant::Iso { d })
    }

    pub fn known_cov(s: DMatrix<f64>) -> Result<Self> {
        if !s.is_square() || s.nrows() == 0 || s.clone().cholesky().is_none() {
            return Err(Error::Singular("known covariance"));
        }
        Ok(MvNormalVariant::KnownCov { s })
    }

    /// Dimension of the observations.
    pub fn obs_dim(&self) -> usize {
        match self {
            MvNormalVariant::FullBivariate | MvNormalVariant::UncorrelatedBivariate | MvNormalVariant::IsoBivariate => 2,
            MvNormalVariant::Iso { d } => *d,
            MvNormalVariant::KnownCov { s } => s.nrows(),
        }
    }

    pub fn mean(&self, theta: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(&theta[..self.obs_dim()])
    }

    pub fn cov(&self, theta: &[f64]) -> DMatrix<f64> {
        let d = self.obs_dim();
        match self {
            MvNormalVariant::FullBivariate => {
                let (s1, s2, r) = (theta[2], theta[3], theta[4]);
                DMatrix::from_row_slice(2, 2, &[s1 * s1, r * s1 * s2, r * s1 * s2, s2 * s2])
            }
            MvNormalVariant::UncorrelatedBivariate => {
                DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![theta[2] * theta[2], theta[3] * theta[3]]))
            }
            MvNormalVariant::IsoBivariate | MvNormalVariant::Iso { .. } => {
                DMatrix::identity(d, d) * (theta[d] * theta[d])
            }
            MvNormalVariant::KnownCov { s } => s.clone(),
        }
    }

    /// `∂Σ/∂θᵢ`.
    fn dcov(&self, theta: &[f64], i: usize) -> DMatrix<f64> {
        let d = self.obs_dim();
        let mut m = DMatrix::zeros(d, d);
        if i < d {
            return m;
        }
        match self {
            MvNormalVariant::FullBivariate => {
                let (s1, s2, r) = (theta[2], theta[3], theta[4]);
                match i {
                    2 => {
                        m[(0, 0)] = 2.0 * s1;
                        m[(0, 1)] = r * s2;
                        m[(1, 0)] = r * s2;
                    }
                    3 => {
                        m[(1, 1)] = 2.0 * s2;
                        m[(0, 1)] = r * s1;
                        m[(1, 0)] = r * s1;
                    }
                    _ => {
                        m[(0, 1)] = s1 * s2;
                        m[(1, 0)] = s1 * s2;
                    }
                }
            }
            MvNormalVariant::UncorrelatedBivariate => {
                m[(i - 2, i - 2)] = 2.0 * theta[i];
            }
            MvNormalVariant::IsoBivariate | MvNormalVariant::Iso { .. } => {
                m = DMatrix::identity(d, d) * (2.0 * theta[d]);
            }
            MvNormalVariant::KnownCov { .. } => {}
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MvNormal {
    pub variant: MvNormalVariant,
}

impl MvNormal {
    pub fn new(variant: MvNormalVariant) -> Self {
        MvNormal { variant }
    }
}

impl ModelFamily for MvNormal {
    type Obs = Vec<f64>;

    fn dim(&self) -> usize {
        let d = self.variant.obs_dim();
        match self.variant {
            MvNormalVariant::FullBivariate => 5,
            MvNormalVariant::UncorrelatedBivariate => 4,
            MvNormalVariant::IsoBivariate | MvNormalVariant::Iso { .. } => d + 1,
            MvNormalVariant::KnownCov { .. } => d,
        }
    }

    fn domain(&self) -> Domain {
        let d = self.variant.obs_dim();
        let mut iv = alloc::vec![Interval::REAL; d];
        match self.variant {
            MvNormalVariant::FullBivariate => {
                iv.extend([Interval::POSITIVE, Interval::POSITIVE, Interval::new(-1.0, 1.0)]);
            }
            MvNormalVariant::UncorrelatedBivariate => iv.extend([Interval::POSITIVE, Interval::POSITIVE]),
            MvNormalVariant::IsoBivariate | MvNormalVariant::Iso { .. } => iv.push(Interval::POSITIVE),
            MvNormalVariant::KnownCov { .. } => {}
        }
        Domain::new(iv)
    }

    fn log_density(&self, y: &Vec<f64>, theta: &[f64]) -> f64 {
        let d = self.variant.obs_dim();
        let cov = self.variant.cov(theta);
        let Some(chol) = cov.cholesky() else {
            return f64::NAN;
        };
        let r = DVector::from_column_slice(y) - self.variant.mean(theta);
        let z = chol.l().solve_lower_triangular(&r).unwrap_or_else(|| DVector::from_element(d, f64::NAN));
        let logdet: f64 = 2.0 * (0..d).map(|i| chol.l()[(i, i)].ln()).sum::<f64>();
        -0.5 * z.norm_squared() - 0.5 * logdet - 0.5 * d as f64 * (2.0 * PI).ln()
    }

    fn sample<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Vec<f64> {
        let d = self.variant.obs_dim();
        let l = self.variant.cov(theta).cholesky().map(|c| c.l()).unwrap_or_else(|| DMatrix::zeros(d, d));
        let z = DVector::from_iterator(d, (0..d).map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)));
        (self.variant.mean(theta) + l * z).iter().copied().collect()
    }

    fn sample_space(&self) -> SampleSpace {
        SampleSpace::Continuous { dim: self.variant.obs_dim() }
    }

    /// `g_ij = ∂ᵢμᵀ Σ⁻¹ ∂ⱼμ + ½ tr(Σ⁻¹ ∂ᵢΣ Σ⁻¹ ∂ⱼΣ)`.
    fn analytic_fisher(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        let d = self.variant.obs_dim();
        let k = self.dim();
        let si = linalg::spd_inverse(&self.variant.cov(theta)).ok()?;
        let parts: Vec<DMatrix<f64>> = (0..k).map(|i| &si * self.variant.dcov(theta, i)).collect();
        Some(DMatrix::from_fn(k, k, |i, j| {
            let mean_part = if i < d && j < d { si[(i, j)] } else { 0.0 };
            mean_part + 0.5 * (&parts[i] * &parts[j]).trace()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{numeric_fisher, ExpectationConfig};

    #[test]
    fn iso_fisher_is_diagonal() {
        let m = MvNormal::new(MvNormalVariant::iso(3).unwrap());
        let g = m.analytic_fisher(&[0.1, 0.2, 0.3, 2.0]).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![0.25, 0.25, 0.25, 1.5]));
        assert!((g - expected).abs().max() < 1e-14);
    }

    #[test]
    fn full_bivariate_fisher_matches_monte_carlo() {
        let m = MvNormal::new(MvNormalVariant::FullBivariate);
        let theta = [0.0, 1.0, 1.5, 0.7, 0.3];
        let exact = m.analytic_fisher(&theta).unwrap();
        struct NoAnalytic<'a>(&'a MvNormal);
        impl ModelFamily for NoAnalytic<'_> {
            type Obs = Vec<f64>;
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn domain(&self) -> Domain {
                self.0.domain()
            }
            fn log_density(&self, y: &Vec<f64>, t: &[f64]) -> f64 {
                self.0.log_density(y, t)
            }
            fn sample<R: Rng + ?Sized>(&self, t: &[f64], r: &mut R) -> Vec<f64> {
                self.0.sample(t, r)
            }
            fn sample_space(&self) -> SampleSpace {
                self.0.sample_space()
            }
        }
        let f = numeric_fisher(&NoAnalytic(&m), &theta, &ExpectationConfig::monte_carlo(100_000, 9)).unwrap();
        let se = f.std_error.unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((f.matrix[(i, j)] - exact[(i, j)]).abs() <= 4.5 * se[(i, j)] + 1e-9, "({i},{j})");
            }
        }
    }

    #[test]
    fn known_cov_fisher_is_inverse_s() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let m = MvNormal::new(MvNormalVariant::known_cov(s.clone()).unwrap());
        let g = m.analytic_fisher(&[0.0, 0.0]).unwrap();
        assert!((g * s - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-14);
    }

    #[test]
    fn density_integrates_to_standard_form() {
        let m = MvNormal::new(MvNormalVariant::UncorrelatedBivariate);
        let lp = m.log_density(&alloc::vec![1.0, 2.0], &[1.0, 2.0, 1.0, 1.0]);
        assert!((lp + (2.0 * PI).ln()).abs() < 1e-14);
    }
}
