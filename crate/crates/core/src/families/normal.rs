//! Univariate normal family.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{Domain, Interval, ModelFamily, SampleSpace};
use crate::quad::gauss_hermite;

/// Gauss-Hermite nodes used for expectations under a univariate normal.
const HERMITE_NODES: usize = 48;

/// Univariate normal `N(μ, σ²)` in the `(μ, σ)` chart.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Normal1D;

impl Normal1D {
    pub fn fisher(sigma: f64) -> DMatrix<f64> {
        let s2 = sigma * sigma;
        DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![1.0 / s2, 2.0 / s2]))
    }
}

impl ModelFamily for Normal1D {
    type Obs = f64;

    fn dim(&self) -> usize {
        2
    }

    fn domain(&self) -> Domain {
        Domain::new(alloc::vec![Interval::REAL, Interval::POSITIVE])
    }

    fn log_density(&self, y: &f64, theta: &[f64]) -> f64 {
        let (mu, sigma) = (theta[0], theta[1]);
        let z = (y - mu) / sigma;
        -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * PI).ln()
    }

    fn sample<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        theta[0] + theta[1] * z
    }

    fn sample_space(&self) -> SampleSpace {
        SampleSpace::Continuous { dim: 1 }
    }

    fn quadrature(&self, theta: &[f64]) -> Option<Vec<(f64, f64)>> {
        Some(
            gauss_hermite(HERMITE_NODES)
                .into_iter()
                .map(|(x, w)| (theta[0] + theta[1] * x, w))
                .collect(),
        )
    }

    fn analytic_score(&self, y: &f64, theta: &[f64]) -> Option<DVector<f64>> {
        let (mu, sigma) = (theta[0], theta[1]);
        let d = y - mu;
        let s2 = sigma * sigma;
        Some(DVector::from_vec(alloc::vec![d / s2, (d * d - s2) / (s2 * sigma)]))
    }

    fn analytic_fisher(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(Normal1D::fisher(theta[1]))
    }

    fn kl_closed_form(&self, theta: &[f64], other: &[f64]) -> Option<f64> {
        let (m0, s0) = (theta[0], theta[1]);
        let (m1, s1) = (other[0], other[1]);
        Some((s1 / s0).ln() + (s0 * s0 + (m0 - m1) * (m0 - m1)) / (2.0 * s1 * s1) - 0.5)
    }
}
