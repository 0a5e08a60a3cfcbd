//! Curved exponential families.
//!
//! A family `p(y | θ) = exp(η(θ)ᵀ t(y) − Ψ(η(θ))) · p₀(y)` whose natural
//! parameter is restricted to a `q`-dimensional submanifold `η(θ)` of a
//! `k`-dimensional full exponential family. `Ψ` and `t` refer to a whole
//! dataset, so `∇²Ψ` is the Fisher information of that dataset.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::model::Domain;
use crate::{diff, Error, Result};

pub trait CurvedExpFamily {
    /// A complete dataset.
    type Data;

    /// Ambient dimension.
    fn k(&self) -> usize;

    /// Number of free parameters.
    fn q(&self) -> usize;

    fn domain(&self) -> Domain;

    fn eta(&self, theta: &[f64]) -> Result<DVector<f64>>;

    /// `k × q` matrix of tangent vectors `∂η/∂θ_a`.
    fn eta_jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        diff::jacobian(|t| self.eta(t), theta)
    }

    /// `∂²η/∂θ_a∂θ_b`, entry `a * q + b`.
    fn eta_hessians(&self, theta: &[f64]) -> Result<Vec<DVector<f64>>> {
        diff::second_derivatives(|t| self.eta(t), theta)
    }

    fn log_partition(&self, eta: &DVector<f64>) -> Result<f64>;

    /// `∇Ψ(η)`, the mean of `t(y)`.
    fn log_partition_gradient(&self, eta: &DVector<f64>) -> Result<DVector<f64>> {
        diff::gradient(|e| self.log_partition(&DVector::from_column_slice(e)), eta.as_slice())
    }

    /// `∇²Ψ(η)`, the ambient Fisher metric.
    fn log_partition_hessian(&self, eta: &DVector<f64>) -> Result<DMatrix<f64>> {
        diff::hessian(|e| self.log_partition(&DVector::from_column_slice(e)), eta.as_slice())
    }

    fn suff_stat(&self, data: &Self::Data) -> Result<DVector<f64>>;

    /// `log p₀(y)`.
    fn log_carrier(&self, _data: &Self::Data) -> f64 {
        0.0
    }

    fn simulate<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Self::Data;

    /// Starting value for maximum likelihood.
    fn start(&self, _data: &Self::Data) -> Vec<f64>;
}

/// Log-likelihood `η(θ)ᵀ t − Ψ(η(θ)) + log p₀`.
pub fn cef_loglik<C: CurvedExpFamily>(spec: &C, theta: &[f64], data: &C::Data) -> Result<f64> {
    spec.domain().check(theta)?;
    let eta = spec.eta(theta)?;
    let t = spec.suff_stat(data)?;
    Ok(eta.dot(&t) - spec.log_partition(&eta)? + spec.log_carrier(data))
}

/// `η(θ) = offset + M θ`, a flat submanifold of an independent-normal-means
/// family with identity metric. Used as the zero-curvature reference.
#[derive(Debug, Clone)]
pub struct AffineCef {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineCef {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if matrix.nrows() != offset.len() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: offset.len() });
        }
        if matrix.ncols() >= matrix.nrows() {
            return Err(Error::InvalidArgument("a curved family needs q < k"));
        }
        Ok(AffineCef { matrix, offset })
    }
}

impl CurvedExpFamily for AffineCef {
    /// One draw of the `k` unit-variance normal coordinates.
    type Data = DVector<f64>;

    fn k(&self) -> usize {
        self.matrix.nrows()
    }

    fn q(&self) -> usize {
        self.matrix.ncols()
    }

    fn domain(&self) -> Domain {
        Domain::real(self.q())
    }

    fn eta(&self, theta: &[f64]) -> Result<DVector<f64>> {
        Ok(&self.offset + &self.matrix * DVector::from_column_slice(theta))
    }

    fn eta_jacobian(&self, _theta: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.matrix.clone())
    }

    fn eta_hessians(&self, _theta: &[f64]) -> Result<Vec<DVector<f64>>> {
        Ok(alloc::vec![DVector::zeros(self.k()); self.q() * self.q()])
    }

    fn log_partition(&self, eta: &DVector<f64>) -> Result<f64> {
        Ok(0.5 * eta.norm_squared())
    }

    fn log_partition_gradient(&self, eta: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(eta.clone())
    }

    fn log_partition_hessian(&self, _eta: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(self.k(), self.k()))
    }

    fn suff_stat(&self, data: &DVector<f64>) -> Result<DVector<f64>> {
        if data.len() != self.k() {
            return Err(Error::DimensionMismatch { expected: self.k(), got: data.len() });
        }
        Ok(data.clone())
    }

    fn simulate<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> DVector<f64> {
        use rand_distr::{Distribution, StandardNormal};
        let mean = self.eta(theta).unwrap_or_else(|_| DVector::zeros(self.k()));
        mean.map(|m| m + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
    }

    fn start(&self, _data: &DVector<f64>) -> Vec<f64> {
        alloc::vec![0.0; self.q()]
    }
}

/// A curved family viewed through a change of coordinates `φ ↦ θ(φ)`.
pub struct Reparametrized<'a, C, F> {
    pub base: &'a C,
    pub to_base: F,
    pub domain: Domain,
}

impl<C, F> CurvedExpFamily for Reparametrized<'_, C, F>
where
    C: CurvedExpFamily,
    F: Fn(&[f64]) -> Vec<f64>,
{
    type Data = C::Data;

    fn k(&self) -> usize {
        self.base.k()
    }

    fn q(&self) -> usize {
        self.base.q()
    }

    fn domain(&self) -> Domain {
        self.domain.clone()
    }

    fn eta(&self, phi: &[f64]) -> Result<DVector<f64>> {
        self.base.eta(&(self.to_base)(phi))
    }

    fn log_partition(&self, eta: &DVector<f64>) -> Result<f64> {
        self.base.log_partition(eta)
    }

    fn log_partition_gradient(&self, eta: &DVector<f64>) -> Result<DVector<f64>> {
        self.base.log_partition_gradient(eta)
    }

    fn log_partition_hessian(&self, eta: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.base.log_partition_hessian(eta)
    }

    fn suff_stat(&self, data: &C::Data) -> Result<DVector<f64>> {
        self.base.suff_stat(data)
    }

    fn log_carrier(&self, data: &C::Data) -> f64 {
        self.base.log_carrier(data)
    }

    fn simulate<R: Rng + ?Sized>(&self, phi: &[f64], rng: &mut R) -> C::Data {
        self.base.simulate(&(self.to_base)(phi), rng)
    }

    fn start(&self, data: &C::Data) -> Vec<f64> {
        self.base.start(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_loglik_is_gaussian() {
        let m = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 0.0]);
        let spec = AffineCef::new(m, DVector::zeros(3)).unwrap();
        let y = DVector::from_vec(alloc::vec![0.5, 1.0, -1.0]);
        let ll = cef_loglik(&spec, &[0.3], &y).unwrap();
        let eta = spec.eta(&[0.3]).unwrap();
        assert!((ll - (eta.dot(&y) - 0.5 * eta.norm_squared())).abs() < 1e-15);
    }

    #[test]
    fn default_partition_derivatives_match_analytic() {
        struct Numeric(AffineCef);
        impl CurvedExpFamily for Numeric {
            type Data = DVector<f64>;
            fn k(&self) -> usize {
                self.0.k()
            }
            fn q(&self) -> usize {
                self.0.q()
            }
            fn domain(&self) -> Domain {
                self.0.domain()
            }
            fn eta(&self, t: &[f64]) -> Result<DVector<f64>> {
                self.0.eta(t)
            }
            fn log_partition(&self, e: &DVector<f64>) -> Result<f64> {
                self.0.log_partition(e)
            }
            fn suff_stat(&self, d: &DVector<f64>) -> Result<DVector<f64>> {
                self.0.suff_stat(d)
            }
            fn simulate<R: Rng + ?Sized>(&self, t: &[f64], r: &mut R) -> DVector<f64> {
                self.0.simulate(t, r)
            }
            fn start(&self, d: &DVector<f64>) -> Vec<f64> {
                self.0.start(d)
            }
        }
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let spec = Numeric(AffineCef::new(m, DVector::zeros(3)).unwrap());
        let e = DVector::from_vec(alloc::vec![0.2, -0.4, 1.1]);
        assert!((spec.log_partition_gradient(&e).unwrap() - &e).abs().max() < 1e-9);
        assert!((spec.log_partition_hessian(&e).unwrap() - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-6);
        assert!((spec.eta_jacobian(&[0.1, 0.2]).unwrap() - &spec.0.matrix).abs().max() < 1e-9);
    }
}
