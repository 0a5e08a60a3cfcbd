//! One-factor model for three items with unit first loading.
//!
//! `y = (1, λ, τ)ᵀ f + σ ε` with `f, ε` standard normal, so
//! `Σ(θ) = v vᵀ + σ² I` for `v = (1, λ, τ)`. As an exponential family in the
//! precision `Φ = Σ⁻¹` this is a curved family with `k = 6`, `q = 3`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cef::CurvedExpFamily;
use crate::model::{Domain, Interval};
use crate::{Error, Result};

/// Row-wise upper-triangle positions of `vec*(Φ)`.
pub const VECH: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cfa3 {
    n: usize,
}

pub fn sigma(theta: &[f64]) -> Matrix3<f64> {
    let v = Vector3::new(1.0, theta[0], theta[1]);
    v * v.transpose() + Matrix3::identity() * (theta[2] * theta[2])
}

/// `Φ(η(θ))` from the closed-form inverse of `v vᵀ + σ² I`.
pub fn precision(theta: &[f64]) -> Result<Matrix3<f64>> {
    let (l, t, s) = (theta[0], theta[1], theta[2]);
    let s2 = s * s;
    let denom = s2 * s2 + s2 * (l * l + t * t + 1.0);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::Singular("model-implied covariance"));
    }
    let v = Vector3::new(1.0, l, t);
    let vv = 1.0 + l * l + t * t;
    let m = Matrix3::identity() * (s2 + vv) - v * v.transpose();
    Ok(m / denom)
}

pub fn vech(m: &Matrix3<f64>) -> DVector<f64> {
    DVector::from_iterator(6, VECH.iter().map(|&(i, j)| m[(i, j)]))
}

pub fn unvech(e: &[f64]) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for (idx, &(i, j)) in VECH.iter().enumerate() {
        m[(i, j)] = e[idx];
        m[(j, i)] = e[idx];
    }
    m
}

/// Symmetric basis matrix `∂Φ/∂η_m`.
fn basis(m: usize) -> Matrix3<f64> {
    let (i, j) = VECH[m];
    let mut e = Matrix3::zeros();
    e[(i, j)] = 1.0;
    e[(j, i)] = 1.0;
    e
}

fn dsigma(theta: &[f64], a: usize) -> Matrix3<f64> {
    let v = Vector3::new(1.0, theta[0], theta[1]);
    match a {
        0 | 1 => {
            let e = Vector3::ith(a + 1, 1.0);
            e * v.transpose() + v * e.transpose()
        }
        _ => Matrix3::identity() * (2.0 * theta[2]),
    }
}

fn d2sigma(a: usize, b: usize) -> Matrix3<f64> {
    match (a.min(b), a.max(b)) {
        (x, y) if x == y && x < 2 => {
            let e = Vector3::ith(x + 1, 1.0);
            e * e.transpose() * 2.0
        }
        (0, 1) => {
            let (e1, e2) = (Vector3::ith(1, 1.0), Vector3::ith(2, 1.0));
            e1 * e2.transpose() + e2 * e1.transpose()
        }
        (2, 2) => Matrix3::identity() * 2.0,
        _ => Matrix3::zeros(),
    }
}

impl Cfa3 {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample size must be positive"));
        }
        Ok(Cfa3 { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sample covariance `Sᵢⱼ = Σ y_i y_j / n` of a dataset.
    pub fn scatter(data: &[[f64; 3]]) -> Matrix3<f64> {
        let mut s = Matrix3::zeros();
        for y in data {
            let v = Vector3::from(*y);
            s += v * v.transpose();
        }
        s / data.len() as f64
    }
}

impl CurvedExpFamily for Cfa3 {
    type Data = Vec<[f64; 3]>;

    fn k(&self) -> usize {
        6
    }

    fn q(&self) -> usize {
        3
    }

    fn domain(&self) -> Domain {
        Domain::new(alloc::vec![Interval::REAL, Interval::REAL, Interval::POSITIVE])
    }

    fn eta(&self, theta: &[f64]) -> Result<DVector<f64>> {
        Ok(vech(&precision(theta)?))
    }

    /// `∂Φ = −Φ (∂Σ) Φ`.
    fn eta_jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let phi = precision(theta)?;
        let cols: Vec<DVector<f64>> = (0..3).map(|a| vech(&-(phi * dsigma(theta, a) * phi))).collect();
        Ok(DMatrix::from_columns(&cols))
    }

    /// `∂²Φ = Φ ∂aΣ Φ ∂bΣ Φ + Φ ∂bΣ Φ ∂aΣ Φ − Φ ∂a∂bΣ Φ`.
    fn eta_hessians(&self, theta: &[f64]) -> Result<Vec<DVector<f64>>> {
        let phi = precision(theta)?;
        let mut out = Vec::with_capacity(9);
        for a in 0..3 {
            for b in 0..3 {
                let (sa, sb) = (dsigma(theta, a), dsigma(theta, b));
                let m = phi * sa * phi * sb * phi + phi * sb * phi * sa * phi - phi * d2sigma(a, b) * phi;
                out.push(vech(&m));
            }
        }
        Ok(out)
    }

    /// `−(n/2) log det Φ(η)`.
    fn log_partition(&self, eta: &DVector<f64>) -> Result<f64> {
        let phi = unvech(eta.as_slice());
        let chol = phi.cholesky().ok_or(Error::Singular("precision matrix"))?;
        let logdet: f64 = 2.0 * (0..3).map(|i| chol.l()[(i, i)].ln()).sum::<f64>();
        Ok(-0.5 * self.n as f64 * logdet)
    }

    fn log_partition_gradient(&self, eta: &DVector<f64>) -> Result<DVector<f64>> {
        let sig = unvech(eta.as_slice()).try_inverse().ok_or(Error::Singular("precision matrix"))?;
        let half_n = 0.5 * self.n as f64;
        Ok(DVector::from_iterator(6, (0..6).map(|m| -half_n * (sig * basis(m)).trace())))
    }

    /// `(n/2) tr(Φ⁻¹ E_m Φ⁻¹ E_l)`.
    fn log_partition_hessian(&self, eta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let sig = unvech(eta.as_slice()).try_inverse().ok_or(Error::Singular("precision matrix"))?;
        let half_n = 0.5 * self.n as f64;
        let parts: Vec<Matrix3<f64>> = (0..6).map(|m| sig * basis(m)).collect();
        Ok(DMatrix::from_fn(6, 6, |m, l| half_n * (parts[m] * parts[l]).trace()))
    }

    /// `(−½Σy₁², −Σy₁y₂, −Σy₁y₃, −½Σy₂², −Σy₂y₃, −½Σy₃²)`.
    fn suff_stat(&self, data: &Vec<[f64; 3]>) -> Result<DVector<f64>> {
        if data.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: data.len() });
        }
        let s = Cfa3::scatter(data) * self.n as f64;
        Ok(DVector::from_iterator(
            6,
            VECH.iter().map(|&(i, j)| if i == j { -0.5 * s[(i, j)] } else { -s[(i, j)] }),
        ))
    }

    fn log_carrier(&self, _data: &Vec<[f64; 3]>) -> f64 {
        -1.5 * self.n as f64 * (2.0 * PI).ln()
    }

    fn simulate<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Vec<[f64; 3]> {
        let v = [1.0, theta[0], theta[1]];
        (0..self.n)
            .map(|_| {
                let f: f64 = StandardNormal.sample(rng);
                core::array::from_fn(|i| {
                    let e: f64 = StandardNormal.sample(rng);
                    v[i] * f + theta[2] * e
                })
            })
            .collect()
    }

    fn start(&self, _data: &Vec<[f64; 3]>) -> Vec<f64> {
        alloc::vec![1.0, 1.0, 1.0]
    }
}
