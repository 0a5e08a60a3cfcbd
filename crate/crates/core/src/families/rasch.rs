//! Rasch model for one person answering `m` items of known difficulty.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::model::{Domain, ModelFamily, SampleSpace, MAX_ENUMERATION};
use crate::{Error, Result};

/// `e^x / (1 + e^x)` without overflow.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow or cancellation.
pub fn log1pexp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `π(1 − π)` for `π = logistic(x)`, accurate in both tails.
pub fn logistic_variance(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaschTest {
    difficulties: Vec<f64>,
}

/// Success probabilities evaluated in the three ability charts.
#[derive(Debug, Clone, PartialEq)]
pub struct ReparamReport {
    pub theta: Vec<f64>,
    pub xi: Vec<f64>,
    pub psi: Vec<f64>,
    pub max_discrepancy: f64,
}

impl RaschTest {
    pub fn new(difficulties: Vec<f64>) -> Result<Self> {
        if difficulties.is_empty() {
            return Err(Error::InvalidArgument("a test needs at least one item"));
        }
        if difficulties.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("item difficulties must be finite"));
        }
        Ok(RaschTest { difficulties })
    }

    /// `m` items all of difficulty zero.
    pub fn equal(m: usize) -> Result<Self> {
        RaschTest::new(alloc::vec![0.0; m])
    }

    pub fn difficulties(&self) -> &[f64] {
        &self.difficulties
    }

    pub fn items(&self) -> usize {
        self.difficulties.len()
    }

    pub fn min_difficulty(&self) -> f64 {
        self.difficulties.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn prob(&self, item: usize, theta: f64) -> f64 {
        logistic(theta - self.difficulties[item])
    }

    pub fn probs(&self, theta: f64) -> Vec<f64> {
        self.difficulties.iter().map(|b| logistic(theta - b)).collect()
    }

    /// `Σ_j π_j(θ)(1 − π_j(θ))`.
    pub fn test_information(&self, theta: f64) -> f64 {
        self.difficulties.iter().map(|b| logistic_variance(theta - b)).sum()
    }

    /// `Σ_j [y_j(θ − β_j) − log(1 + e^{θ−β_j})]`.
    pub fn joint_loglik(&self, theta: f64, y: &[u8]) -> Result<f64> {
        if y.len() != self.items() {
            return Err(Error::DimensionMismatch { expected: self.items(), got: y.len() });
        }
        Ok(self
            .difficulties
            .iter()
            .zip(y)
            .map(|(b, &yj)| f64::from(yj) * (theta - b) - log1pexp(theta - b))
            .sum())
    }

    /// Success probabilities through `θ`, `ξ = e^θ` and `ψ = 2 arctan(e^{θ/2})`.
    pub fn reparam_check(&self, theta: f64) -> ReparamReport {
        let xi = theta.exp();
        let psi = 2.0 * (0.5 * theta).exp().atan();
        let by_theta = self.probs(theta);
        let by_xi: Vec<f64> = self
            .difficulties
            .iter()
            .map(|b| {
                let u = xi * (-b).exp();
                u / (1.0 + u)
            })
            .collect();
        let by_psi: Vec<f64> = self
            .difficulties
            .iter()
            .map(|b| {
                let t = (0.5 * psi).tan();
                let u = t * t * (-b).exp();
                u / (1.0 + u)
            })
            .collect();
        let max_discrepancy = by_theta
            .iter()
            .zip(&by_xi)
            .zip(&by_psi)
            .map(|((a, b), c)| (a - b).abs().max((a - c).abs()).max((b - c).abs()))
            .fold(0.0, f64::max);
        ReparamReport { theta: by_theta, xi: by_xi, psi: by_psi, max_discrepancy }
    }

    /// Log-partition in the natural parameter: `Σ_j log(1 + e^{θ−β_j})`.
    pub fn log_partition(&self, theta: f64) -> f64 {
        self.difficulties.iter().map(|b| log1pexp(theta - b)).sum()
    }

    /// Carrier term `−Σ_j y_j β_j`, which holds the `y`-dependent part of the
    /// exponential-family rewrite.
    pub fn log_carrier(&self, y: &[u8]) -> f64 {
        -self.difficulties.iter().zip(y).map(|(b, &yj)| f64::from(yj) * b).sum::<f64>()
    }

    pub fn sufficient_stat(y: &[u8]) -> f64 {
        y.iter().map(|&v| f64::from(v)).sum()
    }

    /// `θ·y₊ − Ψ(θ) + log g₀(y)`.
    pub fn exp_family_loglik(&self, theta: f64, y: &[u8]) -> f64 {
        theta * Self::sufficient_stat(y) - self.log_partition(theta) + self.log_carrier(y)
    }
}

impl ModelFamily for RaschTest {
    type Obs = Vec<u8>;

    fn dim(&self) -> usize {
        1
    }

    fn domain(&self) -> Domain {
        Domain::real(1)
    }

    fn log_density(&self, y: &Vec<u8>, theta: &[f64]) -> f64 {
        self.joint_loglik(theta[0], y).unwrap_or(f64::NAN)
    }

    fn sample<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Vec<u8> {
        self.difficulties
            .iter()
            .map(|b| u8::from(rng.random::<f64>() < logistic(theta[0] - b)))
            .collect()
    }

    fn sample_space(&self) -> SampleSpace {
        match 1usize.checked_shl(self.items() as u32) {
            Some(size) if self.items() < usize::BITS as usize => SampleSpace::Finite { size },
            _ => SampleSpace::Countable,
        }
    }

    fn enumerate(&self) -> Option<Vec<Vec<u8>>> {
        let m = self.items();
        if m >= usize::BITS as usize || (1usize << m) > MAX_ENUMERATION {
            return None;
        }
        Some((0..(1usize << m)).map(|bits| (0..m).map(|j| ((bits >> j) & 1) as u8).collect()).collect())
    }

    fn analytic_score(&self, y: &Vec<u8>, theta: &[f64]) -> Option<DVector<f64>> {
        let s: f64 = self.probs(theta[0]).iter().zip(y).map(|(p, &yj)| f64::from(yj) - p).sum();
        Some(DVector::from_element(1, s))
    }

    fn analytic_fisher(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, self.test_information(theta[0])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_identity, expectation, numeric_fisher, score, ExpectationConfig};

    fn three_items() -> RaschTest {
        RaschTest::new(alloc::vec![-1.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn joint_loglik_examples() {
        let one = RaschTest::equal(1).unwrap();
        assert!((one.joint_loglik(0.0, &[1]).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let two = RaschTest::equal(2).unwrap();
        assert!((two.joint_loglik(0.0, &[1, 0]).unwrap() - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        let t = three_items();
        let direct: f64 = t.difficulties().iter().map(|b| (2.0 - b).exp() / (1.0 + (2.0 - b).exp())).product();
        assert!((t.joint_loglik(2.0, &[1, 1, 1]).unwrap() - direct.ln()).abs() < 1e-14);
        assert!(matches!(t.joint_loglik(0.0, &[1]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn loglik_is_stable_at_extreme_ability() {
        let t = RaschTest::equal(1).unwrap();
        let v = t.joint_loglik(800.0, &[0]).unwrap();
        assert!((v + 800.0).abs() < 1e-9);
        assert!(t.joint_loglik(-800.0, &[0]).unwrap().abs() < 1e-300);
    }

    #[test]
    fn reparametrizations_agree() {
        assert!(RaschTest::equal(1).unwrap().reparam_check(0.0).max_discrepancy < 1e-15);
        assert!(three_items().reparam_check(1.3).max_discrepancy < 1e-12);
        assert!(RaschTest::equal(1).unwrap().reparam_check(-10.0).max_discrepancy < 1e-12);
        let t = three_items();
        for i in 0..=200 {
            let theta = -10.0 + 0.1 * i as f64;
            assert!(t.reparam_check(theta).max_discrepancy < 1e-12, "θ = {theta}");
        }
    }

    #[test]
    fn test_information_examples() {
        assert_eq!(RaschTest::equal(1).unwrap().test_information(0.0), 0.25);
        assert_eq!(RaschTest::equal(5).unwrap().test_information(0.0), 1.25);
        let v = three_items().test_information(0.0);
        let e = (-1f64).exp();
        let oracle = 2.0 * e / ((1.0 + e) * (1.0 + e)) + 0.25;
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 0.643224).abs() < 1e-6);
    }

    #[test]
    fn score_and_fisher_examples() {
        let one = RaschTest::equal(1).unwrap();
        assert_eq!(score(&one, &[0.0], &alloc::vec![1]).unwrap()[0], 0.5);
        let f = numeric_fisher(&one, &[0.0], &ExpectationConfig::default()).unwrap();
        assert!((f.matrix[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn enumerated_fisher_matches_test_information() {
        let t = three_items();
        let f = numeric_fisher(&t, &[0.7], &ExpectationConfig::default()).unwrap();
        assert!((f.matrix[(0, 0)] - t.test_information(0.7)).abs() < 1e-12);
    }

    #[test]
    fn score_has_mean_zero() {
        let t = three_items();
        let e = expectation(&t, &[0.4], &ExpectationConfig::default(), |y| score(&t, &[0.4], y)).unwrap();
        assert!(e.mean[0].abs() < 1e-15);
    }

    #[test]
    fn identity_by_enumeration() {
        let r = check_identity(&three_items(), &[0.0], &ExpectationConfig::default()).unwrap();
        assert!(r.max_deviation < 1e-8, "{}", r.max_deviation);
    }

    #[test]
    fn exponential_family_rewrite_reproduces_loglik() {
        let t = three_items();
        for y in t.enumerate().unwrap() {
            for &theta in &[-3.0, 0.2, 4.5] {
                let a = t.joint_loglik(theta, &y).unwrap();
                let b = t.exp_family_loglik(theta, &y);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
