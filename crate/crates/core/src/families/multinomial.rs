//! Multinomial counts over `M` categories from `n` trials, parametrized by
//! the first `M − 1` cell probabilities.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::model::{Domain, Interval, ModelFamily, SampleSpace, MAX_ENUMERATION};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultinomialFamily {
    categories: usize,
    trials: u32,
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| f64::from(i).ln()).sum()
}

fn compositions(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

impl MultinomialFamily {
    pub fn new(categories: usize, trials: u32) -> Result<Self> {
        if categories < 2 {
            return Err(Error::InvalidArgument("a multinomial needs at least two categories"));
        }
        if trials == 0 {
            return Err(Error::InvalidArgument("trial count must be positive"));
        }
        Ok(MultinomialFamily { categories, trials })
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn trials(&self) -> u32 {
        self.trials
    }

    /// All `M` probabilities, the last being `1 − Σ free`.
    pub fn full_probs(theta: &[f64]) -> Vec<f64> {
        let mut p = theta.to_vec();
        p.push(1.0 - theta.iter().sum::<f64>());
        p
    }

    /// Domain plus the simplex constraint `Σ πᵢ < 1`.
    pub fn check(&self, theta: &[f64]) -> Result<()> {
        self.domain().check(theta)?;
        let last = 1.0 - theta.iter().sum::<f64>();
        if !(last > 0.0) {
            return Err(Error::Domain { index: self.categories - 1, value: last, lo: 0.0, hi: 1.0 });
        }
        Ok(())
    }

    /// `n (diag(1/πᵢ) + 11ᵀ/π_M)`.
    pub fn fisher(&self, theta: &[f64]) -> DMatrix<f64> {
        let p = self.categories - 1;
        let last = 1.0 - theta.iter().sum::<f64>();
        let n = f64::from(self.trials);
        DMatrix::from_fn(p, p, |i, j| n * (if i == j { 1.0 / theta[i] } else { 0.0 } + 1.0 / last))
    }
}

impl ModelFamily for MultinomialFamily {
    type Obs = Vec<u32>;

    fn dim(&self) -> usize {
        self.categories - 1
    }

    fn domain(&self) -> Domain {
        Domain::new(alloc::vec![Interval::UNIT; self.categories - 1])
    }

    fn log_density(&self, y: &Vec<u32>, theta: &[f64]) -> f64 {
        if y.len() != self.categories || y.iter().sum::<u32>() != self.trials {
            return f64::NEG_INFINITY;
        }
        let probs = Self::full_probs(theta);
        if probs.iter().any(|&p| !(p > 0.0)) {
            return f64::NAN;
        }
        let mut lp = ln_factorial(self.trials);
        for (&c, &p) in y.iter().zip(&probs) {
            lp -= ln_factorial(c);
            if c > 0 {
                lp += f64::from(c) * p.ln();
            }
        }
        lp
    }

    fn sample<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Vec<u32> {
        let probs = Self::full_probs(theta);
        let mut counts = alloc::vec![0u32; self.categories];
        for _ in 0..self.trials {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = self.categories - 1;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    chosen = i;
                    break;
                }
            }
            counts[chosen] += 1;
        }
        counts
    }

    fn sample_space(&self) -> SampleSpace {
        let n = u64::from(self.trials) + self.categories as u64 - 1;
        match binomial(n, self.categories as u64 - 1) {
            Some(size) if size <= usize::MAX as u64 => SampleSpace::Finite { size: size as usize },
            _ => SampleSpace::Countable,
        }
    }

    fn enumerate(&self) -> Option<Vec<Vec<u32>>> {
        match self.sample_space() {
            SampleSpace::Finite { size } if size <= MAX_ENUMERATION => {
                let mut out = Vec::with_capacity(size);
                compositions(self.trials, self.categories, &mut Vec::new(), &mut out);
                Some(out)
            }
            _ => None,
        }
    }

    fn analytic_score(&self, y: &Vec<u32>, theta: &[f64]) -> Option<DVector<f64>> {
        let last = 1.0 - theta.iter().sum::<f64>();
        let tail = f64::from(y[self.categories - 1]) / last;
        Some(DVector::from_iterator(
            self.categories - 1,
            theta.iter().zip(y).map(|(p, &c)| f64::from(c) / p - tail),
        ))
    }

    fn analytic_fisher(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.fisher(theta))
    }
}
