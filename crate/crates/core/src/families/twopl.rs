//! Two-parameter logistic model with grouped parameters.
//!
//! Items carry one of two discriminations (`α₁ = 1`, `α₂` free) and one of
//! two difficulties (`β₁ = 0`, `β₂` free); persons belong to one of two
//! ability groups. Free parameters are `θ = (α₂, β₂, θ₁, θ₂)`. The eight
//! `(a, b, g)` cells each have their own logit, so the model is a curved
//! family inside the eight-dimensional product-binomial family of cell totals.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::cef::CurvedExpFamily;
use crate::families::rasch::{log1pexp, logistic, logistic_variance};
use crate::model::{Domain, Interval};
use crate::{Error, Result};

pub const CELLS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPLGrouped {
    persons: usize,
    items: usize,
    counts: [f64; CELLS],
}

fn cell(a: usize, b: usize, g: usize) -> usize {
    a * 4 + b * 2 + g
}

impl TwoPLGrouped {
    pub fn new(persons: usize, items: usize) -> Result<Self> {
        let mut counts = [0.0; CELLS];
        let mut spec = TwoPLGrouped { persons, items, counts };
        for p in 0..persons {
            for j in 0..items {
                counts[spec.cell_of(p, j)] += 1.0;
            }
        }
        if counts.contains(&0.0) {
            return Err(Error::InvalidArgument("every discrimination/difficulty/group cell needs responses"));
        }
        spec.counts = counts;
        Ok(spec)
    }

    /// Discrimination selector: first half of the items use `α₁`.
    pub fn a(&self, j: usize) -> usize {
        usize::from(j >= self.items / 2)
    }

    /// Difficulty selector: alternating items.
    pub fn b(&self, j: usize) -> usize {
        j % 2
    }

    /// Group selector: first half of the persons form group 1.
    pub fn g(&self, p: usize) -> usize {
        usize::from(p >= self.persons / 2)
    }

    pub fn cell_of(&self, p: usize, j: usize) -> usize {
        cell(self.a(j), self.b(j), self.g(p))
    }

    pub fn persons(&self) -> usize {
        self.persons
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn cell_counts(&self) -> &[f64; CELLS] {
        &self.counts
    }

    /// `Pr(y_pj = 1)`.
    pub fn prob(&self, theta: &[f64], p: usize, j: usize) -> f64 {
        let alpha = [1.0, theta[0]];
        let beta = [0.0, theta[1]];
        let ability = [theta[2], theta[3]];
        logistic(alpha[self.a(j)] * (ability[self.g(p)] - beta[self.b(j)]))
    }
}

impl CurvedExpFamily for TwoPLGrouped {
    /// Response matrix, one row per person.
    type Data = Vec<Vec<u8>>;

    fn k(&self) -> usize {
        CELLS
    }

    fn q(&self) -> usize {
        4
    }

    fn domain(&self) -> Domain {
        Domain::new(alloc::vec![Interval::POSITIVE, Interval::REAL, Interval::REAL, Interval::REAL])
    }

    /// `η_{abg} = α_a (θ_g − β_b)`.
    fn eta(&self, theta: &[f64]) -> Result<DVector<f64>> {
        let alpha = [1.0, theta[0]];
        let beta = [0.0, theta[1]];
        let ability = [theta[2], theta[3]];
        let mut e = DVector::zeros(CELLS);
        for a in 0..2 {
            for b in 0..2 {
                for g in 0..2 {
                    e[cell(a, b, g)] = alpha[a] * (ability[g] - beta[b]);
                }
            }
        }
        Ok(e)
    }

    fn eta_jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let alpha = [1.0, theta[0]];
        let beta = [0.0, theta[1]];
        let ability = [theta[2], theta[3]];
        let mut j = DMatrix::zeros(CELLS, 4);
        for a in 0..2 {
            for b in 0..2 {
                for g in 0..2 {
                    let c = cell(a, b, g);
                    if a == 1 {
                        j[(c, 0)] = ability[g] - beta[b];
                    }
                    if b == 1 {
                        j[(c, 1)] = -alpha[a];
                    }
                    j[(c, 2 + g)] = alpha[a];
                }
            }
        }
        Ok(j)
    }

    fn eta_hessians(&self, _theta: &[f64]) -> Result<Vec<DVector<f64>>> {
        let mut out = alloc::vec![DVector::zeros(CELLS); 16];
        for b in 0..2 {
            for g in 0..2 {
                let c = cell(1, b, g);
                if b == 1 {
                    out[1][c] = -1.0;
                    out[4][c] = -1.0;
                }
                out[2 + g][c] = 1.0;
                out[(2 + g) * 4][c] = 1.0;
            }
        }
        Ok(out)
    }

    /// `Σ_c N_c log(1 + e^{η_c})`.
    fn log_partition(&self, eta: &DVector<f64>) -> Result<f64> {
        Ok(self.counts.iter().zip(eta.iter()).map(|(n, &e)| n * log1pexp(e)).sum())
    }

    fn log_partition_gradient(&self, eta: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::from_iterator(CELLS, self.counts.iter().zip(eta.iter()).map(|(n, &e)| n * logistic(e))))
    }

    fn log_partition_hessian(&self, eta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = DVector::from_iterator(
            CELLS,
            self.counts.iter().zip(eta.iter()).map(|(n, &e)| n * logistic_variance(e)),
        );
        Ok(DMatrix::from_diagonal(&d))
    }

    /// Number of correct responses per cell.
    fn suff_stat(&self, data: &Vec<Vec<u8>>) -> Result<DVector<f64>> {
        if data.len() != self.persons {
            return Err(Error::DimensionMismatch { expected: self.persons, got: data.len() });
        }
        let mut t = DVector::zeros(CELLS);
        for (p, row) in data.iter().enumerate() {
            if row.len() != self.items {
                return Err(Error::DimensionMismatch { expected: self.items, got: row.len() });
            }
            for (j, &y) in row.iter().enumerate() {
                t[self.cell_of(p, j)] += f64::from(y);
            }
        }
        Ok(t)
    }

    fn simulate<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Vec<Vec<u8>> {
        (0..self.persons)
            .map(|p| (0..self.items).map(|j| u8::from(rng.random::<f64>() < self.prob(theta, p, j))).collect())
            .collect()
    }

    fn start(&self, _data: &Vec<Vec<u8>>) -> Vec<f64> {
        alloc::vec![1.0, 0.0, 0.0, 0.0]
    }
}
