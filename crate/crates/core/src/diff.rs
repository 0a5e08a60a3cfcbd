//! Central finite differences.
//!
//! Steps follow the usual truncation/round-off balance: `ε^{1/3}·max(1,|x|)`
//! for first derivatives and `ε^{1/4}·max(1,|x|)` for second derivatives.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::Result;

pub fn first_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

pub fn second_step(x: f64) -> f64 {
    f64::EPSILON.powf(0.25) * x.abs().max(1.0)
}

fn shifted(x: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += h;
    y
}

fn shifted2(x: &[f64], i: usize, hi: f64, j: usize, hj: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += hi;
    y[j] += hj;
    y
}

/// Derivative of a scalar function of one variable.
pub fn derivative<F>(f: F, t: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let h = first_step(t);
    (f(t + h) - f(t - h)) / (2.0 * h)
}

pub fn gradient<F>(f: F, x: &[f64]) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        let h = first_step(x[i]);
        let fp = f(&shifted(x, i, h))?;
        let fm = f(&shifted(x, i, -h))?;
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

pub fn hessian<F>(f: F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let k = x.len();
    let f0 = f(x)?;
    let mut h = DMatrix::zeros(k, k);
    for i in 0..k {
        let hi = second_step(x[i]);
        let fp = f(&shifted(x, i, hi))?;
        let fm = f(&shifted(x, i, -hi))?;
        h[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = second_step(x[j]);
            let fpp = f(&shifted2(x, i, hi, j, hj))?;
            let fpm = f(&shifted2(x, i, hi, j, -hj))?;
            let fmp = f(&shifted2(x, i, -hi, j, hj))?;
            let fmm = f(&shifted2(x, i, -hi, j, -hj))?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// Jacobian `∂f_m/∂x_a` of a vector-valued map, shape `m × n`.
pub fn jacobian<F>(f: F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let mut cols = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = first_step(x[i]);
        let fp = f(&shifted(x, i, h))?;
        let fm = f(&shifted(x, i, -h))?;
        cols.push((fp - fm) / (2.0 * h));
    }
    if cols.is_empty() {
        return Ok(DMatrix::zeros(f(x)?.len(), 0));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Jacobian by Richardson-extrapolated central differences, `O(h⁴)`.
pub fn jacobian_richardson<F>(f: F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let mut cols = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = f64::EPSILON.powf(0.2) * x[i].abs().max(1.0);
        let d = |h: f64| -> Result<DVector<f64>> { Ok((f(&shifted(x, i, h))? - f(&shifted(x, i, -h))?) / (2.0 * h)) };
        let coarse = d(h)?;
        let fine = d(0.5 * h)?;
        cols.push((fine * 4.0 - coarse) / 3.0);
    }
    if cols.is_empty() {
        return Ok(DMatrix::zeros(f(x)?.len(), 0));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Second derivatives `∂²f/∂x_a∂x_b` of a vector-valued map, returned as a
/// row-major `n × n` table of vectors (entry `a * n + b`).
pub fn second_derivatives<F>(f: F, x: &[f64]) -> Result<Vec<DVector<f64>>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let n = x.len();
    let f0 = f(x)?;
    let mut out = alloc::vec![DVector::zeros(f0.len()); n * n];
    for a in 0..n {
        let ha = second_step(x[a]);
        let fp = f(&shifted(x, a, ha))?;
        let fm = f(&shifted(x, a, -ha))?;
        out[a * n + a] = (fp - &f0 * 2.0 + fm) / (ha * ha);
        for b in 0..a {
            let hb = second_step(x[b]);
            let fpp = f(&shifted2(x, a, ha, b, hb))?;
            let fpm = f(&shifted2(x, a, ha, b, -hb))?;
            let fmp = f(&shifted2(x, a, -ha, b, hb))?;
            let fmm = f(&shifted2(x, a, -ha, b, -hb))?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * ha * hb);
            out[a * n + b] = v.clone();
            out[b * n + a] = v;
        }
    }
    Ok(out)
}
