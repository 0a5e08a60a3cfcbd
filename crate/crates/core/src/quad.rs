//! One-dimensional quadrature: adaptive Simpson for smooth integrands on
//! compact intervals, and Gauss-Hermite rules for Gaussian expectations.

use alloc::vec::Vec;
use core::cell::Cell;
use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const MAX_DEPTH: u32 = 60;

/// Value of an integral together with the accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

struct Simpson<'f, F> {
    f: &'f F,
    max_depth: u32,
    failed: bool,
    error: f64,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn step(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if !delta.is_finite() {
            self.failed = true;
            return f64::NAN;
        }
        let tiny = (b - a).abs() <= 64.0 * f64::EPSILON * (a.abs() + b.abs());
        if delta.abs() <= 15.0 * tol || tiny {
            self.error += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        if depth >= self.max_depth {
            self.failed = true;
            self.error += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        let sub_tol = (0.5 * tol).max(f64::EPSILON * whole.abs());
        self.step(a, m, fa, flm, fm, left, sub_tol, depth + 1)
            + self.step(m, b, fm, frm, fb, right, sub_tol, depth + 1)
    }
}

/// Adaptive Simpson quadrature on `[a, b]` to absolute tolerance `tol`.
///
/// Fails with [`Error::Quadrature`] when some subinterval still exceeds its
/// share of the tolerance at `MAX_DEPTH` bisections, or the integrand is not
/// finite.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive"));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut s = Simpson { f: &f, max_depth: MAX_DEPTH, failed: false, error: 0.0 };
    let value = s.step(a, b, fa, fm, fb, whole, tol, 0);
    if !value.is_finite() {
        return Err(Error::Quadrature { tol, achieved: f64::INFINITY });
    }
    if s.failed && s.error > tol {
        return Err(Error::Quadrature { tol, achieved: s.error });
    }
    Ok(Integral { value, error: s.error })
}

/// [`adaptive_simpson`] for a fallible integrand; the first error raised by
/// `f` aborts the integration and is returned unchanged.
pub fn adaptive_simpson_fallible<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64>,
{
    let first_error: Cell<Option<Error>> = Cell::new(None);
    let wrapped = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => {
            let prev = first_error.take();
            first_error.set(prev.or(Some(e)));
            f64::NAN
        }
    };
    let out = adaptive_simpson(wrapped, a, b, tol);
    match first_error.take() {
        Some(e) => Err(e),
        None => out,
    }
}

/// Convenience wrapper returning only the value.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    adaptive_simpson(f, a, b, tol).map(|i| i.value)
}

/// Nodes and weights of the `n`-point Gauss-Hermite rule for the standard
/// normal weight, so that `Σ w_i f(x_i) ≈ E[f(Z)]`, `Z ~ N(0, 1)`.
///
/// Built with Golub-Welsch from the Jacobi matrix of the probabilists'
/// Hermite polynomials (off-diagonal `√i`).
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64).sqrt();
        jacobi[(i, i - 1)] = b;
        jacobi[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = rule.iter().map(|r| r.1).sum();
    for r in &mut rule {
        r.1 /= total;
    }
    rule
}
