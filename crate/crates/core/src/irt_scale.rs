//! Parametrization-invariant ability scales for the Rasch model.
//!
//! The geodesic ability `A(θ)` is the Fisher-Rao distance from `θ = −∞`:
//! `A(θ) = ∫_{−∞}^θ √g(t) dt` with `g` the test information. Integrals start
//! at a truncation point `θ_L` and the remaining left tail is added in closed
//! form from the asymptote `g(t) ≈ e^t Σ e^{−β}`.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::families::RaschTest;
use crate::quad::adaptive_simpson;
use crate::{Error, Result};

/// Distance below the easiest item at which integrals are truncated.
pub const TRUNCATION_OFFSET: f64 = 45.0;

/// Default absolute quadrature tolerance.
pub const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AbilityScale {
    pub test: RaschTest,
    pub lower_truncation: f64,
    pub quad_tol: f64,
}

/// A one-parameter exponential family in its natural parameter.
pub trait ScalarExpFamily {
    /// `Ψ''(θ)`.
    fn psi_second(&self, theta: f64) -> f64;

    /// Lower end of the integration range.
    fn lower_limit(&self) -> f64;

    /// `∫_{−∞}^{L} Ψ''(t)^δ dt`, or zero if not known.
    fn tail(&self, _delta: f64) -> f64 {
        0.0
    }
}

impl ScalarExpFamily for RaschTest {
    fn psi_second(&self, theta: f64) -> f64 {
        self.test_information(theta)
    }

    fn lower_limit(&self) -> f64 {
        self.min_difficulty() - TRUNCATION_OFFSET
    }

    /// Uses `Ψ''(t) ≈ S e^t` with `S = Σ e^{−β}` below the truncation point.
    fn tail(&self, delta: f64) -> f64 {
        if delta <= 0.0 {
            return 0.0;
        }
        let s: f64 = self.difficulties().iter().map(|b| (-b).exp()).sum();
        s.powf(delta) * (delta * self.lower_limit()).exp() / delta
    }
}

impl AbilityScale {
    pub fn new(test: RaschTest) -> Self {
        let lower_truncation = test.min_difficulty() - TRUNCATION_OFFSET;
        AbilityScale { test, lower_truncation, quad_tol: QUAD_TOL }
    }

    fn sqrt_info(&self, t: f64) -> f64 {
        self.test.test_information(t).sqrt()
    }

    /// `∫_{θ₀}^{θ₁} √g`, the geodesic distance between two abilities.
    pub fn flatten(&self, theta0: f64, theta1: f64) -> Result<f64> {
        if theta0 == theta1 {
            return Ok(0.0);
        }
        Ok(adaptive_simpson(|t| self.sqrt_info(t), theta0, theta1, self.quad_tol)?.value)
    }

    /// Left tail `∫_{−∞}^{x} √g` for `x ≤ θ_L`, from the exponential asymptote.
    fn tail(&self, x: f64) -> f64 {
        let s: f64 = self.test.difficulties().iter().map(|b| (-b).exp()).sum();
        2.0 * (0.5 * x).exp() * s.sqrt()
    }

    /// `A(θ)`.
    pub fn ability(&self, theta: f64) -> Result<f64> {
        if theta == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        if !theta.is_finite() {
            return Err(Error::NonFinite);
        }
        let lo = self.lower_truncation;
        if theta <= lo {
            return Ok(self.tail(theta));
        }
        Ok(self.tail(lo) + self.flatten(lo, theta)?)
    }

    /// Euclidean arc length of `θ ↦ (π₁(θ), …, π_m(θ))` from `−∞`.
    pub fn ramsay(&self, theta: f64) -> Result<f64> {
        if theta == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        if !theta.is_finite() {
            return Err(Error::NonFinite);
        }
        let speed = |t: f64| -> f64 {
            self.test
                .difficulties()
                .iter()
                .map(|&b| {
                    let v = crate::families::rasch::logistic_variance(t - b);
                    v * v
                })
                .sum::<f64>()
                .sqrt()
        };
        let s2: f64 = self.test.difficulties().iter().map(|b| (-2.0 * b).exp()).sum();
        let tail = |x: f64| x.exp() * s2.sqrt();
        let lo = self.lower_truncation;
        if theta <= lo {
            return Ok(tail(theta));
        }
        Ok(tail(lo) + adaptive_simpson(speed, lo, theta, self.quad_tol)?.value)
    }
}

/// `∫_{θ₀}^{θ₁} √g(θ′) dθ′`.
pub fn flatten(test: &RaschTest, theta0: f64, theta1: f64) -> Result<f64> {
    AbilityScale::new(test.clone()).flatten(theta0, theta1)
}

/// Geodesic ability `A(θ)`.
pub fn geodesic_ability(test: &RaschTest, theta: f64) -> Result<f64> {
    AbilityScale::new(test.clone()).ability(theta)
}

/// `A₀(θ) = 2√m arctan(e^{θ/2})`, the ability for `m` items of difficulty 0.
pub fn geodesic_ability_closed_form(m: usize, theta: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("a test needs at least one item"));
    }
    Ok(2.0 * (m as f64).sqrt() * (0.5 * theta).exp().atan())
}

/// Euclidean arc length of the item characteristic curve from `−∞` to `θ`.
pub fn ramsay_arclength(test: &RaschTest, theta: f64) -> Result<f64> {
    AbilityScale::new(test.clone()).ramsay(theta)
}

/// `B_δ(θ) = ∫_{−∞}^θ Ψ''(t)^δ dt`.
pub fn hougaard_transform<F: ScalarExpFamily>(family: &F, delta: f64, theta: f64) -> Result<f64> {
    if !delta.is_finite() || !theta.is_finite() {
        return Err(Error::NonFinite);
    }
    let lo = family.lower_limit();
    if theta == lo {
        return Ok(family.tail(delta));
    }
    let r = adaptive_simpson(|t| family.psi_second(t).powf(delta), lo, theta, QUAD_TOL)?;
    Ok(family.tail(delta) + r.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbilitySe {
    /// `g(θ̂)^{-1/2} A′(θ̂)`; always 1.
    pub delta_method: f64,
    /// The value obtained when the derivative of the closed form is taken as
    /// `2√m e^{θ/2}/(1 + e^θ)`, twice its actual value.
    pub printed_convention: f64,
}

/// Delta-method standard error of `A(θ̂)`.
pub fn ability_se(test: &RaschTest, theta_hat: f64) -> Result<AbilitySe> {
    let g = test.test_information(theta_hat);
    if !(g > 0.0) {
        return Err(Error::Singular("zero test information"));
    }
    let derivative = g.sqrt();
    let se = derivative / g.sqrt();
    Ok(AbilitySe { delta_method: se, printed_convention: 2.0 * se })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbilityRow {
    pub theta: f64,
    pub ability: f64,
    /// `A₀` for a test with the same number of items.
    pub closed_form: f64,
    pub ramsay: f64,
}

/// `(θ, A(θ), A₀(θ), s(θ))` at each grid point.
pub fn ability_grid(test: &RaschTest, thetas: &[f64]) -> Result<Vec<AbilityRow>> {
    let scale = AbilityScale::new(test.clone());
    thetas
        .iter()
        .map(|&theta| {
            Ok(AbilityRow {
                theta,
                ability: scale.ability(theta)?,
                closed_form: geodesic_ability_closed_form(test.items(), theta)?,
                ramsay: scale.ramsay(theta)?,
            })
        })
        .collect()
}

/// `π√m`, the supremum of `A₀`.
pub fn ability_limit(m: usize) -> f64 {
    PI * (m as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::rasch::logistic;

    fn three() -> RaschTest {
        RaschTest::new(alloc::vec![-1.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn flatten_single_item_antiderivative() {
        let t = RaschTest::equal(1).unwrap();
        for &x in &[-3.0, 0.5, 4.0] {
            let oracle = 2.0 * (0.5 * x).exp().atan() - 2.0 * 1f64.atan();
            assert!((flatten(&t, 0.0, x).unwrap() - oracle).abs() < 1e-10);
        }
        assert_eq!(flatten(&t, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn flatten_is_additive() {
        let t = three();
        let ab = flatten(&t, -2.0, 0.3).unwrap();
        let bc = flatten(&t, 0.3, 2.5).unwrap();
        assert!((ab + bc - flatten(&t, -2.0, 2.5).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn equal_items_match_closed_form() {
        let t = RaschTest::equal(5).unwrap();
        assert!((geodesic_ability(&t, 0.0).unwrap() - PI / 2.0 * 5f64.sqrt()).abs() < 1e-9);
        let mut x = -6.0;
        while x <= 6.0 {
            let a = geodesic_ability(&t, x).unwrap();
            assert!((a - geodesic_ability_closed_form(5, x).unwrap()).abs() < 1e-8, "θ={x}");
            x += 0.25;
        }
        assert!((geodesic_ability_closed_form(3, 0.0).unwrap() - 2.7207).abs() < 1e-4);
        assert!((geodesic_ability_closed_form(1, 0.0).unwrap() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn limits() {
        let t = RaschTest::equal(5).unwrap();
        assert_eq!(geodesic_ability(&t, f64::NEG_INFINITY).unwrap(), 0.0);
        assert!(geodesic_ability(&t, -60.0).unwrap() < 1e-6);
        assert!((geodesic_ability(&t, 60.0).unwrap() - ability_limit(5)).abs() < 1e-6);
    }

    #[test]
    fn halving_truncation_changes_nothing() {
        let t = three();
        let mut s = AbilityScale::new(t);
        let a = s.ability(0.7).unwrap();
        s.lower_truncation *= 2.0;
        assert!((s.ability(0.7).unwrap() - a).abs() < 1e-10);
    }

    #[test]
    fn ramsay_is_below_ability_for_one_item() {
        let t = RaschTest::equal(1).unwrap();
        for &x in &[-4.0, 0.0, 3.0] {
            assert!(ramsay_arclength(&t, x).unwrap() < geodesic_ability(&t, x).unwrap());
        }
        assert_eq!(ramsay_arclength(&t, f64::NEG_INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn ramsay_ratio_three_items() {
        let t = three();
        let ratio = ramsay_arclength(&t, 1.0).unwrap() / geodesic_ability(&t, 1.0).unwrap();
        assert!((ratio - 0.361_915_366).abs() < 1e-8, "{ratio}");
    }

    #[test]
    fn hougaard_special_cases() {
        let t = three();
        for &x in &[-2.0, 0.0, 1.5] {
            let a = geodesic_ability(&t, x).unwrap();
            assert!((hougaard_transform(&t, 0.5, x).unwrap() - a).abs() < 1e-9);
            assert!((hougaard_transform(&t, 0.0, x).unwrap() - (x - t.lower_limit())).abs() < 1e-9);
        }
        let one = RaschTest::equal(1).unwrap();
        let b1 = hougaard_transform(&one, 1.0, 0.8).unwrap();
        assert!((b1 - (logistic(0.8) - logistic(one.lower_limit()))).abs() < 1e-9);
    }

    #[test]
    fn se_is_constant() {
        let t = three();
        let a = ability_se(&t, 0.5).unwrap();
        let b = ability_se(&t, -2.0).unwrap();
        assert!((a.delta_method - b.delta_method).abs() < 1e-12);
        assert!((a.delta_method - 1.0).abs() < 1e-12);
        assert!((ability_se(&RaschTest::equal(5).unwrap(), 1.3).unwrap().printed_convention - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ability_in_exponential_chart() {
        // ξ = e^θ with g*(ξ) = g(ln ξ)/ξ²
        let t = three();
        let theta = 0.4;
        let lo = t.lower_limit();
        let s = AbilityScale::new(t.clone());
        let r = crate::quad::adaptive_simpson(
            |u: f64| {
                // substitute ξ = e^u to keep the integrand well scaled
                let xi = u.exp();
                (t.test_information(xi.ln()) / (xi * xi)).sqrt() * xi
            },
            lo,
            theta,
            1e-12,
        )
        .unwrap();
        let a = s.ability(lo).unwrap() + r.value;
        assert!((a - s.ability(theta).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn grid_rows_have_all_columns() {
        let rows = ability_grid(&RaschTest::equal(5).unwrap(), &[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[1].ability > w[0].ability));
        assert!((rows[1].ability - rows[1].closed_form).abs() < 1e-8);
    }
}
