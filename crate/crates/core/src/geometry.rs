//! Lengths and distances under a metric field.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::curvature::christoffel;
use crate::model::{expectation, ExpectationConfig, ExpectationMethod, ModelFamily};
use crate::quad::{adaptive_simpson_fallible, Integral};
use crate::{diff, linalg, Error, MetricField, Result};

/// `ds² = dθᵀ g(θ) dθ`.
pub fn line_element<G: MetricField>(g: &G, theta: &[f64], dtheta: &[f64]) -> Result<f64> {
    if dtheta.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: dtheta.len() });
    }
    let m = g.metric(theta)?;
    Ok(linalg::quad_form(&DVector::from_column_slice(dtheta), &m).max(0.0))
}

/// Moments of the relative deviation `Δ(y) = p(y|θ+dθ)/p(y|θ) − 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distinguishability {
    pub mean_delta: f64,
    /// `E[Δ²]`, which approaches `ds²` as `dθ → 0`.
    pub mean_delta_sq: f64,
    pub std_error: Option<(f64, f64)>,
    pub method: ExpectationMethod,
}

pub fn distinguishability<M: ModelFamily>(
    model: &M,
    theta: &[f64],
    dtheta: &[f64],
    cfg: &ExpectationConfig,
) -> Result<Distinguishability> {
    if dtheta.len() != theta.len() {
        return Err(Error::DimensionMismatch { expected: theta.len(), got: dtheta.len() });
    }
    let moved: Vec<f64> = theta.iter().zip(dtheta).map(|(a, b)| a + b).collect();
    model.domain().check(&moved)?;
    let est = expectation(model, theta, cfg, |y| {
        let lp0 = model.log_density(y, theta);
        if !lp0.is_finite() {
            return Err(Error::NonFinite);
        }
        let lp1 = model.log_density(y, &moved);
        let delta = if lp1 == f64::NEG_INFINITY { -1.0 } else { (lp1 - lp0).exp_m1() };
        if !delta.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(DVector::from_vec(alloc::vec![delta, delta * delta]))
    })?;
    Ok(Distinguishability {
        mean_delta: est.mean[0],
        mean_delta_sq: est.mean[1],
        std_error: est.std_error.map(|s| (s[0], s[1])),
        method: est.method,
    })
}

/// `D(p_θ ‖ p_θ′)`: closed form when the family has one, otherwise the
/// expectation of `log p(y|θ) − log p(y|θ′)` under `θ`.
pub fn kl_divergence<M: ModelFamily>(model: &M, theta: &[f64], other: &[f64], cfg: &ExpectationConfig) -> Result<f64> {
    model.domain().check(theta)?;
    model.domain().check(other)?;
    if let Some(v) = model.kl_closed_form(theta, other) {
        return Ok(v);
    }
    let est = expectation(model, theta, cfg, |y| {
        let lp0 = model.log_density(y, theta);
        let lp1 = model.log_density(y, other);
        if lp1 == f64::NEG_INFINITY {
            return Err(Error::SupportMismatch);
        }
        if !(lp0.is_finite() && lp1.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(DVector::from_element(1, lp0 - lp1))
    })?;
    Ok(est.mean[0])
}

type PathFn<'a> = Box<dyn Fn(f64) -> DVector<f64> + 'a>;

/// A smooth path `t ↦ θ(t)` on `[t₀, t₁]`.
pub struct Curve<'a> {
    t0: f64,
    t1: f64,
    map: PathFn<'a>,
    derivative: Option<PathFn<'a>>,
}

impl<'a> Curve<'a> {
    pub fn new<F>(t0: f64, t1: f64, map: F) -> Result<Self>
    where
        F: Fn(f64) -> DVector<f64> + 'a,
    {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidArgument("curve needs finite endpoints t0 < t1"));
        }
        Ok(Curve { t0, t1, map: Box::new(map), derivative: None })
    }

    pub fn with_derivative<D>(mut self, derivative: D) -> Self
    where
        D: Fn(f64) -> DVector<f64> + 'a,
    {
        self.derivative = Some(Box::new(derivative));
        self
    }

    /// Straight segment from `a` to `b` in the given coordinates.
    pub fn line(a: &[f64], b: &[f64]) -> Result<Curve<'static>> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
        }
        let a = DVector::from_column_slice(a);
        let d = DVector::from_column_slice(b) - &a;
        let d2 = d.clone();
        Ok(Curve::new(0.0, 1.0, move |t| &a + &d * t)?.with_derivative(move |_| d2.clone()))
    }

    /// Piecewise-linear path through `points`, with `t` running over `[0, segments]`.
    pub fn polyline(points: Vec<Vec<f64>>) -> Result<Curve<'static>> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("a polyline needs at least two points"));
        }
        let k = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != k) {
            return Err(Error::DimensionMismatch { expected: k, got: p.len() });
        }
        let pts: Vec<DVector<f64>> = points.iter().map(|p| DVector::from_column_slice(p)).collect();
        let pts2 = pts.clone();
        let segs = pts.len() - 1;
        let locate = move |t: f64| -> (usize, f64) {
            let i = (t.floor().max(0.0) as usize).min(segs - 1);
            (i, t - i as f64)
        };
        Ok(Curve::new(0.0, segs as f64, move |t| {
            let (i, s) = locate(t);
            &pts[i] + (&pts[i + 1] - &pts[i]) * s
        })?
        .with_derivative(move |t| {
            let (i, _) = locate(t);
            &pts2[i + 1] - &pts2[i]
        }))
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn point(&self, t: f64) -> DVector<f64> {
        (self.map)(t)
    }

    /// `dθ/dt`, analytic if supplied, else central differences.
    pub fn velocity(&self, t: f64) -> DVector<f64> {
        match &self.derivative {
            Some(d) => d(t),
            None => {
                let h = diff::first_step(t);
                ((self.map)(t + h) - (self.map)(t - h)) / (2.0 * h)
            }
        }
    }

    /// The same path traversed with time `t = τ(s)` for an increasing `τ`
    /// mapping `[s₀, s₁]` onto `[t₀, t₁]`.
    pub fn retimed<T, DT>(self, s0: f64, s1: f64, tau: T, dtau: DT) -> Result<Curve<'a>>
    where
        T: Fn(f64) -> f64 + Clone + 'a,
        DT: Fn(f64) -> f64 + 'a,
    {
        let Curve { map, derivative, .. } = self;
        let map: alloc::rc::Rc<PathFn<'a>> = alloc::rc::Rc::new(map);
        let tau2 = tau.clone();
        let map2 = map.clone();
        let vel = move |s: f64| {
            let t = tau2(s);
            let v = match &derivative {
                Some(d) => d(t),
                None => {
                    let h = diff::first_step(t);
                    (map2(t + h) - map2(t - h)) / (2.0 * h)
                }
            };
            v * dtau(s)
        };
        Ok(Curve::new(s0, s1, move |s| map(tau(s)))?.with_derivative(vel))
    }
}

/// `∫ √(θ̇ᵀ g(θ) θ̇) dt` by adaptive Simpson to absolute tolerance `tol`.
pub fn arc_length<G: MetricField>(g: &G, curve: &Curve<'_>, tol: f64) -> Result<Integral> {
    adaptive_simpson_fallible(
        |t| {
            let v = curve.velocity(t);
            let m = g.metric(curve.point(t).as_slice())?;
            Ok(linalg::quad_form(&v, &m).max(0.0).sqrt())
        },
        curve.t0,
        curve.t1,
        tol,
    )
}

/// Closed-form Fisher-Rao distance between `N(μ₀, σ₀²)` and `N(μ₁, σ₁²)`.
pub fn geodesic_distance_normal(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (m0, s0) = a;
    let (m1, s1) = b;
    let dm2 = (m1 - m0) * (m1 - m0);
    let minus = dm2 + 2.0 * (s0 - s1) * (s0 - s1);
    let plus = dm2 + 2.0 * (s0 + s1) * (s0 + s1);
    let num = (minus * plus).sqrt() + dm2 + 2.0 * (s0 * s0 + s1 * s1);
    let arg = num / (4.0 * s0 * s1);
    // arg ≥ 1 mathematically; clamp the rounding so identical points give 0
    SQRT_2 * arg.max(1.0).ln()
}

fn check_normal_point(p: (f64, f64)) -> Result<()> {
    if !(p.1 > 0.0) || !p.0.is_finite() || !p.1.is_finite() {
        return Err(Error::Domain { index: 1, value: p.1, lo: 0.0, hi: f64::INFINITY });
    }
    Ok(())
}

/// Straight segment in the `(μ, σ)` chart.
pub fn normal_line(a: (f64, f64), b: (f64, f64)) -> Result<Curve<'static>> {
    check_normal_point(a)?;
    check_normal_point(b)?;
    Curve::line(&[a.0, a.1], &[b.0, b.1])
}

fn arc_on_axis(a: (f64, f64), b: (f64, f64), stretch: f64) -> Result<Curve<'static>> {
    check_normal_point(a)?;
    check_normal_point(b)?;
    if a.0 == b.0 {
        return Err(Error::InvalidArgument("endpoints share μ; no arc centred on the μ-axis joins them"));
    }
    // (μ − c)² + s σ² = r², through both points
    let c = (b.0 * b.0 + stretch * b.1 * b.1 - a.0 * a.0 - stretch * a.1 * a.1) / (2.0 * (b.0 - a.0));
    let r = ((a.0 - c) * (a.0 - c) + stretch * a.1 * a.1).sqrt();
    let h = r / stretch.sqrt();
    let t_a = (a.1 / h).atan2((a.0 - c) / r);
    let t_b = (b.1 / h).atan2((b.0 - c) / r);
    let (t0, t1) = if t_a < t_b { (t_a, t_b) } else { (t_b, t_a) };
    Ok(Curve::new(t0, t1, move |t| DVector::from_vec(alloc::vec![c + r * t.cos(), h * t.sin()]))?
        .with_derivative(move |t| DVector::from_vec(alloc::vec![-r * t.sin(), h * t.cos()])))
}

/// Arc of the circle centred on the `μ`-axis through both points.
pub fn normal_circle_arc(a: (f64, f64), b: (f64, f64)) -> Result<Curve<'static>> {
    arc_on_axis(a, b, 1.0)
}

/// Arc of the half-ellipse `(μ − c)² + 2σ² = r²` through both points, which
/// is the geodesic of the normal family. Equal means give the vertical segment.
pub fn normal_ellipse_arc(a: (f64, f64), b: (f64, f64)) -> Result<Curve<'static>> {
    if a.0 == b.0 {
        return normal_line(a, b);
    }
    arc_on_axis(a, b, 2.0)
}

/// `(μ, σ, μ̇, σ̇)` along a geodesic of the normal family.
pub type NormalState = [f64; 4];

/// Geodesic equations from the Christoffel symbols of `diag(1/σ², 2/σ²)`.
fn normal_rhs(s: &NormalState) -> NormalState {
    let [_, sigma, dm, ds] = *s;
    [dm, ds, 2.0 * dm * ds / sigma, -dm * dm / (2.0 * sigma) + ds * ds / sigma]
}

fn rk4<const N: usize>(s: &[f64; N], h: f64, f: impl Fn(&[f64; N]) -> [f64; N]) -> [f64; N] {
    let add = |a: &[f64; N], b: &[f64; N], w: f64| -> [f64; N] { core::array::from_fn(|i| a[i] + w * b[i]) };
    let k1 = f(s);
    let k2 = f(&add(s, &k1, 0.5 * h));
    let k3 = f(&add(s, &k2, 0.5 * h));
    let k4 = f(&add(s, &k3, h));
    core::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Unit-speed initial velocity at `(μ, σ)` in direction `φ`.
pub fn normal_unit_velocity(sigma: f64, phi: f64) -> (f64, f64) {
    (sigma * phi.cos(), sigma * phi.sin() / SQRT_2)
}

/// Follow the unit-speed geodesic leaving `center` in direction `φ` for arc
/// length `length`, with classic RK4 and at most `length / 1000` per step.
pub fn normal_geodesic_endpoint(center: (f64, f64), phi: f64, length: f64) -> Result<(f64, f64)> {
    check_normal_point(center)?;
    if !(length >= 0.0) || !length.is_finite() {
        return Err(Error::InvalidArgument("geodesic length must be finite and non-negative"));
    }
    if length == 0.0 {
        return Ok(center);
    }
    let steps = 1000usize;
    let h = length / steps as f64;
    let (vm, vs) = normal_unit_velocity(center.1, phi);
    let mut s: NormalState = [center.0, center.1, vm, vs];
    for _ in 0..steps {
        s = rk4(&s, h, normal_rhs);
        if !(s[1] > 0.0) || s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Ode("left the half-plane σ > 0"));
        }
    }
    Ok((s[0], s[1]))
}

/// Direction `φ` of the geodesic from `from` towards `to`.
pub fn normal_direction_towards(from: (f64, f64), to: (f64, f64)) -> Result<f64> {
    check_normal_point(from)?;
    check_normal_point(to)?;
    let (dm, ds) = if from.0 == to.0 {
        (0.0, (to.1 - from.1).signum())
    } else {
        let c = (to.0 * to.0 + 2.0 * to.1 * to.1 - from.0 * from.0 - 2.0 * from.1 * from.1) / (2.0 * (to.0 - from.0));
        let dir = (to.0 - from.0).signum();
        (dir, -dir * (from.0 - c) / (2.0 * from.1))
    };
    // v ∝ (σ cos φ, σ sin φ / √2)
    Ok((SQRT_2 * ds).atan2(dm))
}

/// Endpoints of `n_rays` geodesics of length `radius` leaving `center` at
/// equally spaced angles; the points lie on the geodesic sphere.
pub fn geodesic_ball_normal(center: (f64, f64), radius: f64, n_rays: usize) -> Result<Vec<(f64, f64)>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive"));
    }
    if n_rays == 0 {
        return Err(Error::InvalidArgument("need at least one ray"));
    }
    (0..n_rays)
        .map(|i| {
            let phi = 2.0 * core::f64::consts::PI * i as f64 / n_rays as f64;
            normal_geodesic_endpoint(center, phi, radius)
        })
        .collect()
}

/// A geodesic found by shooting, parametrized over `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    pub initial_velocity: DVector<f64>,
    /// Path samples at equally spaced `t`.
    pub points: Vec<DVector<f64>>,
    /// Arc length, constant speed times unit time.
    pub length: f64,
    pub miss: f64,
    pub iterations: usize,
}

/// Integrate `ẍᵃ = −Γᵃ_bc ẋᵇ ẋᶜ` over `t ∈ [0, 1]` with `steps` RK4 steps.
pub fn integrate_geodesic<G: MetricField>(
    g: &G,
    start: &[f64],
    velocity: &[f64],
    steps: usize,
) -> Result<Vec<(DVector<f64>, DVector<f64>)>> {
    let k = start.len();
    let rhs = |x: &DVector<f64>, v: &DVector<f64>| -> Result<(DVector<f64>, DVector<f64>)> {
        let gamma = christoffel(g, x.as_slice())?;
        let acc = DVector::from_iterator(k, gamma.iter().map(|ga| -linalg::quad_form(v, ga)));
        Ok((v.clone(), acc))
    };
    let h = 1.0 / steps as f64;
    let mut x = DVector::from_column_slice(start);
    let mut v = DVector::from_column_slice(velocity);
    let mut path = Vec::with_capacity(steps + 1);
    path.push((x.clone(), v.clone()));
    for _ in 0..steps {
        let (k1x, k1v) = rhs(&x, &v)?;
        let (k2x, k2v) = rhs(&(&x + &k1x * (0.5 * h)), &(&v + &k1v * (0.5 * h)))?;
        let (k3x, k3v) = rhs(&(&x + &k2x * (0.5 * h)), &(&v + &k2v * (0.5 * h)))?;
        let (k4x, k4v) = rhs(&(&x + &k3x * h), &(&v + &k3v * h))?;
        x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        if x.iter().chain(v.iter()).any(|c| !c.is_finite()) {
            return Err(Error::Ode("non-finite state"));
        }
        path.push((x.clone(), v.clone()));
    }
    Ok(path)
}

/// Geodesic between `a` and `b` by Newton iteration on the initial velocity.
pub fn shoot_geodesic<G: MetricField>(g: &G, a: &[f64], b: &[f64], steps: usize) -> Result<Geodesic> {
    let k = a.len();
    if b.len() != k || g.dim() != k {
        return Err(Error::DimensionMismatch { expected: k, got: b.len() });
    }
    let target = DVector::from_column_slice(b);
    let end = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let path = integrate_geodesic(g, a, v.as_slice(), steps)?;
        Ok(&path[steps].0 - &target)
    };
    let mut v = &target - DVector::from_column_slice(a);
    let mut miss = end(&v)?;
    let mut iterations = 0;
    while miss.norm() > 1e-11 && iterations < 50 {
        iterations += 1;
        let jac = diff::jacobian(|w| end(&DVector::from_column_slice(w)), v.as_slice())?;
        let step = linalg::lu_solve(&jac, &(-&miss))?;
        let mut scale = 1.0;
        loop {
            let trial = &v + &step * scale;
            if let Ok(m) = end(&trial) {
                if m.norm() < miss.norm() || scale < 1e-6 {
                    v = trial;
                    miss = m;
                    break;
                }
            }
            scale *= 0.5;
            if scale < 1e-9 {
                return Err(Error::Ode("shooting did not converge"));
            }
        }
    }
    let path = integrate_geodesic(g, a, v.as_slice(), steps)?;
    let speed = linalg::quad_form(&v, &g.metric(a)?).sqrt();
    Ok(Geodesic {
        initial_velocity: v,
        points: path.into_iter().map(|(x, _)| x).collect(),
        length: speed,
        miss: miss.norm(),
        iterations,
    })
}

/// `Jᵀ g J` for a linear chart `θ = B φ`; used by tests and the CLI to check
/// invariance without building a full [`crate::metric::Chart`].
pub fn linear_pullback(g: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    linalg::symmetrize(&(b.transpose() * g * b))
}
