//! Intrinsic and statistical curvature.
//!
//! Intrinsic curvature is computed from any [`MetricField`] by finite
//! differences: Christoffel symbols, then the Riemann tensor, Ricci tensor and
//! scalar curvature. Statistical curvature `γ²` of a curved exponential family
//! is computed two ways: at a parameter value from the tangent and normal
//! frames of the embedding, and at the maximum likelihood estimate from a QR
//! factorization of the whitened tangent vectors, which also yields the
//! parameter-effects curvature `ω²`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cef::CurvedExpFamily;
use crate::geometry::{arc_length, Curve};
use crate::inference::{fit_cef, OptimizerConfig};
use crate::metric::FnMetric;
use crate::{diff, linalg, Error, MetricField, Result};

/// Rule of thumb: `γ²` above this is considered high.
pub const HIGH_CURVATURE: f64 = 0.125;

/// Relative `g`-norm below which a Gram-Schmidt candidate is dropped.
pub const GRAM_SCHMIDT_DROP: f64 = 1e-10;

fn shifted(theta: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    t[i] += h;
    t
}

fn breakdown(e: Error) -> Error {
    match e {
        Error::Domain { .. } => Error::StepBreakdown,
        other => other,
    }
}

/// `Γᵃ_bc` with central-difference metric derivatives using per-coordinate
/// steps `h`. Entry `a` of the result is the symmetric matrix `(Γᵃ_bc)_bc`.
pub fn christoffel_with_steps<G: MetricField>(g: &G, theta: &[f64], h: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let k = theta.len();
    if g.dim() != k || h.len() != k {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: theta.len() });
    }
    let gm = g.metric(theta)?;
    let gi = linalg::spd_inverse(&gm)?;
    let mut dg = Vec::with_capacity(k);
    for c in 0..k {
        let p = g.metric(&shifted(theta, c, h[c])).map_err(breakdown)?;
        let m = g.metric(&shifted(theta, c, -h[c])).map_err(breakdown)?;
        dg.push((p - m) / (2.0 * h[c]));
    }
    // first-kind symbols Γ_dbc = ½(∂_b g_dc + ∂_c g_db − ∂_d g_bc)
    let first = |d: usize, b: usize, c: usize| 0.5 * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
    let mut out = Vec::with_capacity(k);
    for a in 0..k {
        let mut m = DMatrix::zeros(k, k);
        for b in 0..k {
            for c in b..k {
                let v: f64 = (0..k).map(|d| gi[(a, d)] * first(d, b, c)).sum();
                m[(b, c)] = v;
                m[(c, b)] = v;
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Christoffel symbols of the second kind with the default first-derivative steps.
pub fn christoffel<G: MetricField>(g: &G, theta: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let h: Vec<f64> = theta.iter().map(|&x| diff::first_step(x)).collect();
    christoffel_with_steps(g, theta, &h)
}

/// Scalar curvature at one step size.
fn scalar_curvature_at_step<G: MetricField>(g: &G, theta: &[f64], h: &[f64]) -> Result<f64> {
    let k = theta.len();
    let gamma = christoffel_with_steps(g, theta, h)?;
    let mut dgamma = Vec::with_capacity(k);
    for d in 0..k {
        let p = christoffel_with_steps(g, &shifted(theta, d, h[d]), h).map_err(breakdown)?;
        let m = christoffel_with_steps(g, &shifted(theta, d, -h[d]), h).map_err(breakdown)?;
        let diffs: Vec<DMatrix<f64>> = p.iter().zip(&m).map(|(x, y)| (x - y) / (2.0 * h[d])).collect();
        dgamma.push(diffs);
    }
    // Rᵃ_bcd = ∂_c Γᵃ_db − ∂_d Γᵃ_cb + Γᵃ_ce Γᵉ_db − Γᵃ_de Γᵉ_cb
    let riemann = |a: usize, b: usize, c: usize, d: usize| -> f64 {
        let mut v = dgamma[c][a][(d, b)] - dgamma[d][a][(c, b)];
        for e in 0..k {
            v += gamma[a][(c, e)] * gamma[e][(d, b)] - gamma[a][(d, e)] * gamma[e][(c, b)];
        }
        v
    };
    let gi = linalg::spd_inverse(&g.metric(theta)?)?;
    let mut r = 0.0;
    for b in 0..k {
        for d in 0..k {
            let ricci: f64 = (0..k).map(|a| riemann(a, b, a, d)).sum();
            r += gi[(b, d)] * ricci;
        }
    }
    Ok(r)
}

/// Scalar curvature with the two step sizes used for extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarCurvature {
    pub value: f64,
    pub coarse: f64,
    pub fine: f64,
}

/// Step for the nested differences in coordinate `x`.
fn curvature_step(x: f64) -> f64 {
    1e-3 * x.abs().max(0.1)
}

pub fn scalar_curvature_detailed<G: MetricField>(g: &G, theta: &[f64]) -> Result<ScalarCurvature> {
    if theta.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: theta.len() });
    }
    if theta.len() == 1 {
        g.metric(theta)?;
        return Ok(ScalarCurvature { value: 0.0, coarse: 0.0, fine: 0.0 });
    }
    let h: Vec<f64> = theta.iter().map(|&x| curvature_step(x)).collect();
    let half: Vec<f64> = h.iter().map(|x| 0.5 * x).collect();
    let coarse = scalar_curvature_at_step(g, theta, &h)?;
    let fine = scalar_curvature_at_step(g, theta, &half)?;
    let value = (4.0 * fine - coarse) / 3.0;
    if !value.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(ScalarCurvature { value, coarse, fine })
}

/// Scalar curvature `R(θ)`; identically zero in one dimension.
pub fn scalar_curvature<G: MetricField>(g: &G, theta: &[f64]) -> Result<f64> {
    scalar_curvature_detailed(g, theta).map(|s| s.value)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Condition number of the ambient metric `∇²Ψ`.
    pub metric_condition: f64,
    /// Condition number of the induced metric `η̇ᵀ ∇²Ψ η̇`.
    pub induced_condition: f64,
    pub gram_schmidt_drops: usize,
    /// Diagonal jitter retries needed by the Cholesky factorization.
    pub cholesky_retries: usize,
    pub converged: bool,
    pub iterations: usize,
    /// `γ² > 0.125`.
    pub high_curvature: bool,
    /// `8γ²`, the sample size rule of thumb for washing out curvature effects.
    pub washout_sample_size: f64,
    /// `γ²` from the other pipeline at the same point, as a cross-check.
    pub cross_check_gamma2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub at_point: Vec<f64>,
    pub gamma2: f64,
    pub omega2: f64,
    /// Scalar curvature of the induced metric, when it could be evaluated.
    pub scalar_r: Option<f64>,
    pub diagnostics: Diagnostics,
}

struct Frame {
    jac: DMatrix<f64>,
    hess: Vec<DVector<f64>>,
    ambient: DMatrix<f64>,
    induced: DMatrix<f64>,
}

fn frame<C: CurvedExpFamily>(spec: &C, theta: &[f64]) -> Result<Frame> {
    spec.domain().check(theta)?;
    let (k, q) = (spec.k(), spec.q());
    let eta = spec.eta(theta)?;
    let jac = spec.eta_jacobian(theta)?;
    if jac.shape() != (k, q) {
        return Err(Error::DimensionMismatch { expected: k * q, got: jac.len() });
    }
    let hess = spec.eta_hessians(theta)?;
    let ambient = linalg::symmetrize(&spec.log_partition_hessian(&eta)?);
    let induced = linalg::symmetrize(&(jac.transpose() * &ambient * &jac));
    if linalg::is_rank_deficient(&induced) {
        return Err(Error::RankDeficient);
    }
    Ok(Frame { jac, hess, ambient, induced })
}

/// Basis of the `g`-orthogonal complement of the tangent space, by modified
/// Gram-Schmidt seeded with the standard basis after projecting out the
/// tangent frame. Returns the basis and the number of dropped candidates.
fn normal_frame(f: &Frame) -> Result<(Vec<DVector<f64>>, usize)> {
    let (k, q) = f.jac.shape();
    let gi = linalg::spd_inverse(&f.induced)?;
    let projector = &f.jac * gi * f.jac.transpose() * &f.ambient;
    let gnorm = |v: &DVector<f64>| linalg::quad_form(v, &f.ambient).max(0.0).sqrt();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k - q);
    let mut drops = 0;
    for i in 0..k {
        let seed = DVector::from_fn(k, |r, _| if r == i { 1.0 } else { 0.0 });
        let scale = gnorm(&seed);
        let mut v = &seed - &projector * &seed;
        for u in &basis {
            let c = (u.transpose() * &f.ambient * &v)[(0, 0)];
            v -= u * c;
        }
        let n = gnorm(&v);
        if n > GRAM_SCHMIDT_DROP * scale && basis.len() < k - q {
            basis.push(v / n);
        } else {
            drops += 1;
        }
    }
    if basis.len() != k - q {
        return Err(Error::GramSchmidt { expected: k - q, got: basis.len() });
    }
    Ok((basis, drops))
}

/// `γ²` from the tangent and normal frames of the embedding at `θ`.
fn gamma2_from_frame(f: &Frame, normals: &[DVector<f64>]) -> Result<f64> {
    let q = f.jac.ncols();
    let r = normals.len();
    let gi = linalg::spd_inverse(&f.induced)?;
    let gu: Vec<DVector<f64>> = normals.iter().map(|u| &f.ambient * u).collect();
    let gstar = DMatrix::from_fn(r, r, |i, j| normals[i].dot(&gu[j]));
    let gsi = linalg::spd_inverse(&gstar)?;
    let h = |a: usize, b: usize, s: usize| f.hess[a * q + b].dot(&gu[s]);
    let mut total = 0.0;
    for a in 0..q {
        for b in 0..q {
            for rr in 0..r {
                let hab = h(a, b, rr);
                if hab == 0.0 {
                    continue;
                }
                for c in 0..q {
                    for d in 0..q {
                        let w = gi[(a, c)] * gi[(b, d)];
                        if w == 0.0 {
                            continue;
                        }
                        for s in 0..r {
                            total += hab * h(c, d, s) * w * gsi[(rr, s)];
                        }
                    }
                }
            }
        }
    }
    Ok(total.max(0.0))
}

/// `(γ², ω², cholesky retries)` from the whitened QR construction at `θ`.
fn table3_from_frame(f: &Frame) -> Result<(f64, f64, usize)> {
    let (k, q) = f.jac.shape();
    let mut retries = 0;
    let mut g = f.ambient.clone();
    let l = loop {
        if let Some(c) = g.clone().cholesky() {
            break c.l();
        }
        if retries == 3 {
            return Err(Error::Singular("ambient metric Cholesky"));
        }
        retries += 1;
        let jitter = 1e-12 * f.ambient.trace().abs().max(1.0) / k as f64 * 10f64.powi(retries as i32);
        g = &f.ambient + DMatrix::identity(k, k) * jitter;
    };
    let lt = l.transpose();
    let y = &lt * &f.jac;
    let (qfull, rq) = linalg::full_qr(&y);
    let rinv = rq.try_inverse().ok_or(Error::RankDeficient)?;
    let rotate = qfull.transpose() * &lt;
    let w: Vec<DVector<f64>> = f.hess.iter().map(|e| &rotate * e).collect();
    let (mut gamma2, mut omega2) = (0.0, 0.0);
    for a in 0..q {
        for b in 0..q {
            let mut acc = DVector::zeros(k);
            for ap in 0..q {
                for bp in 0..q {
                    let c = rinv[(ap, a)] * rinv[(bp, b)];
                    if c != 0.0 {
                        acc += &w[ap * q + bp] * c;
                    }
                }
            }
            for m in 0..k {
                if m < q {
                    omega2 += acc[m] * acc[m];
                } else {
                    gamma2 += acc[m] * acc[m];
                }
            }
        }
    }
    Ok((gamma2, omega2, retries))
}

fn induced_scalar_curvature<C: CurvedExpFamily>(spec: &C, theta: &[f64]) -> Option<f64> {
    let g = FnMetric::new(spec.q(), |t: &[f64]| {
        spec.domain().check(t)?;
        let jac = spec.eta_jacobian(t)?;
        let amb = spec.log_partition_hessian(&spec.eta(t)?)?;
        Ok(linalg::symmetrize(&(jac.transpose() * amb * jac)))
    });
    scalar_curvature(&g, theta).ok()
}

fn report_at<C: CurvedExpFamily>(spec: &C, theta: &[f64], f: &Frame, primary_is_analytic: bool) -> Result<CurvatureReport> {
    let (normals, drops) = normal_frame(f)?;
    let analytic = gamma2_from_frame(f, &normals)?;
    let (numeric, omega2, retries) = table3_from_frame(f)?;
    let (gamma2, other) = if primary_is_analytic { (analytic, numeric) } else { (numeric, analytic) };
    Ok(CurvatureReport {
        at_point: theta.to_vec(),
        gamma2,
        omega2,
        scalar_r: induced_scalar_curvature(spec, theta),
        diagnostics: Diagnostics {
            metric_condition: linalg::condition_number(&f.ambient),
            induced_condition: linalg::condition_number(&f.induced),
            gram_schmidt_drops: drops,
            cholesky_retries: retries,
            converged: true,
            iterations: 0,
            high_curvature: gamma2 > HIGH_CURVATURE,
            washout_sample_size: 8.0 * gamma2,
            cross_check_gamma2: Some(other),
        },
    })
}

/// Statistical curvature at `θ` from the tangent vectors, the ambient metric
/// `∇²Ψ`, a `g`-orthonormal basis of the normal space and the second
/// derivatives of the embedding projected onto it.
pub fn gamma2_analytic<C: CurvedExpFamily>(spec: &C, theta: &[f64]) -> Result<CurvatureReport> {
    let f = frame(spec, theta)?;
    report_at(spec, theta, &f, true)
}

/// `γ²` and `ω²` at a given point by the whitened QR construction, without
/// fitting.
pub fn table3_at<C: CurvedExpFamily>(spec: &C, theta: &[f64]) -> Result<CurvatureReport> {
    let f = frame(spec, theta)?;
    report_at(spec, theta, &f, false)
}

/// Fit the model to `data` and evaluate `γ²` and `ω²` at the estimate. A fit
/// that does not converge is reported with `converged = false` and
/// curvature values at the last iterate.
pub fn gamma2_numeric<C: CurvedExpFamily>(spec: &C, data: &C::Data, cfg: &OptimizerConfig) -> Result<CurvatureReport> {
    let fit = fit_cef(spec, data, cfg)?;
    let mut report = table3_at(spec, &fit.theta)?;
    report.diagnostics.converged = fit.converged;
    report.diagnostics.iterations = fit.iterations;
    Ok(report)
}

/// Closed-form statistical curvature of the three-item one-factor model.
pub fn gamma2_cfa_closed_form(lambda: f64, tau: f64, sigma: f64, n: f64) -> f64 {
    let t = tau * tau;
    let l = lambda * lambda;
    let s = sigma * sigma;
    let u = 1.0 + t + l;
    let p = |x: f64, e: i32| x.powi(e);
    let base = 16.0 + 128.0 * t + 448.0 * p(t, 2) + 896.0 * p(t, 3) + 1120.0 * p(t, 4) + 896.0 * p(t, 5)
        + 448.0 * p(t, 6) + 128.0 * p(t, 7) + 16.0 * p(t, 8)
        + 128.0 * l + 896.0 * t * l + 2688.0 * p(t, 2) * l + 4480.0 * p(t, 3) * l + 4480.0 * p(t, 4) * l
        + 2688.0 * p(t, 5) * l + 896.0 * p(t, 6) * l + 128.0 * p(t, 7) * l
        + 448.0 * p(l, 2) + 2688.0 * t * p(l, 2) + 6720.0 * p(t, 2) * p(l, 2) + 8960.0 * p(t, 3) * p(l, 2)
        + 6720.0 * p(t, 4) * p(l, 2) + 2688.0 * p(t, 5) * p(l, 2) + 448.0 * p(t, 6) * p(l, 2)
        + 896.0 * p(l, 3) + 4480.0 * t * p(l, 3) + 8960.0 * p(t, 2) * p(l, 3) + 8960.0 * p(t, 3) * p(l, 3)
        + 4480.0 * p(t, 4) * p(l, 3) + 896.0 * p(t, 5) * p(l, 3)
        + 1120.0 * p(l, 4) + 4480.0 * t * p(l, 4) + 6720.0 * p(t, 2) * p(l, 4) + 4480.0 * p(t, 3) * p(l, 4)
        + 1120.0 * p(t, 4) * p(l, 4)
        + 896.0 * p(l, 5) + 2688.0 * t * p(l, 5) + 2688.0 * p(t, 2) * p(l, 5) + 896.0 * p(t, 3) * p(l, 5)
        + 448.0 * p(l, 6) + 896.0 * t * p(l, 6) + 448.0 * p(t, 2) * p(l, 6)
        + 128.0 * p(l, 7) + 128.0 * t * p(l, 7)
        + 16.0 * p(l, 8);
    let s1 = 32.0 * p(u, 7) * (3.0 + 2.0 * t + 2.0 * l);
    let s2 = 8.0 * p(u, 6) * (37.0 + 9.0 * p(t, 2) + 42.0 * l + 9.0 * p(l, 2) + 6.0 * t * (7.0 + 3.0 * l));
    let s3 = 16.0 * p(u, 6) * (36.0 + 17.0 * t + 17.0 * l);
    let s4 = 8.0 * p(u, 4) * (99.0 + 70.0 * p(t, 2) + 172.0 * l + 70.0 * p(l, 2) + 4.0 * t * (43.0 + 35.0 * l));
    let s5 = 4.0
        * p(u, 3)
        * (202.0 + 8.0 * p(t, 3) + 405.0 * l + 8.0 * p(l, 2) * (26.0 + l) + 8.0 * p(t, 2) * (26.0 + 3.0 * l)
            + t * (405.0 + 416.0 * l + 24.0 * p(l, 2)));
    let s6 = 2.0
        * p(u, 2)
        * (296.0 + 48.0 * p(t, 3) + 676.0 * l + 429.0 * p(l, 2) + 48.0 * p(l, 3) + 3.0 * p(t, 2) * (143.0 + 48.0 * l)
            + 2.0 * t * (338.0 + 429.0 * l + 72.0 * p(l, 2)));
    let s7 = 2.0
        * u
        * (138.0 + 48.0 * p(t, 3) + 353.0 * l + 266.0 * p(l, 2) + 48.0 * p(l, 3) + 2.0 * p(t, 2) * (133.0 + 72.0 * l)
            + t * (353.0 + 532.0 * l + 144.0 * p(l, 2)));
    let s8 = 63.0 + 32.0 * p(t, 3) + 174.0 * l + 146.0 * p(l, 2) + 32.0 * p(l, 3) + 2.0 * p(t, 2) * (73.0 + 48.0 * l)
        + 2.0 * t * (87.0 + 146.0 * l + 48.0 * p(l, 2));
    let numerator = base
        + s1 * s
        + s2 * p(s, 2)
        + s3 * p(s, 3)
        + s4 * p(s, 4)
        + s5 * p(s, 5)
        + s6 * p(s, 6)
        + s7 * p(s, 7)
        + s8 * p(s, 8);
    let d = 2.0 * p(u, 2) + 4.0 * p(u, 2) * s + (3.0 + 4.0 * t + 4.0 * l) * p(s, 2);
    2.0 * numerator / (n * p(u, 2) * p(d, 3))
}

/// Outcome of one simulated replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub index: usize,
    pub seed: u64,
    pub converged: bool,
    pub gamma2: f64,
    pub omega2: f64,
    pub theta_hat: Vec<f64>,
}

/// Seed of replicate `index`: `base_seed ⊕ index`.
pub fn replicate_seed(base_seed: u64, index: usize) -> u64 {
    base_seed ^ index as u64
}

/// Simulate one dataset at `theta_true` and evaluate the fitted curvature.
/// Numerical failures are reported as a non-converged replicate.
pub fn run_replicate<C: CurvedExpFamily>(
    spec: &C,
    theta_true: &[f64],
    base_seed: u64,
    index: usize,
    cfg: &OptimizerConfig,
) -> Replicate {
    let seed = replicate_seed(base_seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = spec.simulate(theta_true, &mut rng);
    match gamma2_numeric(spec, &data, cfg) {
        Ok(r) => Replicate {
            index,
            seed,
            converged: r.diagnostics.converged && r.gamma2.is_finite() && r.omega2.is_finite(),
            gamma2: r.gamma2,
            omega2: r.omega2,
            theta_hat: r.at_point,
        },
        Err(_) => Replicate {
            index,
            seed,
            converged: false,
            gamma2: f64::NAN,
            omega2: f64::NAN,
            theta_hat: Vec::new(),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub replicates: usize,
    pub converged: usize,
    pub gamma2_harmonic: f64,
    pub omega2_harmonic: f64,
    pub base_seed: u64,
}

/// `K / Σ 1/xⱼ`.
pub fn harmonic_mean(values: &[f64]) -> f64 {
    let s: f64 = values.iter().map(|v| 1.0 / v).sum();
    values.len() as f64 / s
}

/// Harmonic means over the converged replicates. The order of `reps` does
/// not matter beyond floating-point summation, which is done in index order.
pub fn summarize(reps: &[Replicate], base_seed: u64) -> Result<SimulationSummary> {
    let mut ok: Vec<&Replicate> = reps.iter().filter(|r| r.converged).collect();
    if ok.is_empty() {
        return Err(Error::AllReplicatesFailed(reps.len()));
    }
    ok.sort_by_key(|r| r.index);
    let g: Vec<f64> = ok.iter().map(|r| r.gamma2).collect();
    let w: Vec<f64> = ok.iter().map(|r| r.omega2).collect();
    Ok(SimulationSummary {
        replicates: reps.len(),
        converged: ok.len(),
        gamma2_harmonic: harmonic_mean(&g),
        omega2_harmonic: harmonic_mean(&w),
        base_seed,
    })
}

/// `K` replicates at `theta_true`, run sequentially.
pub fn curvature_simulation<C: CurvedExpFamily>(
    spec: &C,
    theta_true: &[f64],
    replicates: usize,
    base_seed: u64,
    cfg: &OptimizerConfig,
) -> Result<SimulationSummary> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate"));
    }
    spec.domain().check(theta_true)?;
    let reps: Vec<Replicate> = (0..replicates).map(|i| run_replicate(spec, theta_true, base_seed, i, cfg)).collect();
    summarize(&reps, base_seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereCheck {
    /// Great-circle distance on the sphere of radius `2√n`.
    pub sphere_distance: f64,
    /// Fisher arc length along the pulled-back great circle.
    pub fisher_length: f64,
    pub quadrature_error: f64,
}

/// Compare the great-circle distance between `2√n √π` and `2√n √π′` with the
/// multinomial Fisher length of the corresponding path in the simplex.
/// `pi` and `pi_other` hold the first `M − 1` probabilities.
pub fn sphere_embedding_check(categories: usize, trials: u32, pi: &[f64], pi_other: &[f64]) -> Result<SphereCheck> {
    use crate::families::MultinomialFamily;
    let fam = MultinomialFamily::new(categories, trials)?;
    fam.check(pi)?;
    fam.check(pi_other)?;
    let radius = 2.0 * f64::from(trials).sqrt();
    let u0 = DVector::from_iterator(categories, MultinomialFamily::full_probs(pi).into_iter().map(f64::sqrt));
    let u1 = DVector::from_iterator(categories, MultinomialFamily::full_probs(pi_other).into_iter().map(f64::sqrt));
    let chord = (&u1 - &u0).norm();
    let omega = 2.0 * (0.5 * chord).min(1.0).asin();
    let sphere_distance = radius * omega;
    if omega == 0.0 {
        return Ok(SphereCheck { sphere_distance, fisher_length: 0.0, quadrature_error: 0.0 });
    }
    let p = categories - 1;
    let s = omega.sin();
    let (a0, a1) = (u0.clone(), u1.clone());
    let slerp = move |t: f64| -> DVector<f64> { (&a0 * ((1.0 - t) * omega).sin() + &a1 * (t * omega).sin()) / s };
    let slerp2 = slerp.clone();
    let dslerp = move |t: f64| -> DVector<f64> {
        (&u0 * (-omega * ((1.0 - t) * omega).cos()) + &u1 * (omega * (t * omega).cos())) / s
    };
    let curve = Curve::new(0.0, 1.0, move |t| {
        let u = slerp(t);
        DVector::from_iterator(p, u.iter().take(p).map(|x| x * x))
    })?
    .with_derivative(move |t| {
        let (u, du) = (slerp2(t), dslerp(t));
        DVector::from_iterator(p, (0..p).map(|i| 2.0 * u[i] * du[i]))
    });
    let g = FnMetric::new(p, move |theta: &[f64]| {
        fam.check(theta)?;
        Ok(fam.fisher(theta))
    });
    let len = arc_length(&g, &curve, 1e-10)?;
    Ok(SphereCheck { sphere_distance, fisher_length: len.value, quadrature_error: len.error })
}
