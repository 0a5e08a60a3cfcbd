//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::{PI, SQRT_2};
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use infogeom::reproduce::{normal_paths_reference, table1_rows, CFA_SCENARIOS, CFA_SIM_PUBLISHED, TWOPL_SEEDS, TWOPL_TRUTH};
use infogeom::simulate::simulate;
use infogeom_core::cef::Reparametrized;
use infogeom_core::curvature::{
    gamma2_analytic, gamma2_cfa_closed_form, run_replicate, scalar_curvature, sphere_embedding_check,
};
use infogeom_core::families::{Cfa3, Normal1D, RaschTest, TwoPLGrouped};
use infogeom_core::geometry::{
    arc_length, distinguishability, geodesic_distance_normal, kl_divergence, line_element, normal_circle_arc,
    normal_ellipse_arc, normal_line, Curve,
};
use infogeom_core::inference::{jeffreys_prior, OptimizerConfig};
use infogeom_core::irt_scale::{ability_limit, ability_se, flatten, geodesic_ability, geodesic_ability_closed_form};
use infogeom_core::metric::{pullback_metric, Chart, FisherMetric, FnMetric};
use infogeom_core::model::ExpectationConfig;
use infogeom_core::{Domain, Interval};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one criterion: the failures found, plus a one-line summary.
struct Outcome {
    failures: Vec<String>,
    summary: String,
}

#[derive(Default)]
struct Checker {
    failures: Vec<String>,
    worst: Vec<(String, f64)>,
}

impl Checker {
    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs();
        if !(err <= tol) {
            self.failures.push(format!("{what}: got {got:.9}, want {want:.9} (tol {tol:e})"));
        }
        self.record(what, err);
    }

    fn rel(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs() / want.abs();
        if !(err <= tol) {
            self.failures.push(format!("{what}: got {got:.9}, want {want:.9} (rel tol {tol:e})"));
        }
        self.record(what, err);
    }

    fn holds(&mut self, what: &str, ok: bool, detail: String) {
        if !ok {
            self.failures.push(format!("{what}: {detail}"));
        }
    }

    fn within(&mut self, what: &str, elapsed: Duration, limit: Duration) {
        self.holds(what, elapsed <= limit, format!("took {elapsed:.2?}, limit {limit:?}"));
    }

    fn record(&mut self, what: &str, err: f64) {
        let key = what.split(':').next().unwrap_or(what).to_string();
        match self.worst.iter_mut().find(|(k, _)| *k == key) {
            Some((_, e)) => *e = e.max(err),
            None => self.worst.push((key, err)),
        }
    }

    fn finish(self, extra: &str) -> Outcome {
        let mut parts: Vec<String> = self.worst.iter().map(|(k, e)| format!("{k} {e:.1e}")).collect();
        if !extra.is_empty() {
            parts.push(extra.to_string());
        }
        Outcome { failures: self.failures, summary: parts.join("; ") }
    }
}

fn criterion_1() -> Outcome {
    let mut c = Checker::default();
    let start = Instant::now();
    let (a, b) = ((0.0, 1.0), (2.0, SQRT_2));
    let g = FisherMetric::new(&Normal1D);
    for (name, curve, want) in [
        ("line", normal_line(a, b).unwrap(), 1.744),
        ("circle", normal_circle_arc(a, b).unwrap(), 1.697),
        ("ellipse", normal_ellipse_arc(a, b).unwrap(), 1.656),
    ] {
        let len = arc_length(&g, &curve, 1e-12).unwrap().value;
        c.close(&format!("{name} length"), len, want, 1e-3);
    }
    let d = geodesic_distance_normal(a, b);
    c.close("closed form vs reference", d, normal_paths_reference(), 1e-6);
    c.close("closed form vs 1.656", d, 1.656, 1e-3);
    let elapsed = start.elapsed();
    c.within("runtime", elapsed, Duration::from_secs(1));
    c.finish(&format!("{elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let mut c = Checker::default();
    let start = Instant::now();
    let rows = table1_rows().unwrap();
    c.holds("row count", rows.len() == 10, format!("{} rows", rows.len()));
    for r in &rows {
        c.close(&format!("row {} {}", r.row, r.model), r.computed, r.expected, r.tolerance);
    }
    let elapsed = start.elapsed();
    c.within("runtime", elapsed, Duration::from_secs(30));
    let passed = rows.iter().filter(|r| r.pass).count();
    let mut o = c.finish("");
    o.summary = format!("{passed}/10 rows within 1e-2; {elapsed:.2?}");
    o
}

fn criterion_3() -> Outcome {
    let mut c = Checker::default();
    for m in [1usize, 5, 20] {
        let test = RaschTest::equal(m).unwrap();
        for i in 0..=120 {
            let theta = -6.0 + 0.1 * f64::from(i);
            let a = geodesic_ability(&test, theta).unwrap();
            let a0 = geodesic_ability_closed_form(m, theta).unwrap();
            c.close(&format!("A vs A0: m={m} theta={theta:.1}"), a, a0, 1e-8);
        }
        c.close(&format!("upper limit: m={m}"), geodesic_ability(&test, 60.0).unwrap(), ability_limit(m), 1e-6);
        c.close(&format!("lower limit: m={m}"), geodesic_ability(&test, -60.0).unwrap(), 0.0, 1e-6);
    }
    // ξ = e^θ chart: the pulled-back metric is I(log ξ)/ξ²
    let test = RaschTest::new(vec![-1.0, 0.0, 1.0, 2.5]).unwrap();
    let t2 = test.clone();
    let g_xi = FnMetric::new(1, move |x: &[f64]| Ok(DMatrix::from_element(1, 1, t2.test_information(x[0].ln()) / (x[0] * x[0]))));
    for (t0, t1) in [(-3.0, 2.0), (-0.5, 0.5), (0.0, 4.0), (-5.0, -1.0)] {
        let via_xi = arc_length(&g_xi, &Curve::line(&[f64::exp(t0)], &[f64::exp(t1)]).unwrap(), 1e-12).unwrap().value;
        let direct = flatten(&test, t0, t1).unwrap();
        c.close(&format!("xi chart: [{t0}, {t1}]"), via_xi, direct, 1e-6);
    }
    let test = RaschTest::equal(5).unwrap();
    for i in 0..=24 {
        let theta = -6.0 + 0.5 * f64::from(i);
        let se = ability_se(&test, theta).unwrap();
        c.close(&format!("delta-method SE: theta={theta}"), se.delta_method, 1.0, 1e-12);
        c.close(&format!("printed SE: theta={theta}"), se.printed_convention, 2.0, 1e-12);
    }
    c.finish("")
}

fn criterion_4() -> Outcome {
    let mut c = Checker::default();
    let spec = Cfa3::new(30).unwrap();
    for &l in &[0.5, 1.0, 2.0] {
        for &t in &[0.7, 1.0, 3.0] {
            for &s in &[0.5, 1.0, SQRT_2] {
                let got = gamma2_analytic(&spec, &[l, t, s]).unwrap().gamma2;
                let want = gamma2_cfa_closed_form(l, t, s, 30.0);
                c.rel(&format!("grid: ({l}, {t}, {s})"), got, want, 1e-6);
            }
        }
    }
    let n = 25.0;
    c.rel("sigma -> 0: n=25", gamma2_cfa_closed_form(1.0, 1.0, 1e-4, n), 4.0 / n, 1e-3);
    c.rel("lambda, tau -> inf: n=25", gamma2_cfa_closed_form(1e3, 1e3, 1.0, n), 38.0 / (27.0 * n), 1e-3);
    c.close("0.0563 at n=25", 38.0 / (27.0 * n), 0.0563, 5e-5);
    let published = [(30usize, [0.083, 0.055, 0.098]), (50, [0.050, 0.033, 0.059])];
    for (n, values) in published {
        let spec = Cfa3::new(n).unwrap();
        for (th, want) in CFA_SCENARIOS.iter().zip(values) {
            let got = gamma2_analytic(&spec, th).unwrap().gamma2;
            c.close(&format!("scenario: n={n} {th:?}"), got, want, 1e-3);
        }
    }
    c.finish("")
}

fn criterion_5() -> Outcome {
    let mut c = Checker::default();
    let spec = Cfa3::new(30).unwrap();
    let cfg = OptimizerConfig::default();
    let start = Instant::now();
    let mut line = Vec::new();
    for (th, (g, w)) in CFA_SCENARIOS.iter().zip(CFA_SIM_PUBLISHED) {
        let (rep, _) = simulate(&spec, th, 1000, 1, &cfg).unwrap();
        c.rel(&format!("gamma2 harmonic: {th:?}"), rep.gamma2_harmonic, g, 0.15);
        c.rel(&format!("omega2 harmonic: {th:?}"), rep.omega2_harmonic, w, 0.15);
        line.push(format!("{:.3}/{:.3}", rep.gamma2_harmonic, rep.omega2_harmonic));
    }
    let elapsed = start.elapsed();
    c.within("runtime", elapsed, Duration::from_secs(180));
    let (a, ra) = simulate(&spec, &CFA_SCENARIOS[0], 50, 7, &cfg).unwrap();
    let (b, rb) = simulate(&spec, &CFA_SCENARIOS[0], 50, 7, &cfg).unwrap();
    let same = a.gamma2_harmonic.to_bits() == b.gamma2_harmonic.to_bits()
        && a.omega2_harmonic.to_bits() == b.omega2_harmonic.to_bits()
        && ra == rb;
    c.holds("determinism", same, "two runs with seed 7 differ".into());
    c.finish(&format!("gamma2/omega2 {}; {elapsed:.2?}", line.join(", ")))
}

fn criterion_6() -> Outcome {
    let mut c = Checker::default();
    let spec = TwoPLGrouped::new(500, 20).unwrap();
    let cfg = OptimizerConfig::default();
    let mut max_g = 0.0f64;
    let mut min_w = f64::INFINITY;
    for s in 0..TWOPL_SEEDS {
        let r = run_replicate(&spec, &TWOPL_TRUTH, 1, s, &cfg);
        c.holds(&format!("converged: seed {}", r.seed), r.converged, "fit did not converge".into());
        c.holds(&format!("gamma2 < 1e-6: seed {}", r.seed), r.gamma2 < 1e-6, format!("gamma2 = {:.3e}", r.gamma2));
        c.holds(&format!("omega2 > 10: seed {}", r.seed), r.omega2 > 10.0, format!("omega2 = {:.3e}", r.omega2));
        max_g = max_g.max(r.gamma2);
        min_w = min_w.min(r.omega2);
    }
    let mut o = c.finish("");
    o.summary = format!("max gamma2 {max_g:.3e}, min omega2 {min_w:.3e} over {TWOPL_SEEDS} seeds");
    o
}

fn log_sigma_chart() -> Chart {
    Chart::new(2, |p| Ok(DVector::from_vec(vec![p[0], p[1].exp()])))
}

fn criterion_7() -> Outcome {
    let mut c = Checker::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = FisherMetric::new(&Normal1D);
    let pb = pullback_metric(FisherMetric::new(&Normal1D), log_sigma_chart()).unwrap();
    let ecfg = ExpectationConfig::default();
    for _ in 0..10 {
        let (mu, s) = (rng.random_range(-2.0..2.0), rng.random_range(0.3..3.0));
        let (dm, ds) = (rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
        let base = line_element(&g, &[mu, s], &[dm, ds]).unwrap();
        let other = line_element(&pb, &[mu, s.ln()], &[dm, ds / s]).unwrap();
        c.rel("ds2 chart", other, base, 1e-8);

        let (m1, s1) = (rng.random_range(-2.0..2.0), rng.random_range(0.3..3.0));
        let direct = arc_length(&g, &Curve::line(&[mu, s], &[m1, s1]).unwrap(), 1e-10).unwrap().value;
        let mapped = Curve::new(0.0, 1.0, move |t| {
            DVector::from_vec(vec![mu + t * (m1 - mu), (s + t * (s1 - s)).ln()])
        })
        .unwrap();
        let via = arc_length(&pb, &mapped, 1e-10).unwrap().value;
        c.close("arc length chart", via, direct, 1e-7);

        let (a, b) = (rng.random_range(0.2..5.0), rng.random_range(-3.0..3.0));
        let d = geodesic_distance_normal((mu, s), (m1, s1));
        c.close("geodesic distance affine", geodesic_distance_normal((a * mu + b, a * s), (a * m1 + b, a * s1)), d, 1e-9 * d.max(1.0));

        let r0 = scalar_curvature(&g, &[mu, s]).unwrap();
        let r1 = scalar_curvature(&pb, &[mu, s.ln()]).unwrap();
        c.close("scalar curvature chart", r1, r0, 1e-3);

        let j0 = jeffreys_prior(&g, &[mu, s]).unwrap() * s;
        let j1 = jeffreys_prior(&pb, &[mu, s.ln()]).unwrap();
        c.rel("Jeffreys rule chart", j1, j0, 1e-8);

        // KL against ½ds² along a shrinking displacement
        let (ux, uy) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mut prev = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3] {
            let dv = [ux * eps * s, uy * eps * s];
            let kl = kl_divergence(&Normal1D, &[mu, s], &[mu + dv[0], s + dv[1]], &ecfg).unwrap();
            let half = 0.5 * line_element(&g, &[mu, s], &dv).unwrap();
            let rel = (kl - half).abs() / half;
            c.holds("KL = ds2/2", rel < 10.0 * eps, format!("relative error {rel:.2e} at eps {eps}"));
            c.holds("KL error shrinks", rel <= prev, format!("{rel:.2e} after {prev:.2e}"));
            prev = rel;
        }
    }
    let test = RaschTest::new(vec![-1.0, 0.5, 2.0]).unwrap();
    let t2 = test.clone();
    let g_xi = FnMetric::new(1, move |x: &[f64]| Ok(DMatrix::from_element(1, 1, t2.test_information(x[0].ln()) / (x[0] * x[0]))));
    let cfa = Cfa3::new(30).unwrap();
    let re = Reparametrized {
        base: &cfa,
        to_base: |p: &[f64]| vec![p[0].exp(), p[1], p[2].exp()],
        domain: Domain::new(vec![Interval::REAL, Interval::REAL, Interval::REAL]),
    };
    for _ in 0..8 {
        let (t0, t1) = (rng.random_range(-4.0..0.0), rng.random_range(0.0..4.0));
        let via = arc_length(&g_xi, &Curve::line(&[f64::exp(t0)], &[f64::exp(t1)]).unwrap(), 1e-12).unwrap().value;
        let ability = geodesic_ability(&test, t1).unwrap() - geodesic_ability(&test, t0).unwrap();
        c.close("ability chart", via, ability, 1e-6);

        let th = [rng.random_range(0.3..2.5), rng.random_range(-2.0..2.0), rng.random_range(0.4..2.0)];
        let base = gamma2_analytic(&cfa, &th).unwrap().gamma2;
        let v = gamma2_analytic(&re, &[th[0].ln(), th[1], th[2].ln()]).unwrap().gamma2;
        c.rel("gamma2 chart", v, base, 1e-6);

        let theta = rng.random_range(-3.0..3.0);
        let d = rng.random_range(1e-3..1e-2);
        let r = distinguishability(&test, &[theta], &[d], &ecfg).unwrap();
        let ds2 = test.test_information(theta) * d * d;
        c.close("Rasch E[delta]", r.mean_delta, 0.0, 1e-13);
        c.rel("Rasch E[delta^2]", r.mean_delta_sq, ds2, 0.05);
    }
    c.finish("")
}

fn criterion_8() -> Outcome {
    let mut c = Checker::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut interior = |m: usize| -> Vec<f64> {
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        w[..m - 1].iter().map(|x| x / total).collect()
    };
    for m in [2usize, 3, 4, 6] {
        for n in [1u32, 10, 50] {
            for _ in 0..5 {
                let (p, q) = (interior(m), interior(m));
                let chk = sphere_embedding_check(m, n, &p, &q).unwrap();
                c.close(&format!("great circle: M={m}"), chk.fisher_length, chk.sphere_distance, 1e-6);
            }
        }
    }
    // M = 2 vertices sit a quarter circle apart on the radius-2 sphere
    let chk = sphere_embedding_check(2, 4, &[0.5], &[0.5]).unwrap();
    c.close("identical points", chk.sphere_distance, 0.0, 1e-12);
    let chk = sphere_embedding_check(2, 1, &[1e-9], &[1.0 - 1e-9]).unwrap();
    c.close("near-opposite vertices", chk.sphere_distance, PI, 1e-3);
    c.finish("")
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "normal path distances", criterion_1),
        (2, "scalar curvature table", criterion_2),
        (3, "geodesic ability scale", criterion_3),
        (4, "one-factor statistical curvature", criterion_4),
        (5, "curvature simulation harness", criterion_5),
        (6, "2PL curvature magnitudes", criterion_6),
        (7, "reparametrization invariance", criterion_7),
        (8, "multinomial sphere isometry", criterion_8),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == &id.to_string()) {
            continue;
        }
        match panic::catch_unwind(AssertUnwindSafe(run)) {
            Ok(o) if o.failures.is_empty() => println!("criterion {id} PASS {name}: {}", o.summary),
            Ok(o) => {
                failed += 1;
                println!("criterion {id} FAIL {name}: {}", o.summary);
                for f in o.failures.iter().take(12) {
                    println!("    {f}");
                }
                if o.failures.len() > 12 {
                    println!("    ... {} more", o.failures.len() - 12);
                }
            }
            Err(_) => {
                failed += 1;
                println!("criterion {id} FAIL {name}: panicked");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
