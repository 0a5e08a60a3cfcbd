//! Reproduction targets: each computes a set of published quantities, writes
//! them as CSV/JSON artifacts and compares them against locked values.

use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};

use anyhow::Result;
use infogeom_core::curvature::{gamma2_analytic, run_replicate, gamma2_cfa_closed_form, scalar_curvature};
use infogeom_core::families::{Cfa3, MultinomialFamily, MvNormal, MvNormalVariant, Normal1D, RaschTest, TwoPLGrouped};
use infogeom_core::geometry::{
    arc_length, geodesic_ball_normal, geodesic_distance_normal, normal_circle_arc, normal_ellipse_arc, normal_line,
};
use infogeom_core::inference::{jeffreys_normalization, jeffreys_prior, OptimizerConfig};
use infogeom_core::irt_scale::{ability_grid, ability_limit, ability_se, geodesic_ability};
use infogeom_core::metric::{FisherMetric, FnMetric, Scaled};
use infogeom_core::{Domain, Interval, MetricField, ModelFamily};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{write_csv, write_json, RunManifest};
use crate::simulate::{simulate, ReplicateRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Table1,
    NormalPaths,
    AbilityGrid,
    CfaCurvature,
    CfaSim,
    Twopl,
    Jeffreys,
}

impl Target {
    pub const ALL: [Target; 7] = [
        Target::Table1,
        Target::NormalPaths,
        Target::AbilityGrid,
        Target::CfaCurvature,
        Target::CfaSim,
        Target::Twopl,
        Target::Jeffreys,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::Table1 => "table1",
            Target::NormalPaths => "normal-paths",
            Target::AbilityGrid => "ability-grid",
            Target::CfaCurvature => "cfa-curvature",
            Target::CfaSim => "cfa-sim",
            Target::Twopl => "twopl",
            Target::Jeffreys => "jeffreys",
        }
    }

    pub fn parse(s: &str) -> Option<Target> {
        Target::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// How a computed value is compared with its locked value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
    /// Computed must be strictly below the locked value.
    Below,
    /// Computed must be strictly above the locked value.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, computed: f64, expected: f64, tolerance: Tolerance) -> Self {
        let pass = computed.is_finite()
            && match tolerance {
                Tolerance::Absolute(t) => (computed - expected).abs() <= t,
                Tolerance::Relative(t) => (computed - expected).abs() <= t * expected.abs(),
                Tolerance::Below => computed < expected,
                Tolerance::Above => computed > expected,
            };
        Check { name: name.into(), computed, expected, tolerance, pass }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Check { name: name.into(), computed: v, expected: 1.0, tolerance: Tolerance::Absolute(0.0), pass: ok }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetReport {
    pub target: String,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
}

impl TargetReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub replicates: usize,
    pub tol: f64,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions { out_dir: PathBuf::from("out"), seed: 1, replicates: 1000, tol: 1e-10 }
    }
}

pub fn run(target: Target, opts: &ReproduceOptions) -> Result<TargetReport> {
    let mut files = Vec::new();
    let checks = match target {
        Target::Table1 => table1(opts, &mut files)?,
        Target::NormalPaths => normal_paths(opts, &mut files)?,
        Target::AbilityGrid => ability(opts, &mut files)?,
        Target::CfaCurvature => cfa_curvature(opts, &mut files)?,
        Target::CfaSim => cfa_sim(opts, &mut files)?,
        Target::Twopl => twopl(opts, &mut files)?,
        Target::Jeffreys => jeffreys(opts, &mut files)?,
    };
    let report = TargetReport { target: target.name().to_string(), checks, files };
    let path = opts.out_dir.join(format!("{}-checks.json", target.name()));
    write_json(&path, &manifest(target, opts, &path), &report)?;
    Ok(report)
}

fn manifest(target: Target, opts: &ReproduceOptions, path: &Path) -> RunManifest {
    let seeded = matches!(target, Target::CfaSim | Target::Twopl);
    RunManifest::new(&format!("reproduce {}", target.name()), None, seeded.then_some(opts.seed), opts.tol)
        .with_output(path)
}

fn artifact(target: Target, opts: &ReproduceOptions, name: &str, files: &mut Vec<String>) -> (PathBuf, RunManifest) {
    let path = opts.out_dir.join(name);
    files.push(path.display().to_string());
    let m = manifest(target, opts, &path);
    (path, m)
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub row: usize,
    pub model: &'static str,
    pub computed: f64,
    /// Value as published.
    pub expected: f64,
    /// Value implied by the metric's closed form.
    pub exact: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Scalar curvature of every model in the intrinsic-curvature table.
pub fn table1_rows() -> infogeom_core::Result<Vec<Table1Row>> {
    let n = 10u32;
    let mut rows = Vec::new();
    let mut push = |model: &'static str, computed: f64, expected: f64, exact: f64| {
        let tolerance = 1e-2;
        rows.push(Table1Row {
            row: rows.len() + 1,
            model,
            computed,
            expected,
            exact,
            tolerance,
            pass: (computed - expected).abs() <= tolerance,
        });
    };
    let r = |g: &dyn MetricField, theta: &[f64]| scalar_curvature(&g, theta);
    push("univariate normal", r(&FisherMetric::new(&Normal1D), &[0.3, 1.7])?, -1.0, -1.0);
    push("5 i.i.d. normals", r(&Scaled::new(FisherMetric::new(&Normal1D), 5.0), &[0.3, 1.7])?, -0.2, -0.2);
    let full = MvNormal::new(MvNormalVariant::FullBivariate);
    push("bivariate normal", r(&FisherMetric::new(&full), &[0.1, -0.2, 1.3, 0.8, 0.3])?, -4.5, -4.5);
    let unc = MvNormal::new(MvNormalVariant::UncorrelatedBivariate);
    push("bivariate normal, rho = 0", r(&FisherMetric::new(&unc), &[0.1, -0.2, 1.3, 0.8])?, -2.0, -2.0);
    let iso2 = MvNormal::new(MvNormalVariant::IsoBivariate);
    push("bivariate normal, sigma1 = sigma2, rho = 0", r(&FisherMetric::new(&iso2), &[0.1, -0.2, 1.3])?, -3.0, -1.5);
    let iso3 = MvNormal::new(MvNormalVariant::iso(3)?);
    push("isotropic 3-variate normal", r(&FisherMetric::new(&iso3), &[0.1, -0.2, 0.4, 1.3])?, -6.0, -2.0);
    let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
    let known = MvNormal::new(MvNormalVariant::known_cov(s)?);
    push("bivariate normal, known covariance", r(&FisherMetric::new(&known), &[0.5, -1.0])?, 0.0, 0.0);
    let nf = f64::from(n);
    for (m, theta, value) in [
        (3usize, vec![0.2, 0.3], 1.0 / (2.0 * nf)),
        (4, vec![0.2, 0.3, 0.1], 3.0 / (2.0 * nf)),
        (5, vec![0.2, 0.3, 0.1, 0.15], 3.0 / nf),
    ] {
        let fam = MultinomialFamily::new(m, n)?;
        let name = match m {
            3 => "multinomial M = 3",
            4 => "multinomial M = 4",
            _ => "multinomial M = 5",
        };
        push(name, r(&FisherMetric::new(&fam), &theta)?, value, value);
    }
    Ok(rows)
}

fn table1(opts: &ReproduceOptions, files: &mut Vec<String>) -> Result<Vec<Check>> {
    let rows = table1_rows()?;
    let (path, m) = artifact(Target::Table1, opts, "table1.csv", files);
    write_csv(&path, &m, &rows)?;
    Ok(rows
        .iter()
        .map(|r| Check::new(format!("row {}: {}", r.row, r.model), r.computed, r.expected, Tolerance::Absolute(r.tolerance)))
        .collect())
}

#[derive(Serialize)]
struct PathPoint {
    path: &'static str,
    t: f64,
    mu: f64,
    sigma: f64,
}

#[derive(Serialize)]
struct BallPoint {
    ray: usize,
    mu: f64,
    sigma: f64,
}

/// `√2 log((√17 + 5)/(2√2))`.
pub fn normal_paths_reference() -> f64 {
    SQRT_2 * ((17f64.sqrt() + 5.0) / (2.0 * SQRT_2)).ln()
}

fn normal_paths(opts: &ReproduceOptions, files: &mut Vec<String>) -> Result<Vec<Check>> {
    let a = (0.0, 1.0);
    let b = (2.0, SQRT_2);
    let g = FisherMetric::new(&Normal1D);
    let curves = [
        ("line", normal_line(a, b)?, 1.744),
        ("circle", normal_circle_arc(a, b)?, 1.697),
        ("ellipse", normal_ellipse_arc(a, b)?, 1.656),
    ];
    let mut checks = Vec::new();
    let mut points = Vec::new();
    for (name, c, published) in &curves {
        let len = arc_length(&g, c, opts.tol.max(1e-12))?;
        checks.push(Check::new(format!("{name} length"), len.value, *published, Tolerance::Absolute(1e-3)));
        for i in 0..=100 {
            let t = c.t0() + (c.t1() - c.t0()) * f64::from(i) / 100.0;
            let p = c.point(t);
            points.push(PathPoint { path: name, t, mu: p[0], sigma: p[1] });
        }
    }
    let d = geodesic_distance_normal(a, b);
    checks.push(Check::new("closed-form distance", d, normal_paths_reference(), Tolerance::Absolute(1e-6)));
    checks.push(Check::new("closed-form distance, 3 decimals", d, 1.656, Tolerance::Absolute(5e-4)));
    let (path, m) = artifact(Target::NormalPaths, opts, "normal-paths.csv", files);
    write_csv(&path, &m, &points)?;
    let ball: Vec<BallPoint> = geodesic_ball_normal(a, d, 64)?
        .into_iter()
        .enumerate()
        .map(|(ray, (mu, sigma))| BallPoint { ray, mu, sigma })
        .collect();
    let (path, m) = artifact(Target::NormalPaths, opts, "normal-ball.csv", files);
    write_csv(&path, &m, &ball)?;
    Ok(checks)
}

#[derive(Serialize)]
struct AbilityCsvRow {
    test: String,
    items: usize,
    theta: f64,
    ability: f64,
    closed_form: f64,
    ramsay: f64,
}

fn seq(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).round() as usize;
    (0..=n).map(|i| a + step * i as f64).collect()
}

fn ability(opts: &ReproduceOptions, files: &mut Vec<String>) -> Result<Vec<Check>> {
    let thetas = seq(-6.0, 6.0, 0.1);
    let tests = [
        ("equal(5)", vec![0.0; 5]),
        ("-1(1)1", seq(-1.0, 1.0, 1.0)),
        ("-1(0.5)1", seq(-1.0, 1.0, 0.5)),
        ("-1(2/9)1", seq(-1.0, 1.0, 2.0 / 9.0)),
        ("-1(2)3", seq(-1.0, 3.0, 2.0)),
        ("-1(1)3", seq(-1.0, 3.0, 1.0)),
        ("-1(4/9)3", seq(-1.0, 3.0, 4.0 / 9.0)),
    ];
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (label, betas) in tests {
        let test = RaschTest::new(betas)?;
        let grid = ability_grid(&test, &thetas)?;
        if label == "equal(5)" {
            let gap = grid.iter().map(|r| (r.ability - r.closed_form).abs()).fold(0.0, f64::max);
            checks.push(Check::new("max |A - A0| on [-6, 6], 5 equal items", gap, 1e-8, Tolerance::Below));
            let top = geodesic_ability(&test, 60.0)?;
            checks.push(Check::new("A(+inf), 5 equal items", top, ability_limit(5), Tolerance::Absolute(1e-6)));
            let bottom = geodesic_ability(&test, -60.0)?;
            checks.push(Check::new("A(-inf), 5 equal items", bottom, 0.0, Tolerance::Absolute(1e-6)));
            let se = ability_se(&test, 0.7)?;
            checks.push(Check::new("SE of A0, printed convention", se.printed_convention, 2.0, Tolerance::Absolute(1e-12)));
            checks.push(Check::new("SE of A0, delta method", se.delta_method, 1.0, Tolerance::Absolute(1e-12)));
        }
        rows.extend(grid.into_iter().map(|r| AbilityCsvRow {
            test: label.to_string(),
            items: test.items(),
            theta: r.theta,
            ability: r.ability,
            closed_form: r.closed_form,
            ramsay: r.ramsay,
        }));
    }
    let (path, m) = artifact(Target::AbilityGrid, opts, "ability-grid.csv", files);
    write_csv(&path, &m, &rows)?;
    Ok(checks)
}

/// The three loading/variance scenarios of the one-factor model.
pub const CFA_SCENARIOS: [[f64; 3]; 3] = [[1.0, 1.0, 1.0], [2.0, 2.0, 1.0], [1.0, 1.0, SQRT_2]];

#[derive(Serialize)]
struct CfaRow {
    n: usize,
    lambda: f64,
    tau: f64,
    sigma: f64,
    closed_form: f64,
    analytic: f64,
    numeric: f64,
    omega2: f64,
}

fn cfa_curvature(opts: &ReproduceOptions, files: &mut Vec<String>) -> Result<Vec<Check>> {
    let published = [[0.083, 0.055, 0.098], [0.050, 0.033, 0.059]];
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for (i, n) in [30usize, 50].into_iter().enumerate() {
        let spec = Cfa3::new(n)?;
        for (j, th) in CFA_SCENARIOS.iter().enumerate() {
            let cf = gamma2_cfa_closed_form(th[0], th[1], th[2], n as f64);
            let rep = gamma2_analytic(&spec, th)?;
            checks.push(Check::new(
                format!("n={n} scenario {}: closed form", j + 1),
                cf,
                published[i][j],
                Tolerance::Absolute(1e-3),
            ));
            checks.push(Check::new(format!("n={n} scenario {}: frame pipeline", j + 1), rep.gamma2, cf, Tolerance::Relative(1e-6)));
            rows.push(CfaRow {
                n,
                lambda: th[0],
                tau: th[1],
                sigma: th[2],
                closed_form: cf,
                analytic: rep.gamma2,
                numeric: rep.diagnostics.cross_check_gamma2.unwrap_or(f64::NAN),
                omega2: rep.omega2,
            });
        }
    }
    let n = 25.0;
    checks.push(Check::new("sigma -> 0 limit, n=25", gamma2_cfa_closed_form(1.0, 1.0, 1e-4, n), 4.0 / n, Tolerance::Relative(1e-3)));
    checks.push(Check::new(
        "lambda, tau -> inf limit, n=25",
        gamma2_cfa_closed_form(1e3, 1e3, 1.0, n),
        38.0 / (27.0 * n),
        Tolerance::Relative(1e-3),
    ));
    checks.push(Check::new("lambda = tau = 50, n=25", gamma2_cfa_closed_form(50.0, 50.0, 1.0, n), 0.0563, Tolerance::Absolute(1e-4)));
    let (path, m) = artifact(Target::CfaCurvature, opts, "cfa-curvature.csv", files);
    write_csv(&path, &m, &rows)?;
    Ok(checks)
}

#[derive(Serialize)]
struct SimPayload {
    scenarios: Vec<crate::simulate::SimulationReport>,
}

#[derive(Serialize)]
struct ReplicateRow {
    scenario: usize,
    #[serde(flatten)]
    record: ReplicateRecord,
}

/// Published harmonic means for `n = 30`: `(γ̃², ω̃²)` per scenario.
pub const CFA_SIM_PUBLISHED: [(f64, f64); 3] = [(0.087, 0.316), (0.058, 0.326), (0.095, 0.345)];

fn cfa_sim(opts: &ReproduceOptions, files: &mut Vec<String>) -> Result<Vec<Check>> {
    let spec = Cfa3::new(30)?;
    let cfg = OptimizerConfig::default();
    let mut checks = Vec::new();
    let mut scenarios = Vec::new();
    let mut rows = Vec::new();
    for (j, th) in CFA_SCENARIOS.iter().enumerate() {
        let (report, reps) = simulate(&spec, th, opts.replicates, opts.seed, &cfg)?;
        let (g, w) = CFA_SIM_PUBLISHED[j];
        checks.push(Check::new(format!("scenario {}: harmonic gamma2", j + 1), report.gamma2_harmonic, g, Tolerance::Relative(0.15)));
        checks.push(Check::new(format!("scenario {}: harmonic omega2", j + 1), report.omega2_harmonic, w, Tolerance::Relative(0.15)));
        rows.extend(reps.iter().map(|r| ReplicateRow { scenario: j + 1, record: r.into() }));
        scenarios.push(report);
    }
    let (path, m) = artifact(Target::CfaSim, opts, "cfa-sim.json", files);
    write_json(&path, &m, &SimPayload { scenarios })?;
    let (path, m) = artifact(Target::CfaSim, opts, "cfa-sim-replicates.csv", files);
    write_csv(&path, &m, &rows.iter().map(flat_replicate).collect::<Vec<_>>())?;
    Ok(checks)
}

#[derive(Serialize)]
struct FlatReplicate {
    scenario: usize,
    index: usize,
    seed: u64,
    converged: bool,
    gamma2: Option<f64>,
    omega2: Option<f64>,
    theta_hat: String,
}

fn flat_replicate(r: &ReplicateRow) -> FlatReplicate {
    FlatReplicate {
        scenario: r.scenario,
        index: r.record.index,
        seed: r.record.seed,
        converged: r.record.converged,
        gamma2: r.record.gamma2,
        omega2: r.record.omega2,
        theta_hat: r.record.theta_hat.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
    }
}

/// Generating values `(α₂, β₂, θ₁, θ₂)` for the grouped 2PL runs.
pub const TWOPL_TRUTH: [f64; 4] = [1.5, 1.0, -0.5, 0.5];

/// Number of independent seeds in the 2PL run.
pub const TWOPL_SEEDS: usize = 20;

fn twopl(opts: &ReproduceOptions, files: &mut Vec<String>) -> Result<Vec<Check>> {
    let spec = TwoPLGrouped::new(500, 20)?;
    let cfg = OptimizerConfig::default();
    let mut rows = Vec::new();
    let mut max_gamma = 0.0f64;
    let mut min_omega = f64::INFINITY;
    let mut all_converged = true;
    let reps: Vec<_> =
        (0..TWOPL_SEEDS).into_par_iter().map(|s| run_replicate(&spec, &TWOPL_TRUTH, opts.seed, s, &cfg)).collect();
    for (s, r) in reps.iter().enumerate() {
        all_converged &= r.converged;
        max_gamma = max_gamma.max(r.gamma2);
        min_omega = min_omega.min(r.omega2);
        rows.push(FlatReplicate {
            scenario: s,
            index: r.index,
            seed: r.seed,
            converged: r.converged,
            gamma2: Some(r.gamma2).filter(|x| x.is_finite()),
            omega2: Some(r.omega2).filter(|x| x.is_finite()),
            theta_hat: r.theta_hat.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
        });
    }
    let (path, m) = artifact(Target::Twopl, opts, "twopl.csv", files);
    write_csv(&path, &m, &rows)?;
    Ok(vec![
        Check::flag("all fits converged", all_converged),
        Check::new("max gamma2 over seeds", max_gamma, 1e-6, Tolerance::Below),
        Check::new("min omega2 over seeds", min_omega, 10.0, Tolerance::Above),
    ])
}

#[derive(Serialize)]
struct JeffreysPayload {
    bernoulli_constant: Option<f64>,
    bernoulli_box_volumes: Vec<f64>,
    normal_proper: bool,
    normal_box_volumes: Vec<f64>,
}

fn jeffreys(opts: &ReproduceOptions, files: &mut Vec<String>) -> Result<Vec<Check>> {
    let bernoulli = FnMetric::new(1, |p: &[f64]| Ok(DMatrix::from_element(1, 1, 1.0 / (p[0] * (1.0 - p[0])))));
    let b = jeffreys_normalization(&bernoulli, &Domain::new(vec![Interval::UNIT]), 1e-11)?;
    let nrm = jeffreys_normalization(&FisherMetric::new(&Normal1D), &Normal1D.domain(), 1e-8)?;
    let item = RaschTest::equal(1)?;
    let mut worst = 0.0f64;
    for i in 0..=40 {
        let eta = -4.0 + 0.2 * f64::from(i);
        let pi = infogeom_core::families::rasch::logistic(eta);
        let logit = jeffreys_prior(&FisherMetric::new(&item), &[eta])?;
        let moved = jeffreys_prior(&bernoulli, &[pi])? * pi * (1.0 - pi);
        worst = worst.max((logit - moved).abs());
    }
    let checks = vec![
        Check::new("Bernoulli normalizing constant", b.constant.unwrap_or(f64::NAN), PI, Tolerance::Absolute(1e-6)),
        Check::flag("normal Jeffreys prior flagged improper", !nrm.proper),
        Check::new("Bernoulli logit vs probability chart", worst, 1e-8, Tolerance::Below),
    ];
    let (path, m) = artifact(Target::Jeffreys, opts, "jeffreys.json", files);
    write_json(
        &path,
        &m,
        &JeffreysPayload {
            bernoulli_constant: b.constant,
            bernoulli_box_volumes: b.box_volumes,
            normal_proper: nrm.proper,
            normal_box_volumes: nrm.box_volumes,
        },
    )?;
    Ok(checks)
}
