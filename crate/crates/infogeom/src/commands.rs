//! Command implementations behind the `infogeom` binary.

use std::fmt;
use std::path::{Path, PathBuf};

use infogeom_core::families::Cfa3;
use infogeom_core::geometry::{
    arc_length, geodesic_distance_normal, normal_circle_arc, normal_ellipse_arc, shoot_geodesic, Curve,
};
use infogeom_core::inference::OptimizerConfig;
use infogeom_core::irt_scale::ability_grid;
use infogeom_core::MetricField;
use serde::Serialize;

use crate::output::{emit_csv, emit_json, resolve_output, RunManifest, OUT_DIR_ENV};
use crate::reproduce::{self, ReproduceOptions, Target, TargetReport};
use crate::simulate::{simulate, ReplicateRecord, SimulationReport};
use crate::spec::{Family, ModelSpec, SpecError};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERIC: i32 = 3;
}

/// An error together with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl CliError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        CliError { code: exit::USAGE, error: anyhow::anyhow!("{msg}") }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError { code: exit::USAGE, error: e.into() }
    }
}

impl From<infogeom_core::Error> for CliError {
    fn from(e: infogeom_core::Error) -> Self {
        use infogeom_core::Error as E;
        let code = match e {
            E::Domain { .. } | E::DimensionMismatch { .. } | E::InvalidArgument(_) => exit::USAGE,
            _ => exit::NUMERIC,
        };
        CliError { code, error: e.into() }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        match error.downcast::<infogeom_core::Error>() {
            Ok(e) => e.into(),
            Err(error) => CliError { code: exit::NUMERIC, error },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `"a,b,c"` into a vector.
pub fn parse_point(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::usage(format!("bad coordinate {t:?} in {s:?}"))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Line,
    Circle,
    Ellipse,
    Geodesic,
    Custom,
}

impl PathKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "line" => PathKind::Line,
            "circle" => PathKind::Circle,
            "ellipse" => PathKind::Ellipse,
            "geodesic" => PathKind::Geodesic,
            "custom" => PathKind::Custom,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            PathKind::Line => "line",
            PathKind::Circle => "circle",
            PathKind::Ellipse => "ellipse",
            PathKind::Geodesic => "geodesic",
            PathKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DistanceArgs {
    pub model: PathBuf,
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub path: PathKind,
    /// Interior points of a custom polyline.
    pub via: Vec<Vec<f64>>,
    pub tol: f64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRecord {
    pub model: String,
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub path: String,
    pub length: f64,
    /// Estimated quadrature error, or the endpoint miss of a shot geodesic.
    pub error: f64,
    /// `closed-form`, `quadrature` or `shooting`.
    pub method: String,
}

pub fn distance_record(family: &Family, args: &DistanceArgs) -> CliResult<DistanceRecord> {
    let domain = family.domain();
    domain.check(&args.from)?;
    domain.check(&args.to)?;
    for p in &args.via {
        domain.check(p)?;
    }
    let g = family.metric();
    let normal = matches!(family, Family::Normal(_));
    let pair = |v: &[f64]| (v[0], v[1]);
    let (length, error, method) = if args.from == args.to {
        (0.0, 0.0, "closed-form")
    } else {
        match args.path {
            PathKind::Geodesic if normal => {
                (geodesic_distance_normal(pair(&args.from), pair(&args.to)), 0.0, "closed-form")
            }
            PathKind::Geodesic => {
                let geo = shoot_geodesic(&g, &args.from, &args.to, 200)?;
                (geo.length, geo.miss, "shooting")
            }
            kind => {
                let curve = match kind {
                    PathKind::Line => Curve::line(&args.from, &args.to)?,
                    PathKind::Circle | PathKind::Ellipse if !normal => {
                        return Err(CliError::usage(format!("{} paths need the normal family", kind.name())));
                    }
                    PathKind::Circle => normal_circle_arc(pair(&args.from), pair(&args.to))?,
                    PathKind::Ellipse => normal_ellipse_arc(pair(&args.from), pair(&args.to))?,
                    _ => {
                        let mut pts = vec![args.from.clone()];
                        pts.extend(args.via.iter().cloned());
                        pts.push(args.to.clone());
                        Curve::polyline(pts)?
                    }
                };
                let len = arc_length(&g, &curve, args.tol)?;
                (len.value, len.error, "quadrature")
            }
        }
    };
    Ok(DistanceRecord {
        model: family.name().to_string(),
        from: args.from.clone(),
        to: args.to.clone(),
        path: args.path.name().to_string(),
        length,
        error,
        method: method.to_string(),
    })
}

fn load(path: &Path) -> CliResult<Family> {
    Ok(ModelSpec::load(path)?.build()?)
}

fn check_dim(g: &dyn MetricField, v: &[f64]) -> CliResult<()> {
    if v.len() != g.dim() {
        return Err(CliError::usage(format!("point has {} coordinates, model needs {}", v.len(), g.dim())));
    }
    Ok(())
}

pub fn distance(args: &DistanceArgs) -> CliResult<DistanceRecord> {
    let family = load(&args.model)?;
    {
        let g = family.metric();
        check_dim(g.as_ref(), &args.from)?;
        check_dim(g.as_ref(), &args.to)?;
        for p in &args.via {
            check_dim(g.as_ref(), p)?;
        }
    }
    let rec = distance_record(&family, args)?;
    let out = resolve_output(args.out.as_deref(), "distance.json");
    let mut m = RunManifest::new("distance", Some(&args.model), None, args.tol);
    if let Some(p) = &out {
        m = m.with_output(p);
    }
    emit_json(out.as_deref(), &m, &rec)?;
    Ok(rec)
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub model: PathBuf,
    pub theta: Vec<f64>,
    /// Overrides the sample size in the spec (persons for 2PL).
    pub n: Option<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub tol: f64,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SimulateOutput {
    summary: SimulationReport,
    replicate_records: Vec<ReplicateRecord>,
}

pub fn simulate_cmd(args: &SimulateArgs) -> CliResult<SimulationReport> {
    if args.replicates == 0 {
        return Err(CliError::usage("--replicates must be at least 1"));
    }
    let family = load(&args.model)?;
    let cfg = OptimizerConfig { tol_grad: args.tol, ..OptimizerConfig::default() };
    let (report, reps) = match family {
        Family::Cfa3(c) => {
            let spec = match args.n {
                Some(n) => Cfa3::new(n)?,
                None => c,
            };
            check_len(&args.theta, 3)?;
            simulate(&spec, &args.theta, args.replicates, args.seed, &cfg)?
        }
        Family::TwoPL(t) => {
            let spec = match args.n {
                Some(n) => infogeom_core::families::TwoPLGrouped::new(n, t.items())?,
                None => t,
            };
            check_len(&args.theta, 4)?;
            simulate(&spec, &args.theta, args.replicates, args.seed, &cfg)?
        }
        other => return Err(CliError::usage(format!("simulate needs a curved family, got {}", other.name()))),
    };
    let out = resolve_output(args.out.as_deref(), "simulate.json");
    let mut m = RunManifest::new("simulate", Some(&args.model), Some(args.seed), args.tol);
    if let Some(p) = &out {
        m = m.with_output(p);
    }
    let payload = SimulateOutput { summary: report, replicate_records: reps.iter().map(Into::into).collect() };
    emit_json(out.as_deref(), &m, &payload)?;
    Ok(payload.summary)
}

fn check_len(theta: &[f64], q: usize) -> CliResult<()> {
    if theta.len() != q {
        return Err(CliError::usage(format!("--theta needs {q} values, got {}", theta.len())));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct AbilityArgs {
    pub model: PathBuf,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    pub out: Option<PathBuf>,
}

pub fn ability_cmd(args: &AbilityArgs) -> CliResult<usize> {
    let Family::Rasch(test) = load(&args.model)? else {
        return Err(CliError::usage("ability-grid needs a rasch model"));
    };
    if !(args.step > 0.0) || !(args.to >= args.from) || !args.from.is_finite() || !args.to.is_finite() {
        return Err(CliError::usage("need --from <= --to and --step > 0"));
    }
    let n = ((args.to - args.from) / args.step + 1e-9).floor() as usize;
    let thetas: Vec<f64> = (0..=n).map(|i| args.from + args.step * i as f64).collect();
    let rows = ability_grid(&test, &thetas)?;
    let out = resolve_output(args.out.as_deref(), "ability-grid.csv");
    let mut m = RunManifest::new("ability-grid", Some(&args.model), None, infogeom_core::irt_scale::QUAD_TOL);
    if let Some(p) = &out {
        m = m.with_output(p);
    }
    #[derive(Serialize)]
    struct Row {
        theta: f64,
        ability: f64,
        closed_form: f64,
        ramsay: f64,
    }
    let rows: Vec<Row> = rows
        .into_iter()
        .map(|r| Row { theta: r.theta, ability: r.ability, closed_form: r.closed_form, ramsay: r.ramsay })
        .collect();
    emit_csv(out.as_deref(), &m, &rows)?;
    Ok(rows.len())
}

#[derive(Debug, Clone)]
pub struct ReproduceArgs {
    /// A target name or `all`.
    pub target: String,
    pub out: Option<PathBuf>,
    pub replicates: usize,
    pub seed: u64,
    pub tol: f64,
}

pub fn reproduce_cmd(args: &ReproduceArgs) -> CliResult<Vec<TargetReport>> {
    let targets: Vec<Target> = if args.target == "all" {
        Target::ALL.to_vec()
    } else {
        vec![Target::parse(&args.target).ok_or_else(|| {
            let names: Vec<_> = Target::ALL.iter().map(|t| t.name()).collect();
            CliError::usage(format!("unknown target {:?}; expected one of {} or all", args.target, names.join(", ")))
        })?]
    };
    if args.replicates == 0 {
        return Err(CliError::usage("--replicates must be at least 1"));
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let opts = ReproduceOptions { out_dir, seed: args.seed, replicates: args.replicates, tol: args.tol };
    targets.into_iter().map(|t| reproduce::run(t, &opts).map_err(CliError::from)).collect()
}
