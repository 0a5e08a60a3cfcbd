//! Model-spec files.
//!
//! A spec is a JSON object tagged by `family`:
//!
//! ```json
//! {"family": "normal"}
//! {"family": "mvnormal", "variant": "iso", "d": 3}
//! {"family": "mvnormal", "variant": "known-cov", "cov": [[2.0, 0.3], [0.3, 1.0]]}
//! {"family": "rasch", "difficulties": [-1.0, 0.0, 1.0]}
//! {"family": "multinomial", "categories": 3, "trials": 10}
//! {"family": "cfa3", "n": 30}
//! {"family": "twopl", "persons": 500, "items": 20}
//! ```
//!
//! `mvnormal` variants are `full-bivariate`, `uncorrelated-bivariate`,
//! `iso-bivariate`, `iso` (needs `d`) and `known-cov` (needs `cov`).

use std::path::Path;

use infogeom_core::families::{Cfa3, MultinomialFamily, MvNormal, MvNormalVariant, Normal1D, RaschTest, TwoPLGrouped};
use infogeom_core::metric::FisherMetric;
use infogeom_core::{Domain, MetricField, ModelFamily};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read model spec {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid model spec: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid model spec: {0}")]
    Model(#[from] infogeom_core::Error),
    #[error("invalid model spec: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MvVariant {
    FullBivariate,
    UncorrelatedBivariate,
    IsoBivariate,
    Iso,
    KnownCov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Normal,
    Mvnormal {
        variant: MvVariant,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cov: Option<Vec<Vec<f64>>>,
    },
    Rasch {
        difficulties: Vec<f64>,
    },
    Multinomial {
        categories: usize,
        trials: u32,
    },
    Cfa3 {
        n: usize,
    },
    Twopl {
        persons: usize,
        items: usize,
    },
}

/// A validated model.
#[derive(Debug, Clone)]
pub enum Family {
    Normal(Normal1D),
    MvNormal(MvNormal),
    Rasch(RaschTest),
    Multinomial(MultinomialFamily),
    Cfa3(Cfa3),
    TwoPL(TwoPLGrouped),
}

impl ModelSpec {
    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn build(&self) -> Result<Family, SpecError> {
        Ok(match self {
            ModelSpec::Normal => Family::Normal(Normal1D),
            ModelSpec::Mvnormal { variant, d, cov } => {
                let v = match variant {
                    MvVariant::FullBivariate => MvNormalVariant::FullBivariate,
                    MvVariant::UncorrelatedBivariate => MvNormalVariant::UncorrelatedBivariate,
                    MvVariant::IsoBivariate => MvNormalVariant::IsoBivariate,
                    MvVariant::Iso => MvNormalVariant::iso(d.ok_or_else(|| SpecError::Invalid("iso needs d".into()))?)?,
                    MvVariant::KnownCov => {
                        let rows = cov.as_ref().ok_or_else(|| SpecError::Invalid("known-cov needs cov".into()))?;
                        let k = rows.len();
                        if rows.iter().any(|r| r.len() != k) {
                            return Err(SpecError::Invalid("cov must be square".into()));
                        }
                        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                        MvNormalVariant::known_cov(DMatrix::from_row_slice(k, k, &flat))?
                    }
                };
                Family::MvNormal(MvNormal::new(v))
            }
            ModelSpec::Rasch { difficulties } => Family::Rasch(RaschTest::new(difficulties.clone())?),
            ModelSpec::Multinomial { categories, trials } => {
                Family::Multinomial(MultinomialFamily::new(*categories, *trials)?)
            }
            ModelSpec::Cfa3 { n } => Family::Cfa3(Cfa3::new(*n)?),
            ModelSpec::Twopl { persons, items } => Family::TwoPL(TwoPLGrouped::new(*persons, *items)?),
        })
    }
}

/// The induced Fisher metric of a curved family, `η̇ᵀ ∇²Ψ η̇`.
struct CefMetric<'a, C>(&'a C);

impl<C: infogeom_core::cef::CurvedExpFamily> MetricField for CefMetric<'_, C> {
    fn dim(&self) -> usize {
        self.0.q()
    }

    fn metric(&self, theta: &[f64]) -> infogeom_core::Result<DMatrix<f64>> {
        self.0.domain().check(theta)?;
        let j = self.0.eta_jacobian(theta)?;
        let g = self.0.log_partition_hessian(&self.0.eta(theta)?)?;
        Ok(j.transpose() * g * j)
    }
}

/// Multinomial Fisher metric with the simplex constraint enforced.
struct SimplexMetric(MultinomialFamily);

impl MetricField for SimplexMetric {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn metric(&self, theta: &[f64]) -> infogeom_core::Result<DMatrix<f64>> {
        self.0.check(theta)?;
        Ok(self.0.fisher(theta))
    }
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Normal(_) => "normal",
            Family::MvNormal(_) => "mvnormal",
            Family::Rasch(_) => "rasch",
            Family::Multinomial(_) => "multinomial",
            Family::Cfa3(_) => "cfa3",
            Family::TwoPL(_) => "twopl",
        }
    }

    pub fn domain(&self) -> Domain {
        use infogeom_core::cef::CurvedExpFamily;
        match self {
            Family::Normal(m) => m.domain(),
            Family::MvNormal(m) => m.domain(),
            Family::Rasch(m) => m.domain(),
            Family::Multinomial(m) => m.domain(),
            Family::Cfa3(m) => CurvedExpFamily::domain(m),
            Family::TwoPL(m) => CurvedExpFamily::domain(m),
        }
    }

    /// Fisher metric of the family (of the whole dataset for curved families).
    pub fn metric(&self) -> Box<dyn MetricField + Send + Sync + '_> {
        match self {
            Family::Normal(m) => Box::new(FisherMetric::new(m)),
            Family::MvNormal(m) => Box::new(FisherMetric::new(m)),
            Family::Rasch(m) => Box::new(FisherMetric::new(m)),
            Family::Multinomial(m) => Box::new(SimplexMetric(*m)),
            Family::Cfa3(m) => Box::new(CefMetric(m)),
            Family::TwoPL(m) => Box::new(CefMetric(m)),
        }
    }
}
