//! Fisher-Rao geometry for parametric statistical models.
//!
//! A regular parametric family `p(y | θ)` is treated as a Riemannian manifold
//! whose metric is the Fisher information. On top of that this crate provides:
//!
//! | Area | Entry points |
//! |------|--------------|
//! | Fisher information | [`model::score`], [`model::numeric_fisher`], [`model::check_identity`] |
//! | Distances | [`geometry::line_element`], [`geometry::arc_length`], [`geometry::geodesic_distance_normal`] |
//! | Ability scales | [`irt_scale::geodesic_ability`], [`irt_scale::ramsay_arclength`], [`irt_scale::hougaard_transform`] |
//! | Curvature | [`curvature::scalar_curvature`], [`curvature::gamma2_analytic`], [`curvature::gamma2_numeric`] |
//! | Estimation and volume | [`inference::fit_mle`], [`inference::volume_element`], [`inference::jeffreys_prior`] |
//!
//! The crate is `no_std` and only needs `alloc`. IO, file formats and the
//! command-line driver live in the `infogeom` companion crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cef;
pub mod curvature;
pub mod diff;
pub mod error;
pub mod families;
pub mod geometry;
pub mod inference;
pub mod irt_scale;
pub mod linalg;
pub mod metric;
pub mod model;
pub mod quad;

pub use error::{Error, Result};
pub use metric::MetricField;
pub use model::{Dataset, Domain, Interval, ModelFamily};
