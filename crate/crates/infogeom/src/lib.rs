//! Command-line driver and file formats for `infogeom-core`.
//!
//! Model specs are JSON files (see [`spec`]); outputs are CSV for grids and
//! JSON for reports, each carrying a [`output::RunManifest`] header.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod output;
pub mod reproduce;
pub mod simulate;
pub mod spec;
