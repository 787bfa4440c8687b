//! Core library for `bahop`: a hyperparameter search toolkit for whole-slide
//! tissue-segmentation pipelines.
//!
//! The crate is organized around a small number of layers:
//!
//! * [`raster`] / [`pnm`] — 8-bit raster images, binary masks, the integer
//!   imaging kernels the pipeline is built from, and portable pixmap I/O.
//! * [`params`] — the six-knob preprocessing parameter vector, discrete
//!   search spaces over it, and the one-step perturbation move.
//! * [`segmentation`] — the fixed-order tissue segmentation pipeline,
//!   connected-component filtering, patch extraction, and thumbnails.
//! * [`similarity`] — PSNR over rasters and thumbnail sets, and the
//!   similarity-threshold calibration used to gate expensive evaluations.
//! * [`cohort`] / [`oracle`] — a deterministic synthetic slide cohort and a
//!   frozen inference oracle that turns a parameter vector into an objective
//!   plus simulated cost.
//! * [`ledger`] / [`replay`] — append-only run ledgers, their serialized
//!   form, and full replay verification.
//! * [`optimize`] — the strategy registry: basin hopping with a PSNR gate,
//!   plus grid, random, simulated-annealing, and Bayesian baselines.
//! * [`config`] — the on-disk run configuration schema.

pub mod cohort;
pub mod config;
pub mod error;
pub mod ledger;
pub mod optimize;
pub mod oracle;
pub mod params;
pub mod pnm;
pub mod raster;
pub mod replay;
pub mod segmentation;
pub mod similarity;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
