//! Quality scoring and existence verification for 2D similarity maps.
//!
//! A LISA-style segmentation model emits a `[SEG]` token whose feature is
//! compared against every image token. Reshaped to a grid, those similarities
//! form a [`ResponseMap`]. When the queried target exists the map shows one
//! strong, compact, coherent blob; when it does not, responses are weak or
//! scattered. This crate scores a map along three dimensions (strength,
//! compactness, purity), applies a cascaded threshold decision, and can hand
//! a rendered heatmap plus the scores to an external vision-language assessor
//! for the final call.
//!
//! Module map:
//! - [`scoring`]: robust statistics, score map, active region, the three scores, `decide`
//! - [`calibration`]: grid-search threshold selection and scatter export
//! - [`synth`]: seeded synthetic maps for offline evaluation
//! - [`render`]: colormapped PNG heatmaps
//! - [`holistic`]: prompt construction, assessor transports, verdict combination
//! - [`pipeline`] and [`evaluation`]: single-map verification and batch accuracy reports

pub mod calibration;
pub mod components;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod holistic;
pub mod manifest;
pub mod map;
pub mod pipeline;
pub mod quantile;
pub mod render;
pub mod scoring;
pub mod synth;

pub use config::{Connectivity, Dimension, DimensionMask, ScoringConfig, Thresholds};
pub use error::{Error, Result};
pub use map::ResponseMap;
pub use pipeline::{Verdict, Verifier};
pub use quantile::QuantileMethod;
pub use scoring::{decide, score, QualityScores};
pub use synth::Label;
