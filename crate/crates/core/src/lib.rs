//! Spatio-temporal graph model of team-sport attacking plays.
//!
//! An attacking play is encoded as a labeled path on a *skeleton graph* whose
//! spatial vertices pair a carrier-centred relative position (how many
//! teammates sit in each relative zone) with the absolute zone the ball carrier
//! occupies. Arcs are labeled with the spatial relation (`rel`, `abs`) and the
//! thematic events (passes, ...) that separate consecutive states, and every
//! path ends on a result vertex.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: configuration, position classifiers and the skeleton graph.
//! - [`ingest`]: the tracked-play dataset format, validation and orientation.
//! - [`path`]: labeled path construction from tracked plays.
//! - [`features`]: per-path and per-set coordination features.
//! - [`aggregate`]: weighted unions (arc occurrences, time spent per vertex).
//! - [`stats`]: Kruskal-Wallis, Dunn-Holm, Mann-Whitney and chi-square tests.
//! - [`export`]: DOT, canonical structured text and delimited tables.
//! - [`synth`]: seeded synthetic datasets.
//! - [`pipeline`]: file-level commands used by the `playgraph` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod canon;
pub mod export;
pub mod features;
pub mod ingest;
pub mod model;
pub mod path;
pub mod pipeline;
pub mod stats;
pub mod synth;

pub use aggregate::{AggregateGraph, AggregateOptions, TagFilter};
pub use features::{CrossingRank, FeatureParams, FeatureRow, FeatureTable};
pub use ingest::{Dataset, EventRecord, Frame, ParseError, PlayRecord, Point};
pub use model::{
    ModelConfig, SkeletonGraph, SpatialLabel, SpatialState, ValidationReport, Violation,
};
pub use path::{LabeledPath, PathArc, PathSet, PathVertex};
