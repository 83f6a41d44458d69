//! Circle detection on edge images driven by a finite-action learning
//! automaton, with a genetic-algorithm baseline and a benchmark harness.
//!
//! The pipeline:
//!
//! 1. **edgemap** — load PGM/PNG grayscale, run Canny, sample the working
//!    edge-point vector.
//! 2. **geometry** — circle through three points; midpoint-circle
//!    rasterization into integer test points.
//! 3. **automaton** — probability vector, linear reward/inaction update,
//!    roulette selection.
//! 4. **detector** — candidate actions from point triples, the edge-match
//!    reinforcement signal, the learning loop, multi-circle extraction by
//!    masking.
//! 5. **ga** — the comparison GA detector sharing the same scoring
//!    infrastructure.
//! 6. **bench** — synthetic scenes, the weighted error score, seeded trial
//!    statistics.
//!
//! Every entry point takes an explicit seed and is a pure function of its
//! inputs, so whole runs reproduce bit for bit. See the crate examples for
//! one runnable program per capability, and the `la-circles` binary for the
//! command-line front end.

pub mod automaton;
pub mod bench;
pub mod cli;
pub mod detector;
pub mod edgemap;
pub mod error;
pub mod ga;
pub mod geometry;
mod seeding;

pub use detector::{
    detect_multiple, detect_one, match_score, DetectionResult, DetectorConfig, RadiusMaxRule,
};
pub use edgemap::{
    canny, load_edge_map, load_gray, sample_edge_points, save_edge_map, EdgeMap, EdgePoint,
    GrayImage,
};
pub use error::{Error, Result};
pub use geometry::{circle_from_three_points, rasterize_circle, Circle};
