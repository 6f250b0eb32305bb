//! Analysis library for haptic softness-exploration data.
//!
//! The crate covers the full computational path from raw sensor traces to
//! perceptual-model outputs:
//!
//! * [`trace`] — CSV ingestion, smoothing, ramp segmentation, regression,
//!   decimation, and sigmoid cohort normalization.
//! * [`stiffness`] — virtual-stiffness observations from force-displacement
//!   ramps, observation fusion, the recursive gain-weighted recognition
//!   model, and the applied-work cue.
//! * [`frechet`] — discrete Fréchet distance (dynamic program plus an
//!   enumeration oracle) and the differencing-rule minimum-discrimination-
//!   time estimate.
//! * [`psychometrics`] — same-different signal detection under the
//!   differencing rule and maximum-likelihood psychometric fits.
//! * [`skinfit`] — layered Neo-Hookean skin stack, modulus-scale fitting,
//!   and the softness index.
//! * [`geometry`] — contact-print area from digitized boundary polygons.
//! * [`synth`] — seeded spring/contact trace generators used as ground
//!   truth throughout the test suites.
//! * [`stats`] — Spearman, Mann-Whitney U, Cohen's d, bootstrap intervals,
//!   seeded k-means, and cluster match rate.
//!
//! All operations are pure functions of their inputs; random procedures
//! take explicit seeds and are bit-reproducible.

pub mod error;
pub mod frechet;
pub mod geometry;
pub mod psychometrics;
pub mod skinfit;
pub mod stats;
pub mod stiffness;
pub mod synth;
pub mod trace;

pub use error::{Error, Result};
pub use frechet::{discrete_frechet, PolyCurve};
pub use stiffness::{FDCurve, RecursionTrajectory, StiffnessEstimate};
pub use trace::{Channel, LineFit, RampSegment, Trace};
