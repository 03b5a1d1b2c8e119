//! Matched-pairs crossover trials: design, estimation and diagnostics.
//!
//! The crate covers the full life cycle of a two-arm crossover study in which
//! every subject is treated in half of the study units and acts as their own
//! control in the other half:
//!
//! * [`design`] blocks a roster on demographic strata, pairs similar students
//!   by exact minimum-weight perfect matching and hands each pair
//!   complementary arm patterns.
//! * [`analysis`] standardizes exam scores against the control group, forms
//!   per-student treated-minus-control differences and runs the asymptotic and
//!   randomization tests plus the diagnostic suite (compliance, term,
//!   carryover, heterogeneity).
//! * [`simulator`] draws datasets from the additive ability/effect score model
//!   and powers calibration and power studies.
//! * [`io`] reads and writes the delimited-text and structured-text formats.

pub mod analysis;
pub mod design;
pub mod error;
pub mod io;
pub mod model;
pub mod rng;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    Arm, ArmPattern, ClassYear, ComplianceRecord, Covariate, Design, EffectReport, ExamKind,
    ExamMeta, PatternMode, Roster, ScoreTable, Student,
};
